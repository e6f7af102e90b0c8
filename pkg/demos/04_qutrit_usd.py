"""Optimal unambiguous discrimination of three qutrit states.

The design gives each state its own conclusive mode and a shared inconclusive
mode. Simulating the compiled schedule shows no amplitude in the wrong
conclusive modes.
"""
import numpy as np

from echotransform import LayoutParams, compile_schedule, design_n_states, symmetric_states, validate
from echotransform.analysis import measure_design
from echotransform.kernel import EnsembleModel

states = symmetric_states(3, 0.3)
print("input states:")
for v in states:
    print("  ", np.round(v.amplitudes, 4))

design = design_n_states(states)
print("failure probabilities", np.round(design.p_inconclusive, 6), "average", round(design.p_inconclusive_avg, 6))
print("mode roles", design.mode_roles)
print("output states:")
for v in design.outputs:
    print("  ", np.round(v.amplitudes, 4))

sched = compile_schedule(design.transfer_matrix(), LayoutParams(allow_nonunitary=True))
print(validate(sched).summary())
for i in range(3):
    rates, [rep] = measure_design(sched, design, EnsembleModel(), states=[i])
    areas = ", ".join(f"{m.label}:{m.role}={m.normalized_area:.4f}" for m in rep.modes)
    print(f"state {i}: {areas}  ->  p_? = {rates.p_q:.6f}")
