"""Two data pulses mixed by two pairs of read pulses.

Each pair is spaced like the data, so the echo of the first data pulse via the
second read pulse lands on the echo of the second data pulse via the first.
Their sum is one output mode of the 2x2 transformation.
"""
import numpy as np

from echotransform import compile_schedule, echo_events, validate
from echotransform.kernel import EnsembleModel

phi_b1, phi_a1, phi_b2 = 0.4, -0.9, 1.3
phi_a2 = phi_a1 + phi_b2 - phi_b1 + np.pi   # fixed by unitarity
u = np.array([[np.exp(1j * phi_b1), np.exp(1j * phi_a1)],
              [np.exp(1j * phi_b2), np.exp(1j * phi_a2)]]) / np.sqrt(2)

sched = compile_schedule(u)
print("read pulses (time ns, amplitude, phase, matrix cell):")
for p, cell in zip(sched.train.reads, sched.read_cells):
    print(f"  {p.center_time:7.1f}  {p.amplitude:.4f}  {p.phase:+.3f}  {cell}")
print(validate(sched).summary())

a = np.array([0.6, 0.8j])
events = echo_events(sched.with_input(a), EnsembleModel())
out = [next(e.amplitude for e in events if abs(e.time - t) < 1e-6) for t in sched.output_times]
decay = np.exp(-(sched.output_times - sched.input_bindings[0][1]) / 18000)
print("outputs / storage decay:", np.round(np.array(out) / decay, 12))
print("U a                    :", np.round(u @ a, 12))

# every other echo is auxiliary and lands away from the outputs
for e in events:
    tag = "output" if np.min(np.abs(sched.output_times - e.time)) < 1e-6 else "aux"
    print(f"  {e.time:7.1f} ns  |E| = {abs(e.amplitude):.4f}  {tag}")
