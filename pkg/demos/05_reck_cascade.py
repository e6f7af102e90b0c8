"""Any unitary as a cascade of two-mode rotations.

Large transformations can be split into nearest-neighbour stages, each a
small read-pulse schedule.
"""
import numpy as np
from scipy.stats import unitary_group

from echotransform import compile_schedule, decompose_reck
from echotransform.compiler import compile_cascade

u = unitary_group.rvs(4, random_state=5)
dec = decompose_reck(u)
print(f"{len(dec.rotations)} rotations:")
for r in dec.rotations:
    print(f"  modes {r.modes}  theta {r.theta:.4f}  phi {r.phi:+.4f}")
print("reconstruction error", np.abs(dec.product() - u).max())

stages = compile_cascade(u)
print("read pulses per stage:", [len(s.train.reads) for s in stages])
print("read pulses for the direct schedule:", len(compile_schedule(u).train.reads))
