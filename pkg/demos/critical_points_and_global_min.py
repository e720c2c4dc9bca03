"""
Stationarity checks and global minimum enclosures
=================================================

A box-constrained critical point needs nonnegative one-sided slopes toward
every feasible direction.  Two independent checks are compared: per
coordinate, and by brute force over a grid of target points.  The global
minimum value itself is computable by branch and bound even when the
minimizers are not.
"""

from effopt import Dyadic, F1, F2, F2Params, Rect
from effopt.argmin import global_min_enclosure
from effopt.descent import critical_point_check, critical_point_grid_check

box = Rect.box(2, 2)
f1 = F1()
for x in [(-1, 0), (0, 0), (1, 0), (2, 0), (0, 1), (1, -1)]:
    pt = tuple(Dyadic(v) for v in x)
    print(f"{str(x):<8} per-coordinate: {critical_point_check(f1, box, pt)!s:<5} "
          f"grid 41x41: {critical_point_grid_check(f1, box, pt)}")

for name, f in (("f1", f1), ("f2", F2(F2Params.standard()))):
    enc = global_min_enclosure(f, box, Dyadic.pow2(-8))
    print(f"min of {name} over [-2,2]^2 lies in [{float(enc.lo):.6f}, {float(enc.hi):.6f}]")
