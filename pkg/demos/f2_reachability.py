"""
Only the ends of the f2 minimizer segment are reachable
=======================================================

For f2 the global minimizers fill the segment [-xi*, xi*] x {0}.  Coordinate
descent approaches it through G1(x2), which tends to -xi* as x2 -> 0+ and to
+xi* as x2 -> 0-.  Interior points are never the limit of such updates.
"""

from fractions import Fraction

from effopt import AssignmentPolicy, Dyadic, F2, F2Params, Problem, Rect, StoppingPolicy, gauss_seidel
from effopt.argmin import f2_assignments, g1_f2, m1_f2
from effopt.descent import critical_point_check

p = F2Params.standard()  # limit 1/2, rate 1/10
print("minimizer set on the axis:", m1_f2(p, 0))

print("\nG1(x2) for x2 = +-2^-k, certified to 2^-40")
for k in (1, 2, 4, 8, 12):
    up = g1_f2(p, Dyadic.pow2(-k))
    down = g1_f2(p, -Dyadic.pow2(-k))
    dist = float(-Fraction(1, 2) - up.mid.to_fraction())
    print(f"  k={k:>2}  G1(+)={float(up.mid):+.12f}  G1(-)={float(down.mid):+.12f}  gap to -1/2={dist:.3e}")

# A full run: the iterates creep toward (-1/2, 0).
box = Rect.box(2, 2)
trace = gauss_seidel(Problem(F2(p), box), f2_assignments(p, AssignmentPolicy.parse("left")),
                     (Dyadic(1), Dyadic(1)), StoppingPolicy.fixed_point(Dyadic.pow2(-30), 40))
print("\nGauss-Seidel from (1, 1):")
for n, x in enumerate(trace.iterates[:6]):
    print(f"  {n}: ({float(x[0]):+.10f}, {float(x[1]):+.3e})")
print("  ...", trace.stop_reason.value, "after", trace.sweeps, "sweeps at",
      tuple(map(str, trace.final)))
print("critical within 2^-20:", critical_point_check(F2(p), box, trace.final, tol=Dyadic.pow2(-20)))
