"""
The convex series g* and its hidden flat segment
================================================

g* is a sum of shifted one-sided squares.  It vanishes exactly on
[-xi*, xi*], where xi* is the limit of a decreasing sequence.  Values are
enclosed by a truncated sum plus a certified tail bound.
"""

from fractions import Fraction

from effopt import Dyadic
from effopt.corpus import GStarParams, SequenceSpec, gstar_deriv, gstar_eval

p = GStarParams.standard("1/2")
enc = gstar_eval(p, 2)
print("g*(2) with limit 1/2:", f"[{float(enc.lo)!r}, {float(enc.hi)!r}]")
print("closed form 39/28   :", float(Fraction(39, 28)), " width", float(enc.width))

print("\nvalue and derivative along the positive axis")
for x in ("1/4", "1/2", "9/16", "3/4", "1", "3/2", "2"):
    d = gstar_deriv(p, Dyadic.coerce(x))
    v = gstar_eval(p, Dyadic.coerce(x))
    print(f"  x={x:<5} g*={float(v.mid):.10f}  g*'={float(d.interval.mid):.10f}  piece={d.piece}")

# Non-dyadic limits are kept as exact rationals.
small = GStarParams.standard(Fraction(1, 20))
print("\nlimit 1/20: g*(1/20) =", gstar_eval(small, Dyadic(1, -5)), " g*(1/8) ~",
      float(gstar_eval(small, Dyadic(1, -3)).mid))

# A plateau sequence agrees with the standard one for K terms, then its limit moves.
std, pla = SequenceSpec.standard("1/4"), SequenceSpec.plateau("1/4", 12)
print("\nfirst 12 terms identical:", all(std(n) == pla(n) for n in range(1, 13)))
print("limits:", std.limit, "vs", pla.limit, " (gap", pla.limit - std.limit, ")")
hidden = GStarParams(pla)
x = Dyadic(1, -2) + Dyadic.pow2(-30)
d = gstar_deriv(hidden, x)
print(f"just right of 1/4 the plateau derivative is only bounded: [0, {float(d.interval.hi):.3e}]",
      "certified =", d.certified)
