"""
Exact dyadics and certified enclosures
======================================

Every number the package computes with is either a dyadic rational m * 2**e,
held exactly, or an interval of dyadics guaranteed to contain the true value.
"""

from fractions import Fraction

from effopt import Dyadic, Interval, interval_exp, parse_dyadic
from effopt.realkit import Representation, effective_convergence_check

# Dyadics are closed under + - * and are stored in canonical odd-mantissa form.
a = parse_dyadic("3/8")
b = parse_dyadic("2^-5")
print("a =", a, " b =", b, " a*b =", a * b, " a-b =", a - b)
print("canonical form of 12:", Dyadic(12).mantissa, "* 2 **", Dyadic(12).exponent)

# Decimal text is accepted only when it is exactly dyadic.
for text in ("0.375", "0.1"):
    try:
        print(text, "->", parse_dyadic(text))
    except ValueError as exc:
        print(text, "-> rejected:", exc)

# Rationals that are not dyadic become outward-rounded intervals.
third = Interval.from_rationals(Fraction(1, 3), Fraction(1, 3), 20)
print("1/3 enclosed in", third, "width", third.width)

# exp is enclosed, never rounded to nearest; the width shrinks with precision.
for prec in (10, 30, 60):
    enc = interval_exp(Dyadic(1), prec)
    print(f"exp(1) at {prec:>2} bits: width {float(enc.width):.3e}, mid {float(enc.mid)!r}")

# A representation of a real is a sequence meeting |x - r_n| <= 2**-n.
rep = Representation.truncation(Fraction(22, 7))
print("22/7 truncations:", [str(rep(n)) for n in range(1, 6)])
print("contract holds for 40 terms:", effective_convergence_check(rep, Fraction(22, 7), 40))
slow = Representation(lambda n: Dyadic(1, -(n // 2 + 1)))
print("a sequence converging at half the rate fails it:",
      not effective_convergence_check(slow, 0, 10))
