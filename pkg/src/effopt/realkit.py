"""Exact dyadic arithmetic, outward-rounded intervals and effective convergence.

A :class:`Dyadic` is a binary rational ``m * 2**e``.  Addition, subtraction and
multiplication are exact; division is only offered by powers of two or, when a
caller asks for it, as an outward-rounded :class:`Interval` operation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable

__all__ = [
    "Dyadic",
    "Interval",
    "Representation",
    "DEFAULT_PREC",
    "dyadic_arith",
    "interval_exp",
    "effective_convergence_check",
    "stopping_index",
    "parse_dyadic",
    "DyadicParseError",
]

DEFAULT_PREC = 53


class DyadicParseError(ValueError):
    """Raised when a literal does not denote a binary rational exactly."""


class Dyadic:
    """Exact binary rational ``mantissa * 2**exponent`` in canonical form.

    The mantissa is odd, or zero with exponent zero, so equal values always
    have equal fields.
    """

    __slots__ = ("mantissa", "exponent")

    mantissa: int
    exponent: int

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        else:
            tz = (mantissa & -mantissa).bit_length() - 1
            if tz:
                mantissa >>= tz
                exponent += tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_fraction(cls, value: Rational | int) -> Dyadic:
        """Convert an exact rational whose denominator is a power of two."""
        q = Fraction(value)
        den = q.denominator
        if den & (den - 1):
            raise DyadicParseError(f"{q} is not a binary rational")
        return cls(q.numerator, -(den.bit_length() - 1))

    @classmethod
    def from_float(cls, value: float) -> Dyadic:
        return cls.from_fraction(Fraction(value))

    @classmethod
    def pow2(cls, k: int) -> Dyadic:
        """Return ``2**k``."""
        return cls(1, k)

    @staticmethod
    def coerce(value) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return Dyadic(value)
        if isinstance(value, (Fraction, Rational)):
            return Dyadic.from_fraction(value)
        if isinstance(value, float):
            return Dyadic.from_float(value)
        if isinstance(value, str):
            return parse_dyadic(value)
        raise TypeError(f"cannot interpret {value!r} as a Dyadic")

    # -- conversions ------------------------------------------------------

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __int__(self) -> int:
        return int(self.to_fraction())

    def __repr__(self) -> str:
        return f"Dyadic({self.mantissa}, {self.exponent})"

    def __str__(self) -> str:
        q = self.to_fraction()
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    def __bool__(self) -> bool:
        return self.mantissa != 0

    # -- exact arithmetic -----------------------------------------------------

    def _align(self, other: Dyadic) -> tuple[int, int, int]:
        e = min(self.exponent, other.exponent)
        return self.mantissa << (self.exponent - e), other.mantissa << (other.exponent - e), e

    def __add__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        if not other.mantissa:
            return self
        if not self.mantissa:
            return other
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.mantissa, self.exponent)

    def __pos__(self) -> Dyadic:
        return self

    def __abs__(self) -> Dyadic:
        return self if self.mantissa >= 0 else -self

    def __sub__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if isinstance(other, int):
            return Dyadic(other) - self
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> Dyadic:
        """Multiply by ``2**k`` (exact)."""
        if not self.mantissa:
            return self
        return Dyadic(self.mantissa, self.exponent + k)

    def half(self) -> Dyadic:
        return self.shift(-1)

    # -- comparisons ----------------------------------------------------------

    def _cmp(self, other) -> int:
        if isinstance(other, Dyadic):
            a, b, _ = self._align(other)
            return (a > b) - (a < b)
        if isinstance(other, int):
            return self._cmp(Dyadic(other))
        if isinstance(other, Rational):
            q = self.to_fraction()
            return (q > other) - (q < other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    # -- rounding onto the grid 2**-bits ---------------------------------------

    def floor_to(self, bits: int) -> Dyadic:
        """Largest multiple of ``2**-bits`` that is ``<= self``."""
        shift = self.exponent + bits
        if shift >= 0:
            return self
        return Dyadic(self.mantissa >> -shift, -bits)

    def ceil_to(self, bits: int) -> Dyadic:
        """Smallest multiple of ``2**-bits`` that is ``>= self``."""
        shift = self.exponent + bits
        if shift >= 0:
            return self
        return Dyadic(-((-self.mantissa) >> -shift), -bits)

    def bit_magnitude(self) -> int:
        """``k`` with ``2**(k-1) <= |self| < 2**k``; zero maps to a very small k."""
        if not self.mantissa:
            return -(1 << 30)
        return abs(self.mantissa).bit_length() + self.exponent

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {"m": str(self.mantissa), "e": self.exponent}

    @classmethod
    def from_json(cls, obj: dict) -> Dyadic:
        return cls(int(obj["m"]), int(obj["e"]))


ZERO = Dyadic(0)
ONE = Dyadic(1)


def dyadic_arith(a: Dyadic, b: Dyadic, kind: str) -> Dyadic:
    """Exact ``add``, ``sub`` or ``mul`` of two dyadics."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown kind {kind!r}; expected add, sub or mul")


_POW2 = re.compile(r"^\s*([+-])?\s*2\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")
_FRAC = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_DEC = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*$")


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``p/q`` (q a power of two), an exact binary decimal, or ``2^-k``.

    Anything not exactly representable is rejected, never rounded.
    """
    m = _POW2.match(text)
    if m:
        value = Dyadic.pow2(int(m.group(2)))
        return -value if m.group(1) == "-" else value
    m = _FRAC.match(text)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise DyadicParseError(f"zero denominator in {text!r}")
        return Dyadic.from_fraction(Fraction(int(m.group(1)), den))
    if _DEC.match(text):
        return Dyadic.from_fraction(Fraction(text.strip()))
    raise DyadicParseError(f"not a dyadic literal: {text!r}")


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints."""

    lo: Dyadic
    hi: Dyadic

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> Interval:
        x = Dyadic.coerce(x)
        return cls(x, x)

    @classmethod
    def hull(cls, *items: Interval | Dyadic) -> Interval:
        los, his = [], []
        for it in items:
            if isinstance(it, Interval):
                los.append(it.lo)
                his.append(it.hi)
            else:
                los.append(it)
                his.append(it)
        return cls(min(los), max(his))

    @staticmethod
    def coerce(value) -> Interval:
        return value if isinstance(value, Interval) else Interval.point(value)

    # -- queries ------------------------------------------------------------

    @property
    def width(self) -> Dyadic:
        return self.hi - self.lo

    @property
    def mid(self) -> Dyadic:
        return (self.lo + self.hi).half()

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    __contains__ = contains

    def sign(self) -> int | None:
        """Certified sign: +1, -1, 0 for the exact zero point, ``None`` if undecided."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def magnitude(self) -> Dyadic:
        """Upper bound of ``|v|`` over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def __lt__(self, other) -> bool:
        """Certainly less: every point of self is below every point of other."""
        other = Interval.coerce(other)
        return self.hi < other.lo

    def __gt__(self, other) -> bool:
        other = Interval.coerce(other)
        return self.lo > other.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"

    # -- arithmetic (endpoints stay exact) -----------------------------------

    def __add__(self, other) -> Interval:
        other = Interval.coerce(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> Interval:
        other = Interval.coerce(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other) -> Interval:
        return Interval.coerce(other) - self

    def __mul__(self, other) -> Interval:
        other = Interval.coerce(other)
        if self.lo >= 0 and other.lo >= 0:
            return Interval(self.lo * other.lo, self.hi * other.hi)
        products = (self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def square(self) -> Interval:
        if self.lo >= 0:
            return Interval(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return Interval(self.hi * self.hi, self.lo * self.lo)
        return Interval(ZERO, max(self.lo * self.lo, self.hi * self.hi))

    def shift(self, k: int) -> Interval:
        return Interval(self.lo.shift(k), self.hi.shift(k))

    def round_out(self, bits: int) -> Interval:
        """Widen both endpoints onto the grid ``2**-bits``."""
        return Interval(self.lo.floor_to(bits), self.hi.ceil_to(bits))

    def scale(self, factor: Rational | int, bits: int) -> Interval:
        """Outward-rounded product with an exact rational."""
        q = Fraction(factor)
        num = self * Dyadic(q.numerator)
        if q.denominator == 1:
            return num
        den = q.denominator
        return Interval(_div_floor(num.lo, den, bits), -_div_floor(-num.hi, den, bits))

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {"lo": self.lo.to_json(), "hi": self.hi.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> Interval:
        return cls(Dyadic.from_json(obj["lo"]), Dyadic.from_json(obj["hi"]))

    @classmethod
    def from_rationals(cls, lo: Rational, hi: Rational, bits: int) -> Interval:
        """Smallest interval on the grid ``2**-bits`` containing ``[lo, hi]``.

        Endpoints that are already binary rationals are kept exactly.
        """
        return cls(_round_rational(Fraction(lo), bits, floor=True),
                   _round_rational(Fraction(hi), bits, floor=False))


def _round_rational(q: Fraction, bits: int, floor: bool) -> Dyadic:
    den = q.denominator
    if den & (den - 1) == 0:
        return Dyadic.from_fraction(q)
    scaled = q.numerator << bits
    m = scaled // den if floor else -((-scaled) // den)
    return Dyadic(m, -bits)


def _div_floor(x: Dyadic, k: int, bits: int) -> Dyadic:
    """``floor(x / k)`` on the grid ``2**-bits`` for a positive integer ``k``."""
    shift = x.exponent + bits
    if shift >= 0:
        q = (x.mantissa << shift) // k
    else:
        q = x.mantissa // (k << -shift)
    return Dyadic(q, -bits)


def _exp_point(y: Dyadic, bits: int) -> Interval:
    """Enclosure of ``e**y`` computed on the working grid ``2**-bits``."""
    # reduce to |r| <= 1/2, then undo by repeated squaring
    s = max(0, y.bit_magnitude() + 1)
    r = y.shift(-s)
    w = bits + 2 * s + 8
    total = Interval.point(ONE)
    if not r:
        return total
    term = total
    k = 0
    while True:
        k += 1
        t = term * r
        term = Interval(_div_floor(t.lo, k, w), -_div_floor(-t.hi, k, w))
        total = total + term
        mag = term.magnitude()
        if mag <= Dyadic.pow2(-w):
            # Lagrange remainder: |r|^(k+1)/(k+1)! e^|r| <= mag * |r|/(k+1) * e^(1/2) < mag
            total = Interval(total.lo - mag, total.hi + mag).round_out(w)
            break
    if total.lo < 0:
        total = Interval(ZERO, total.hi)
    for _ in range(s):
        total = total.square().round_out(w)
    return total


def interval_exp(x: Interval | Dyadic, p: int = DEFAULT_PREC) -> Interval:
    """Certified enclosure of ``exp`` over ``x``.

    The result contains ``e**y`` for every ``y`` in ``x`` and its width is at
    most ``width(x) * e**hi(x) + 2**-p``.
    """
    if p < 1:
        raise ValueError("precision must be >= 1")
    x = Interval.coerce(x)
    budget = Dyadic.pow2(-(p + 1))
    # e**hi <= 2**(1.5 hi) converts the relative error into an absolute one
    bits = p + max(0, 2 * x.hi.bit_magnitude() + 2) + 4
    while True:
        lo = _exp_point(x.lo, bits)
        hi = lo if x.is_point else _exp_point(x.hi, bits)
        if lo.width + hi.width <= budget:
            return Interval(lo.lo, hi.hi).round_out(p + 2)
        bits += 16


@dataclass(frozen=True)
class Representation:
    """A rational sequence ``n -> r_n`` promising ``|x - r_n| <= 2**-n``."""

    accessor: Callable[[int], Dyadic]
    name: str = "representation"

    def __call__(self, n: int) -> Dyadic:
        return self.accessor(n)

    @staticmethod
    def contract_bound(n: int) -> Dyadic:
        return Dyadic.pow2(-n)

    @classmethod
    def truncation(cls, value: Rational, extra_bits: int = 2) -> Representation:
        """Binary truncation of an exact rational to ``n + extra_bits`` bits."""
        q = Fraction(value)

        def acc(n: int) -> Dyadic:
            bits = n + extra_bits
            return Dyadic((q.numerator << bits) // q.denominator, -bits)

        return cls(acc, name=f"truncation({q})")


def _distance(limit, value: Dyadic) -> Fraction:
    if isinstance(limit, Dyadic):
        return abs(limit - value).to_fraction()
    return abs(Fraction(limit) - value.to_fraction())


def effective_convergence_check(rep: Callable[[int], Dyadic], limit, N: int) -> bool:
    """True iff ``|limit - rep(n)| <= 2**-n`` for every ``0 <= n <= N``.

    ``limit`` may be a :class:`Dyadic` or any exact rational.
    """
    for n in range(0, N + 1):
        if _distance(limit, rep(n)) > Fraction(1, 1 << n):
            return False
    return True


def stopping_index(rep: Representation, M: int) -> int:
    """Index whose term is guaranteed within ``2**-M`` of the limit."""
    if M < 0:
        raise ValueError("target exponent must be >= 0")
    return M
