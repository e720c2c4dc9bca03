"""The counterexample function zoo: f1, g*, u and f2.

``f1`` is piecewise bilinear with dyadic coefficients and is evaluated exactly.
``g*`` is a weighted series of shifted quadratics whose flat middle segment
``[-xi*, xi*]`` is only approachable from outside; it is evaluated with an
explicit tail bound.  ``f2 = g*(x1) + x2**2 exp(+-alpha x1)`` is evaluated as a
certified enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

from .realkit import DEFAULT_PREC, Dyadic, Interval, interval_exp, parse_dyadic

__all__ = [
    "Rect",
    "SequenceSpec",
    "GStarParams",
    "F2Params",
    "Seam",
    "DerivativeEnclosure",
    "F1",
    "F2",
    "Section",
    "f1_eval",
    "f1_partial",
    "f1_lipschitz",
    "gstar_eval",
    "gstar_deriv",
    "gstar_slope",
    "gstar_offset",
    "f2_eval",
    "f2_partial_x1",
    "f2_partial_x2",
    "continuity_modulus",
    "make_function",
    "parse_rational",
]

ZERO = Dyadic(0)
ONE = Dyadic(1)


def parse_rational(text) -> Fraction:
    """Exact rational from ``p/q``, a decimal string or ``2^k``."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, Dyadic):
        return text.to_fraction()
    try:
        return parse_dyadic(text).to_fraction()
    except ValueError:
        return Fraction(str(text).strip())


@dataclass(frozen=True)
class Rect:
    """Closed box ``[a_1, b_1] x ... x [a_m, b_m]`` with dyadic corners."""

    axes: tuple[tuple[Dyadic, Dyadic], ...]

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a rectangle needs at least one axis")
        axes = tuple((Dyadic.coerce(a), Dyadic.coerce(b)) for a, b in self.axes)
        for a, b in axes:
            if not a < b:
                raise ValueError(f"degenerate axis [{a}, {b}]")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def box(cls, *half_widths) -> Rect:
        """The centred box ``[-a, a] x [-b, b] x ...``."""
        return cls(tuple((-Dyadic.coerce(h), Dyadic.coerce(h)) for h in half_widths))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def lower(self) -> tuple[Dyadic, ...]:
        return tuple(a for a, _ in self.axes)

    @property
    def upper(self) -> tuple[Dyadic, ...]:
        return tuple(b for _, b in self.axes)

    def midpoint(self) -> tuple[Dyadic, ...]:
        return tuple((a + b).half() for a, b in self.axes)

    def contains(self, point: Sequence[Dyadic]) -> bool:
        return len(point) == self.dim and all(a <= x <= b for (a, b), x in zip(self.axes, point))

    def magnitudes(self) -> tuple[Dyadic, ...]:
        """``max |x_i|`` over the box, per axis."""
        return tuple(max(abs(a), abs(b)) for a, b in self.axes)

    def to_json(self) -> list:
        return [[a.to_json(), b.to_json()] for a, b in self.axes]

    @classmethod
    def from_json(cls, obj) -> Rect:
        return cls(tuple((Dyadic.from_json(a), Dyadic.from_json(b)) for a, b in obj))


# ---------------------------------------------------------------------------
# f1


# (constant, x1, x2, x1*x2) coefficients, keyed by (x2 half-plane, x1 piece)
_F1_BRANCHES = {
    (-1, -1): (Dyadic(-1), Dyadic(-1), Dyadic(-3, -1), Dyadic(1, -1)),
    (-1, 0): (ZERO, ZERO, Dyadic(-3, -1), Dyadic(1, -1)),
    (-1, 1): (Dyadic(-1), ONE, Dyadic(-1, -1), Dyadic(-1, -1)),
    (1, -1): (Dyadic(-1), Dyadic(-1), Dyadic(1, -1), Dyadic(-1, -1)),
    (1, 0): (ZERO, ZERO, Dyadic(3, -1), Dyadic(1, -1)),
    (1, 1): (Dyadic(-1), ONE, Dyadic(3, -1), Dyadic(1, -1)),
}

# closed x1 ranges of the three pieces (None = unbounded)
_X1_PIECES = {-1: (None, Dyadic(-1)), 0: (Dyadic(-1), ONE), 1: (ONE, None)}
_X2_HALVES = {-1: (None, ZERO), 1: (ZERO, None)}


def _x1_piece(x1: Dyadic) -> int:
    if x1 < -1:
        return -1
    if x1 > 1:
        return 1
    return 0


def _bilinear(coef, x1: Dyadic, x2: Dyadic) -> Dyadic:
    c, b1, b2, d = coef
    return c + b1 * x1 + b2 * x2 + d * x1 * x2


def f1_eval(x1, x2) -> Dyadic:
    """Exact value of f1 at a dyadic point of the plane."""
    x1, x2 = Dyadic.coerce(x1), Dyadic.coerce(x2)
    half = -1 if x2 < 0 else 1
    return _bilinear(_F1_BRANCHES[(half, _x1_piece(x1))], x1, x2)


@dataclass(frozen=True)
class Seam:
    """One-sided partial derivatives at a kink; ``left`` is taken from below."""

    left: Dyadic | Interval
    right: Dyadic | Interval


def _partial_of(coef, axis: int, x1: Dyadic, x2: Dyadic) -> Dyadic:
    _, b1, b2, d = coef
    return b1 + d * x2 if axis == 0 else b2 + d * x1


def f1_partial(x1, x2, axis: int) -> Dyadic | Seam:
    """Exact partial of f1 along ``axis`` (0 for x1, 1 for x2).

    Returns a :class:`Seam` with both one-sided slopes where the partial jumps:
    at ``x1 = +-1`` for axis 0 and at ``x2 = 0`` for axis 1.
    """
    x1, x2 = Dyadic.coerce(x1), Dyadic.coerce(x2)
    if axis == 0:
        half = -1 if x2 < 0 else 1
        if abs(x1) == 1:
            k = x1.sign()
            left = (half, -1 if k < 0 else 0)
            right = (half, 0 if k < 0 else 1)
            return Seam(_partial_of(_F1_BRANCHES[left], 0, x1, x2),
                        _partial_of(_F1_BRANCHES[right], 0, x1, x2))
        return _partial_of(_F1_BRANCHES[(half, _x1_piece(x1))], 0, x1, x2)
    if axis == 1:
        piece = _x1_piece(x1)
        if not x2:
            return Seam(_partial_of(_F1_BRANCHES[(-1, piece)], 1, x1, x2),
                        _partial_of(_F1_BRANCHES[(1, piece)], 1, x1, x2))
        half = -1 if x2 < 0 else 1
        return _partial_of(_F1_BRANCHES[(half, piece)], 1, x1, x2)
    raise ValueError(f"f1 has axes 0 and 1, got {axis}")


def _clip(rng, lo: Dyadic, hi: Dyadic):
    a, b = rng
    a = lo if a is None else max(a, lo)
    b = hi if b is None else min(b, hi)
    return (a, b) if a <= b else None


def f1_lipschitz(rect: Rect) -> tuple[Dyadic, Dyadic]:
    """Exact per-axis bounds on ``|df1/dx_i|`` over ``rect``."""
    (l1, h1), (l2, h2) = rect.axes
    bound = [ZERO, ZERO]
    for (half, piece), coef in _F1_BRANCHES.items():
        r1 = _clip(_X1_PIECES[piece], l1, h1)
        r2 = _clip(_X2_HALVES[half], l2, h2)
        if r1 is None or r2 is None:
            continue
        _, b1, b2, d = coef
        bound[0] = max(bound[0], abs(b1 + d * r2[0]), abs(b1 + d * r2[1]))
        bound[1] = max(bound[1], abs(b2 + d * r1[0]), abs(b2 + d * r1[1]))
    return bound[0], bound[1]


# ---------------------------------------------------------------------------
# the decreasing sequence xi_n and g*


@dataclass(frozen=True)
class SequenceSpec:
    """Strictly decreasing rational sequence ``xi_1 > xi_2 > ...``.

    ``standard``: ``xi_n = xi* + 2**-n`` with the limit ``xi*`` public.

    ``plateau``: agrees with ``standard(base)`` for ``n <= K`` and continues as
    ``base + 2**-(K+1) * (1 + 2**-(n-K))``, so its limit ``base + 2**-(K+1)``
    hides behind an index no finite prefix of length ``K`` reveals.  Only
    ``base`` is treated as known to evaluators.

    Terms are exact rationals; they are binary rationals whenever ``base`` is.
    """

    kind: str
    base: Fraction
    K: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "base", parse_rational(self.base))
        if self.kind == "standard":
            if self.K is not None:
                raise ValueError("standard sequences take no hidden index")
        elif self.kind == "plateau":
            if self.K is None or self.K < 1:
                raise ValueError("plateau sequences need a hidden index K >= 1")
        else:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if not (0 < self.limit < 1) or not self.base > 0:
            raise ValueError(f"limit {self.limit} must lie in (0, 1)")

    @classmethod
    def standard(cls, xi_star) -> SequenceSpec:
        return cls("standard", xi_star)

    @classmethod
    def plateau(cls, base, K: int) -> SequenceSpec:
        return cls("plateau", base, K)

    def __call__(self, n: int) -> Fraction:
        return self.term(n)

    def term(self, n: int) -> Fraction:
        if n < 1:
            raise IndexError("sequence is indexed from 1")
        if self.kind == "standard" or n <= self.K:
            return self.base + Fraction(1, 1 << n)
        return self.base + Fraction(1, 1 << (self.K + 1)) + Fraction(1, 1 << (n + 1))

    @property
    def limit(self) -> Fraction:
        """Exact limit; oracle-only for plateau sequences."""
        if self.kind == "standard":
            return self.base
        return self.base + Fraction(1, 1 << (self.K + 1))

    @property
    def known_lower(self) -> Fraction:
        """The lower bound on the limit that evaluators are allowed to use."""
        return self.base

    @property
    def limit_known(self) -> bool:
        return self.kind == "standard"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "base": str(self.base)}
        if self.K is not None:
            out["K"] = self.K
        return out

    @classmethod
    def from_json(cls, obj) -> SequenceSpec:
        return cls(obj["kind"], Fraction(obj["base"]), obj.get("K"))


@dataclass(frozen=True)
class GStarParams:
    seq: SequenceSpec
    truncation: int = 53
    probe_budget: int = 256

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        if self.probe_budget < 1:
            raise ValueError("probe budget must be >= 1")

    @classmethod
    def standard(cls, xi_star, **kw) -> GStarParams:
        return cls(SequenceSpec.standard(xi_star), **kw)

    def to_json(self) -> dict:
        return {"seq": self.seq.to_json(), "truncation": self.truncation,
                "probe_budget": self.probe_budget}

    @classmethod
    def from_json(cls, obj) -> GStarParams:
        return cls(SequenceSpec.from_json(obj["seq"]), obj.get("truncation", 53),
                   obj.get("probe_budget", 256))


def gstar_eval(p: GStarParams, x, N: int | None = None) -> Interval:
    """Enclosure ``[S_N, S_N + T_N]`` of ``g*(x)``.

    ``S_N`` is the exact partial sum of ``2**-n g_n(x)``; every later term is at
    most ``2**-n (|x| - xi_lower)**2``, so the tail is below
    ``T_N = 2**-N max(0, |x| - xi_lower)**2``.
    """
    N = p.truncation if N is None else N
    if N < 1:
        raise ValueError("truncation must be >= 1")
    ax = abs(Dyadic.coerce(x)).to_fraction()
    lower = p.seq.known_lower
    if ax <= lower:
        return Interval(ZERO, ZERO)
    total = Fraction(0)
    for n in range(1, N + 1):
        d = ax - p.seq.term(n)
        if d > 0:
            total += d * d / (1 << n)
    gap = ax - lower
    return Interval.from_rationals(total, total + gap * gap / (1 << N), 2 * N + 32)


def gstar_slope(n: int) -> Dyadic:
    """Slope ``2**-(n-2)`` of ``g*'`` on the n-th piece."""
    return Dyadic.pow2(2 - n)


@lru_cache(maxsize=4096)
def _offset_bounds(seq: SequenceSpec, n: int, N: int) -> tuple[Fraction, Fraction]:
    total = sum((seq.term(k) * Fraction(2, 1 << k) for k in range(n, n + N)), Fraction(0))
    tail_weight = Fraction(4, 1 << (n + N))
    return total + seq.known_lower * tail_weight, total + seq.term(n + N) * tail_weight


def gstar_offset(p: GStarParams, n: int, N: int | None = None) -> Interval:
    """Enclosure of ``sum_{k>=n} xi_k 2**-(k-1)`` from ``N`` terms plus tail."""
    N = p.truncation if N is None else N
    lo, hi = _offset_bounds(p.seq, n, N)
    return Interval.from_rationals(lo, hi, 2 * N + n + 32)


@dataclass(frozen=True)
class DerivativeEnclosure:
    """Certified enclosure of a derivative.

    ``piece`` is the signed index of the linear piece of ``g*'`` holding the
    point (0 for the flat segment), or ``None`` when it was not located within
    the probe budget.  ``certified`` is False in exactly that one-sided case:
    the point is inside every probed ``[-xi_n, xi_n]`` but membership in the
    flat segment cannot be confirmed.
    """

    interval: Interval
    piece: int | None
    certified: bool = True

    def sign(self) -> int | None:
        return self.interval.sign()


def _locate(p: GStarParams, ax: Fraction, budget: int) -> int | None:
    """Smallest ``n <= budget`` with ``xi_n < ax``, i.e. ``ax`` in piece n."""
    seq = p.seq
    if seq.term(budget) >= ax:
        return None
    lo, hi = 0, budget  # invariant: xi_lo >= ax (xi_0 = +inf), xi_hi < ax
    while hi - lo > 1:
        m = (lo + hi) // 2
        if seq.term(m) < ax:
            hi = m
        else:
            lo = m
    return hi


def gstar_deriv(p: GStarParams, x, N: int | None = None,
                budget: int | None = None) -> DerivativeEnclosure:
    """Enclosure of ``g*'(x)`` from the closed form ``c1(n) x -+ c0(n)``."""
    x = Dyadic.coerce(x)
    N = p.truncation if N is None else N
    budget = p.probe_budget if budget is None else budget
    ax = abs(x).to_fraction()
    lower = p.seq.known_lower
    if ax <= lower:
        return DerivativeEnclosure(Interval(ZERO, ZERO), 0)
    n = _locate(p, ax, budget)
    if n is None:
        # lower < |x| <= xi_budget: only pieces beyond the budget can contribute
        hi = Interval.from_rationals(0, (ax - lower) * Fraction(2, 1 << budget), budget + 64).hi
        iv = Interval(ZERO, hi) if x > 0 else Interval(-hi, ZERO)
        return DerivativeEnclosure(iv, None, certified=False)
    c1 = gstar_slope(n)
    c0 = gstar_offset(p, n, N)
    if x > 0:
        return DerivativeEnclosure(Interval.point(c1 * x) - c0, n)
    return DerivativeEnclosure(Interval.point(c1 * x) + c0, -n)


# ---------------------------------------------------------------------------
# f2 = g*(x1) + u(x1, x2)


@dataclass(frozen=True)
class F2Params:
    """``g*`` parameters plus the exponential rate ``alpha > 0``.

    ``alpha`` is an exact rational, so the default ``1/10`` is held exactly;
    the product ``alpha * x1`` is enclosed with outward rounding.
    """

    gstar: GStarParams
    alpha: Fraction = Fraction(1, 10)

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @classmethod
    def standard(cls, xi_star="1/2", alpha=Fraction(1, 10), **kw) -> F2Params:
        return cls(GStarParams.standard(xi_star, **kw), Fraction(alpha))

    def to_json(self) -> dict:
        return {"gstar": self.gstar.to_json(), "alpha": str(self.alpha)}

    @classmethod
    def from_json(cls, obj) -> F2Params:
        return cls(GStarParams.from_json(obj["gstar"]), Fraction(obj["alpha"]))


def _exp_alpha(p: F2Params, x1: Dyadic, sign: int, prec: int) -> Interval:
    """Enclosure of ``exp(sign * alpha * x1)``."""
    arg = Interval.point(x1).scale(sign * p.alpha, prec + 8)
    return interval_exp(arg, prec + 4)


def _truncation(p: F2Params, prec: int) -> int:
    return max(p.gstar.truncation, prec)


def f2_eval(p: F2Params, x1, x2, prec: int = DEFAULT_PREC) -> Interval:
    """Certified enclosure of ``f2(x1, x2)``; width shrinks as ``prec`` grows."""
    if prec < 1:
        raise ValueError("precision must be >= 1")
    x1, x2 = Dyadic.coerce(x1), Dyadic.coerce(x2)
    g = gstar_eval(p.gstar, x1, _truncation(p, prec))
    if not x2:
        return g
    sign = -1 if x2 < 0 else 1
    return g + _exp_alpha(p, x1, sign, prec) * (x2 * x2)


def f2_partial_x1(p: F2Params, x1, x2, prec: int = DEFAULT_PREC) -> DerivativeEnclosure:
    """Enclosure of ``df2/dx1 = g*'(x1) +- alpha x2**2 exp(+-alpha x1)``."""
    x1, x2 = Dyadic.coerce(x1), Dyadic.coerce(x2)
    d = gstar_deriv(p.gstar, x1, _truncation(p, prec))
    if not x2:
        return d
    sign = -1 if x2 < 0 else 1
    e = _exp_alpha(p, x1, sign, prec) * (x2 * x2)
    term = e.scale(sign * p.alpha, prec + 8)
    return DerivativeEnclosure(d.interval + term, d.piece, d.certified)


def f2_partial_x2(p: F2Params, x1, x2, prec: int = DEFAULT_PREC) -> Interval:
    """Enclosure of ``df2/dx2 = 2 x2 exp(+-alpha x1)``; exactly 0 on the x1 axis."""
    x1, x2 = Dyadic.coerce(x1), Dyadic.coerce(x2)
    if not x2:
        return Interval(ZERO, ZERO)
    sign = -1 if x2 < 0 else 1
    return _exp_alpha(p, x1, sign, prec) * x2.shift(1)


# ---------------------------------------------------------------------------
# objective wrappers used by argmin and descent


class F1:
    """f1 as an objective: exact values, exact seam-aware partials."""

    name = "f1"
    dim = 2
    exact = True

    def value(self, x: Sequence[Dyadic]) -> Dyadic:
        return f1_eval(x[0], x[1])

    def enclose(self, x: Sequence[Dyadic], prec: int = DEFAULT_PREC) -> Interval:
        return Interval.point(self.value(x))

    def partial(self, x: Sequence[Dyadic], axis: int, prec: int = DEFAULT_PREC):
        d = f1_partial(x[0], x[1], axis)
        if isinstance(d, Seam):
            return Seam(Interval.point(d.left), Interval.point(d.right))
        return Interval.point(d)

    def lipschitz(self, rect: Rect, prec: int = DEFAULT_PREC) -> tuple[Dyadic, ...]:
        return f1_lipschitz(rect)

    def to_json(self) -> dict:
        return {"name": "f1"}


@dataclass(frozen=True)
class F2:
    """f2 as an objective over certified enclosures."""

    params: F2Params = field(default_factory=F2Params.standard)
    name = "f2"
    dim = 2
    exact = False

    def enclose(self, x: Sequence[Dyadic], prec: int = DEFAULT_PREC) -> Interval:
        return f2_eval(self.params, x[0], x[1], prec)

    def partial(self, x: Sequence[Dyadic], axis: int, prec: int = DEFAULT_PREC) -> Interval:
        if axis == 0:
            return f2_partial_x1(self.params, x[0], x[1], prec).interval
        if axis == 1:
            return f2_partial_x2(self.params, x[0], x[1], prec)
        raise ValueError(f"f2 has axes 0 and 1, got {axis}")

    def lipschitz(self, rect: Rect, prec: int = DEFAULT_PREC) -> tuple[Dyadic, ...]:
        """Per-axis gradient bounds over ``rect`` from interval evaluation."""
        (l1, h1), _ = rect.axes
        a, b = rect.magnitudes()
        # g*' is nondecreasing, so its extremes sit at the x1 endpoints
        g = max(gstar_deriv(self.params.gstar, l1).interval.magnitude(),
                gstar_deriv(self.params.gstar, h1).interval.magnitude())
        grow = _exp_alpha(self.params, a, 1, prec).hi
        alpha_up = Interval.point(grow * b * b).scale(self.params.alpha, prec + 8).hi
        return g + alpha_up, (grow * b).shift(1)

    def to_json(self) -> dict:
        return {"name": "f2", "params": self.params.to_json()}


@dataclass(frozen=True)
class Section:
    """One-dimensional slice ``y -> f(..., y at axis, ...)`` of an objective."""

    f: object
    axis: int
    point: tuple[Dyadic, ...]

    dim = 1

    @property
    def name(self) -> str:
        return f"{self.f.name}[axis {self.axis}]"

    @property
    def exact(self) -> bool:
        return getattr(self.f, "exact", False)

    def _embed(self, y: Dyadic) -> tuple[Dyadic, ...]:
        pt = list(self.point)
        pt[self.axis] = Dyadic.coerce(y)
        return tuple(pt)

    def enclose(self, x: Sequence[Dyadic], prec: int = DEFAULT_PREC) -> Interval:
        return self.f.enclose(self._embed(x[0]), prec)

    def partial(self, x: Sequence[Dyadic], axis: int = 0, prec: int = DEFAULT_PREC):
        return self.f.partial(self._embed(x[0]), self.axis, prec)

    def derivative(self, y: Dyadic, prec: int = DEFAULT_PREC):
        return self.partial((y,), 0, prec)

    def lipschitz(self, rect: Rect, prec: int = DEFAULT_PREC) -> tuple[Dyadic]:
        (lo, hi), = rect.axes
        axes = [(c, c) for c in self.point]
        axes[self.axis] = (lo, hi)
        full = _LooseRect(tuple(axes))
        return (self.f.lipschitz(full, prec)[self.axis],)


@dataclass(frozen=True)
class _LooseRect:
    """Box that admits degenerate axes; only used to query Lipschitz bounds."""

    axes: tuple[tuple[Dyadic, Dyadic], ...]

    def magnitudes(self) -> tuple[Dyadic, ...]:
        return tuple(max(abs(a), abs(b)) for a, b in self.axes)


def continuity_modulus(f, rect: Rect, k: int, prec: int = DEFAULT_PREC) -> int:
    """``n`` such that ``||x - y||_inf <= 2**-n`` forces ``|f(x) - f(y)| <= 2**-k``."""
    total = sum(f.lipschitz(rect, prec), ZERO)
    if not total:
        return 0
    return k + max(0, math.ceil(math.log2(float(total.to_fraction()))))


def make_function(name: str, params: F2Params | None = None):
    """Look up a corpus objective by name."""
    if name == "f1":
        return F1()
    if name == "f2":
        return F2(params if params is not None else F2Params.standard())
    raise KeyError(f"unknown corpus function {name!r}; expected 'f1' or 'f2'")
