"""Coordinate-wise minimizer sets, assignment functions and certified 1-D minimization."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable

from .corpus import DerivativeEnclosure, F2Params, Rect, Seam, f2_partial_x1, f2_partial_x2
from .realkit import DEFAULT_PREC, Dyadic, Interval

__all__ = [
    "LocalMinSet",
    "AssignmentPolicy",
    "NoCertifiedSign",
    "m1_f1",
    "g1_f1",
    "g2_f1",
    "convex_1d_min",
    "m1_f2",
    "g1_f2",
    "g2_f2",
    "global_min_enclosure",
    "approx_gap",
    "gap_bound",
    "ramp",
    "f1_assignments",
    "f2_assignments",
]

ZERO = Dyadic(0)
ONE = Dyadic(1)

TWO_SIDED = "two-sided"
OUTER_ONLY = "outer-only"
INNER = "inner"


class NoCertifiedSign(ArithmeticError):
    """The derivative enclosure straddles zero at every precision tried.

    ``bracket`` still contains the minimizer; ``point`` is the undecided probe.
    """

    def __init__(self, bracket: Interval, point: Dyadic, prec: int):
        super().__init__(
            f"derivative sign undecided at {point} (bracket {bracket}, precision {prec})")
        self.bracket = bracket
        self.point = point
        self.prec = prec


@dataclass(frozen=True)
class LocalMinSet:
    """Minimizers of a one-block restriction.

    A singleton carries an enclosure ``point`` of the unique minimizer.  A
    segment carries its end points.  ``outer-only`` ends bound the true segment
    from outside; ``inner`` ends are true minimizers within one grid step of
    the exact ends (used when those ends are not binary rationals).
    """

    kind: str
    point: Interval | None = None
    lo: Dyadic | None = None
    hi: Dyadic | None = None
    certification: str = TWO_SIDED

    @classmethod
    def singleton(cls, point) -> LocalMinSet:
        return cls("singleton", point=Interval.coerce(point))

    @classmethod
    def segment(cls, lo, hi, certification: str = TWO_SIDED) -> LocalMinSet:
        lo, hi = Dyadic.coerce(lo), Dyadic.coerce(hi)
        if lo > hi:
            raise ValueError("segment ends out of order")
        if certification not in (TWO_SIDED, OUTER_ONLY, INNER):
            raise ValueError(f"unknown certification {certification!r}")
        return cls("segment", lo=lo, hi=hi, certification=certification)

    @property
    def is_singleton(self) -> bool:
        return self.kind == "singleton"

    def hull(self) -> Interval:
        return self.point if self.is_singleton else Interval(self.lo, self.hi)


@dataclass(frozen=True)
class AssignmentPolicy:
    """Which element of a non-singleton minimizer set an assignment returns."""

    kind: str
    alpha: Dyadic | None = None

    def __post_init__(self):
        if self.kind not in ("left", "right", "mid", "fixed"):
            raise ValueError(f"unknown policy {self.kind!r}")
        if (self.kind == "fixed") != (self.alpha is not None):
            raise ValueError("exactly the 'fixed' policy carries a value")
        if self.alpha is not None:
            object.__setattr__(self, "alpha", Dyadic.coerce(self.alpha))

    @classmethod
    def fixed(cls, alpha) -> AssignmentPolicy:
        return cls("fixed", Dyadic.coerce(alpha))

    @classmethod
    def parse(cls, text: str) -> AssignmentPolicy:
        """``left``, ``right``, ``mid`` or ``fixed:<dyadic>``."""
        text = text.strip()
        if text.startswith("fixed:"):
            return cls.fixed(text[len("fixed:"):])
        aliases = {"midpoint": "mid", "leftend": "left", "rightend": "right"}
        return cls(aliases.get(text.lower(), text.lower()))

    def resolve(self, mins: LocalMinSet) -> Dyadic:
        if mins.is_singleton:
            return mins.point.mid
        if self.kind == "left":
            return mins.lo
        if self.kind == "right":
            return mins.hi
        if self.kind == "mid":
            return (mins.lo + mins.hi).half()
        if not mins.lo <= self.alpha <= mins.hi:
            raise ValueError(f"fixed value {self.alpha} lies outside [{mins.lo}, {mins.hi}]")
        return self.alpha

    def __str__(self) -> str:
        return f"fixed:{self.alpha}" if self.kind == "fixed" else self.kind


# ---------------------------------------------------------------------------
# f1


def _clamp(v: Dyadic, lo: Dyadic, hi: Dyadic) -> Dyadic:
    return max(lo, min(hi, v))


def m1_f1(x2, rect: Rect | None = None) -> LocalMinSet:
    """Minimizers of ``f1(., x2)``; over the whole line unless ``rect`` is given.

    ``f1(., x2)`` falls until ``x1 = -sign(x2)`` and rises after, and is flat
    on ``[-1, 1]`` when ``x2 = 0``; restricting to ``[a1, b1]`` clamps.
    """
    x2 = Dyadic.coerce(x2)
    lo, hi = (rect.axes[0] if rect is not None else (None, None))
    if x2:
        target = ONE if x2 < 0 else -ONE
        if lo is not None:
            target = _clamp(target, lo, hi)
        return LocalMinSet.singleton(target)
    a, b = -ONE, ONE
    if lo is not None:
        if hi < a or lo > b:
            edge = hi if hi < a else lo
            return LocalMinSet.singleton(edge)
        a, b = max(a, lo), min(b, hi)
    return LocalMinSet.segment(a, b)


def g1_f1(x2, policy: AssignmentPolicy, rect: Rect | None = None) -> Dyadic:
    """The step-function assignment for x1: ``+1``, policy value, ``-1``."""
    return policy.resolve(m1_f1(x2, rect))


def g2_f1(x1) -> Dyadic:
    """The unique assignment for x2, identically zero."""
    return ZERO


# ---------------------------------------------------------------------------
# certified one-dimensional convex minimization


def _sign(d) -> int | None:
    """+1 / -1 if the minimizer is certainly left / right of the probe, 0 if at it."""
    if isinstance(d, DerivativeEnclosure):
        d = d.interval
    if isinstance(d, Seam):
        left, right = Interval.coerce(d.left), Interval.coerce(d.right)
        if left.lo > 0:
            return 1
        if right.hi < 0:
            return -1
        if left.hi <= 0 <= right.lo:
            return 0
        return None
    return Interval.coerce(d).sign()


def _derivative_of(f) -> Callable[[Dyadic, int], object]:
    if hasattr(f, "derivative"):
        return f.derivative
    return f


def convex_1d_min(f, dom, tol, prec: int = DEFAULT_PREC,
                  max_prec: int | None = None) -> LocalMinSet:
    """Certified minimizer of a convex function on a closed interval.

    ``f`` is either an object with ``derivative(y, prec)`` or that callable
    itself; it returns an enclosure (Interval, Dyadic, :class:`Seam` or
    :class:`DerivativeEnclosure`) of the derivative at ``y``.  Bisection only
    moves on a certified sign, so the returned bracket always contains the
    minimizer.  An undecided sign triggers a precision increase up to
    ``max_prec`` and then :class:`NoCertifiedSign`.
    """
    deriv = _derivative_of(f)
    tol = Dyadic.coerce(tol)
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    lo, hi = (dom.lo, dom.hi) if isinstance(dom, Interval) else map(Dyadic.coerce, dom)
    max_prec = prec if max_prec is None else max(prec, max_prec)

    def sign_at(y: Dyadic) -> int | None:
        p = prec
        while True:
            s = _sign(deriv(y, p))
            if s is not None or p >= max_prec:
                return s
            p = min(max_prec, 2 * p)

    if lo == hi:
        return LocalMinSet.singleton(lo)
    s = sign_at(lo)
    if s is not None and s >= 0:
        return LocalMinSet.singleton(lo)
    s = sign_at(hi)
    if s is not None and s <= 0:
        return LocalMinSet.singleton(hi)
    while hi - lo > tol:
        m = (lo + hi).half()
        s = sign_at(m)
        if s is None:
            raise NoCertifiedSign(Interval(lo, hi), m, max_prec)
        if s == 0:
            return LocalMinSet.singleton(m)
        if s > 0:
            hi = m
        else:
            lo = m
    return LocalMinSet.singleton(Interval(lo, hi))


# ---------------------------------------------------------------------------
# f2


DEFAULT_F2_RECT = Rect.box(2, 2)
DEFAULT_TOL = Dyadic.pow2(-40)


def _x1_derivative(p: F2Params, x2: Dyadic):
    def d(y: Dyadic, prec: int) -> DerivativeEnclosure:
        return f2_partial_x1(p, y, x2, prec)
    return d


def g1_f2(p: F2Params, x2, tol=DEFAULT_TOL, prec: int = 64,
          rect: Rect = DEFAULT_F2_RECT, max_prec: int | None = None) -> Interval:
    """Enclosure of the unique minimizer of ``f2(., x2)`` over the x1-range, ``x2 != 0``."""
    x2 = Dyadic.coerce(x2)
    if not x2:
        raise ValueError("f2(., 0) has a whole segment of minimizers; use m1_f2")
    mins = convex_1d_min(_x1_derivative(p, x2), rect.axes[0], tol, prec, max_prec)
    return mins.point


def m1_f2(p: F2Params, x2, tol=DEFAULT_TOL, prec: int = 64,
          rect: Rect = DEFAULT_F2_RECT) -> LocalMinSet:
    """Minimizer set of ``f2(., x2)``.

    At ``x2 = 0`` it is the flat segment of ``g*``: exact (or rounded inward
    onto the ``2**-prec`` grid) when the limit of the sequence is public,
    otherwise the outer bound ``[-xi_N, xi_N]``.
    """
    x2 = Dyadic.coerce(x2)
    if x2:
        return LocalMinSet.singleton(g1_f2(p, x2, tol, prec, rect))
    seq = p.gstar.seq
    lo, hi = rect.axes[0]
    if seq.limit_known:
        edge = Interval.from_rationals(seq.limit, seq.limit, prec).lo
        cert = TWO_SIDED if edge == seq.limit else INNER
    else:
        edge = Interval.from_rationals(0, seq.term(p.gstar.truncation), prec).hi
        cert = OUTER_ONLY
    return LocalMinSet.segment(max(lo, -edge), min(hi, edge), cert)


def g2_f2(p: F2Params, x1, tol=DEFAULT_TOL, prec: int = 64,
          rect: Rect = DEFAULT_F2_RECT) -> Interval:
    """Enclosure of the minimizer of the parabola ``f2(x1, .)`` (zero when admissible)."""
    x1 = Dyadic.coerce(x1)

    def d(y: Dyadic, q: int) -> Interval:
        return f2_partial_x2(p, x1, y, q)

    return convex_1d_min(d, rect.axes[1], tol, prec).point


# ---------------------------------------------------------------------------
# assignment functions for the Gauss-Seidel engine


def f1_assignments(policy: AssignmentPolicy, rect: Rect | None = None):
    """``[G1, G2]`` for f1 acting on full points."""
    return [lambda x: g1_f1(x[1], policy, rect), lambda x: g2_f1(x[0])]


def f2_assignments(p: F2Params, policy: AssignmentPolicy, rect: Rect = DEFAULT_F2_RECT,
                   tol=DEFAULT_TOL, prec: int = 64):
    """``[G1, G2]`` for f2; certified enclosures are collapsed to their midpoints."""
    def G1(x):
        return policy.resolve(m1_f2(p, x[1], tol, prec, rect))

    def G2(x):
        return g2_f2(p, x[0], tol, prec, rect).mid

    return [G1, G2]


# ---------------------------------------------------------------------------
# global minimum value


def global_min_enclosure(f, rect: Rect, tol, prec: int = DEFAULT_PREC,
                         max_cells: int = 2_000_000) -> Interval:
    """Interval of width ``<= tol`` containing ``min f`` over ``rect``.

    Branch and bound over dyadic cells: the upper bound is the best certified
    value at a cell centre, the lower bound subtracts the per-axis Lipschitz
    bound of ``f`` on the cell times the cell half-widths.
    """
    tol = Dyadic.coerce(tol)
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    counter = itertools.count()
    best = None
    heap: list = []

    def push(cell):
        nonlocal best
        centre = tuple((a + b).half() for a, b in cell)
        val = f.enclose(centre, prec)
        if best is None or val.hi < best:
            best = val.hi
        lips = f.lipschitz(_CellRect(cell), prec)
        slack = sum(((b - a).half() * L for (a, b), L in zip(cell, lips)), ZERO)
        heapq.heappush(heap, (val.lo - slack, next(counter), cell))

    push(rect.axes)
    while True:
        lower, _, cell = heapq.heappop(heap)
        if best - lower <= tol:
            return Interval(lower, best)
        if next(counter) > max_cells:
            raise RuntimeError("cell budget exhausted before reaching the tolerance")
        halves = [((a, (a + b).half()), ((a + b).half(), b)) for a, b in cell]
        for child in itertools.product(*halves):
            push(child)


@dataclass(frozen=True)
class _CellRect:
    axes: tuple

    def magnitudes(self):
        return tuple(max(abs(a), abs(b)) for a, b in self.axes)


# ---------------------------------------------------------------------------
# approximating the discontinuous assignment


def approx_gap(G: Callable[[Dyadic], object], delta, step=ONE) -> Dyadic:
    """``max(|G(-delta) - step|, |G(delta) + step|)``.

    ``step`` is the jump height of the true assignment (``min(1, a)``).
    """
    delta, step = Dyadic.coerce(delta), Dyadic.coerce(step)
    left = Dyadic.coerce(G(-delta))
    right = Dyadic.coerce(G(delta))
    return max(abs(left - step), abs(right + step))


def gap_bound(L, delta, step=ONE) -> Dyadic:
    """Certified lower bound ``step - L delta`` on the gap of an L-Lipschitz approximant."""
    return Dyadic.coerce(step) - Dyadic.coerce(L) * Dyadic.coerce(delta)


def ramp(L, shift=ZERO, step=ONE) -> Callable[[Dyadic], Dyadic]:
    """L-Lipschitz clamp of ``-L (x - shift)`` to ``[-step, step]``."""
    L, shift, step = Dyadic.coerce(L), Dyadic.coerce(shift), Dyadic.coerce(step)

    def G(x):
        return _clamp(-L * (Dyadic.coerce(x) - shift), -step, step)

    return G
