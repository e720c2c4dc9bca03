"""Block Gauss-Seidel coordinate descent with exact traces and convergence audits."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .argmin import NoCertifiedSign
from .corpus import DerivativeEnclosure, Rect, Seam
from .realkit import DEFAULT_PREC, Dyadic, Interval

__all__ = [
    "Schedule",
    "Problem",
    "StopReason",
    "StoppingPolicy",
    "Trace",
    "EffectiveReport",
    "gauss_seidel",
    "critical_point_check",
    "critical_point_grid_check",
    "directional_derivative",
    "verify_effective",
    "trace_to_json",
    "trace_from_json",
]

Point = tuple[Dyadic, ...]


@dataclass(frozen=True)
class Schedule:
    """Ordered partition of the coordinate indices ``0..m-1`` into blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        flat = [i for b in blocks for i in b]
        if not blocks or any(not b for b in blocks):
            raise ValueError("blocks must be nonempty")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError(f"blocks {blocks} do not partition 0..{len(flat) - 1}")
        if any(list(b) != sorted(b) for b in blocks):
            raise ValueError("coordinates inside a block must keep their order")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def scalar(cls, m: int) -> Schedule:
        """One coordinate per block, in natural order."""
        return cls(tuple((i,) for i in range(m)))

    @property
    def dim(self) -> int:
        return sum(len(b) for b in self.blocks)


@dataclass(frozen=True)
class Problem:
    objective: object
    rect: Rect
    schedule: Schedule | None = None

    def __post_init__(self):
        if self.schedule is None:
            object.__setattr__(self, "schedule", Schedule.scalar(self.rect.dim))
        if self.schedule.dim != self.rect.dim:
            raise ValueError("schedule and rectangle disagree on the dimension")


class StopReason(str, enum.Enum):
    FIXED_POINT = "FixedPoint"
    MAX_ITER = "MaxIter"
    TARGET_MET = "TargetMet"
    NO_CERTIFIED_SIGN = "NoCertifiedSign"


@dataclass(frozen=True)
class StoppingPolicy:
    """When a Gauss-Seidel run ends.

    ``max_iter``: run exactly ``max_sweeps`` sweeps.
    ``fixed_point``: stop when a sweep moves no coordinate by more than ``eps``
    (``eps = 0`` demands exact equality).
    ``target``: stop once the iterate is within ``2**-M`` of ``oracle_limit``
    in the max-norm.  Without an oracle the rule compares successive iterates
    instead, which is only a heuristic and is flagged as such in the trace.
    """

    kind: str
    max_sweeps: int = 100
    eps: Dyadic = Dyadic(0)
    M: int | None = None
    oracle_limit: Point | None = None

    def __post_init__(self):
        if self.kind not in ("max_iter", "fixed_point", "target"):
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.kind == "target" and (self.M is None or self.M < 0):
            raise ValueError("target stopping needs an exponent M >= 0")

    @classmethod
    def max_iter(cls, n: int) -> StoppingPolicy:
        return cls("max_iter", max_sweeps=n)

    @classmethod
    def fixed_point(cls, eps=0, max_sweeps: int = 100) -> StoppingPolicy:
        return cls("fixed_point", max_sweeps=max_sweeps, eps=Dyadic.coerce(eps))

    @classmethod
    def target(cls, M: int, oracle_limit=None, max_sweeps: int = 100) -> StoppingPolicy:
        if oracle_limit is not None:
            oracle_limit = tuple(Dyadic.coerce(v) for v in oracle_limit)
        return cls("target", max_sweeps=max_sweeps, M=M, oracle_limit=oracle_limit)

    @property
    def heuristic(self) -> bool:
        return self.kind == "target" and self.oracle_limit is None


@dataclass
class Trace:
    """Iterate history of one run.

    ``iterates[k]`` is the point after sweep ``k`` (``iterates[0]`` is the
    start).  A sweep that only confirms a fixed point is counted in
    ``sweeps`` and ``inner_steps`` but not appended to ``iterates``.
    """

    iterates: list[Point]
    values: list[Dyadic | Interval]
    inner_steps: list[list[Point]] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_ITER
    sweeps: int = 0
    heuristic: bool = False
    message: str = ""

    @property
    def final(self) -> Point:
        return self.iterates[-1]

    @property
    def settled_at(self) -> int:
        """First index from which every recorded iterate equals the final one."""
        k = len(self.iterates) - 1
        while k > 0 and self.iterates[k - 1] == self.iterates[-1]:
            k -= 1
        return k


def _max_dist(a: Sequence[Dyadic], b: Sequence[Dyadic]) -> Dyadic:
    return max(abs(x - y) for x, y in zip(a, b))


def _value(f, x: Point, prec: int):
    if getattr(f, "exact", False) and hasattr(f, "value"):
        return f.value(x)
    return f.enclose(x, prec)


def gauss_seidel(problem: Problem, assignments: Sequence[Callable[[Point], object]],
                 x0: Sequence | None = None, stop: StoppingPolicy | None = None,
                 prec: int = DEFAULT_PREC) -> Trace:
    """Run the block Gauss-Seidel sweep ``x_l <- G_l(x)`` for ``l = 1..r``.

    ``assignments[l]`` maps the current full point to the new value of block
    ``l`` (a Dyadic for a scalar block, a sequence otherwise).  Each block
    update sees every block already updated in the same sweep.
    """
    f, rect, schedule = problem.objective, problem.rect, problem.schedule
    if len(assignments) != len(schedule.blocks):
        raise ValueError("need one assignment function per block")
    stop = StoppingPolicy.fixed_point() if stop is None else stop
    x = rect.midpoint() if x0 is None else tuple(Dyadic.coerce(v) for v in x0)
    if not rect.contains(x):
        raise ValueError(f"start point {tuple(map(str, x))} is outside the rectangle")
    trace = Trace([x], [_value(f, x, prec)], heuristic=stop.heuristic)

    while True:
        y = list(x)
        steps: list[Point] = []
        try:
            for block, G in zip(schedule.blocks, assignments):
                new = G(tuple(y))
                new = (new,) if len(block) == 1 and not isinstance(new, (tuple, list)) else new
                for i, v in zip(block, new):
                    y[i] = Dyadic.coerce(v)
                steps.append(tuple(y))
        except NoCertifiedSign as exc:
            trace.stop_reason = StopReason.NO_CERTIFIED_SIGN
            trace.message = str(exc)
            return trace
        y = tuple(y)
        trace.sweeps += 1
        trace.inner_steps.append(steps)
        if stop.kind == "fixed_point" and _max_dist(x, y) <= stop.eps:
            trace.stop_reason = StopReason.FIXED_POINT
            return trace
        trace.iterates.append(y)
        trace.values.append(_value(f, y, prec))
        if stop.kind == "target":
            ref = stop.oracle_limit if stop.oracle_limit is not None else x
            if _max_dist(y, ref) <= Dyadic.pow2(-stop.M):
                trace.stop_reason = StopReason.TARGET_MET
                return trace
        if trace.sweeps >= stop.max_sweeps:
            trace.stop_reason = StopReason.MAX_ITER
            return trace
        x = y


# ---------------------------------------------------------------------------
# stationarity


def _one_sided(d) -> tuple[Interval, Interval]:
    if isinstance(d, DerivativeEnclosure):
        d = d.interval
    if isinstance(d, Seam):
        return Interval.coerce(d.left), Interval.coerce(d.right)
    d = Interval.coerce(d)
    return d, d


def critical_point_check(f, rect: Rect, x: Sequence, tol=0, prec: int = DEFAULT_PREC) -> bool:
    """Box-constrained stationarity, coordinate by coordinate.

    Where the coordinate can decrease the left slope must be ``<= tol``; where
    it can increase the right slope must be ``>= -tol``.  Smooth partials use
    the same value on both sides, so interior coordinates need ``|d| <= tol``.
    Enclosures must satisfy the bounds for every value they contain.
    """
    x = tuple(Dyadic.coerce(v) for v in x)
    tol = Dyadic.coerce(tol)
    if not rect.contains(x):
        raise ValueError("point is outside the rectangle")
    for i, (a, b) in enumerate(rect.axes):
        left, right = _one_sided(f.partial(x, i, prec))
        if x[i] > a and left.hi > tol:
            return False
        if x[i] < b and right.lo < -tol:
            return False
    return True


def directional_derivative(f, x: Point, d: Point, prec: int = DEFAULT_PREC,
                           t_exp: int | None = None) -> Interval:
    """One-sided derivative of ``f`` at ``x`` along ``d`` from values only.

    Uses two forward differences and one Richardson step, which is exact for
    functions that are bilinear on the cell entered by the ray.
    """
    if t_exp is None:
        fine = max([0] + [-v.exponent for v in x if v])
        t_exp = 24 + fine + max([0] + [v.bit_magnitude() for v in d if v])
    fx = f.enclose(x, prec)

    def diff(k: int) -> Interval:
        pt = tuple(xi + di.shift(-k) for xi, di in zip(x, d))
        return f.enclose(pt, prec) - fx

    return (diff(t_exp + 1).shift(2) - diff(t_exp)).shift(t_exp)


def critical_point_grid_check(f, rect: Rect, x: Sequence, grid: int = 41, tol=0,
                              prec: int = DEFAULT_PREC) -> bool:
    """Brute-force check of ``f'(x; y - x) >= -tol`` for ``y`` on a uniform grid.

    Directions are scaled by ``grid - 1`` so they stay dyadic; the sign of a
    directional derivative is invariant under positive scaling.
    """
    x = tuple(Dyadic.coerce(v) for v in x)
    tol = Dyadic.coerce(tol)
    g = grid - 1
    axes = [[a * g + (b - a) * j for j in range(grid)] for a, b in rect.axes]

    def walk(i: int, prefix: tuple):
        if i == len(axes):
            yield prefix
            return
        for v in axes[i]:
            yield from walk(i + 1, prefix + (v,))

    for scaled in walk(0, ()):
        d = tuple(s - xi * g for s, xi in zip(scaled, x))
        if not any(d):
            continue
        norm = sum((abs(v) for v in d), Dyadic(0))
        if directional_derivative(f, x, d, prec).lo < -(tol * norm):
            return False
    return True


# ---------------------------------------------------------------------------
# effective convergence audit


@dataclass
class EffectiveReport:
    """Outcome of testing ``|x_n - limit| <= 2**-n`` along a trace.

    ``per_index`` covers the recorded iterates.  When the run ended at a fixed
    point the sequence is constant afterwards; ``tail_first_failure`` is the
    first later index violating the bound (``None`` if the tail is exact).
    """

    per_index: list[bool]
    tail_first_failure: int | None
    first_failure: int | None
    passes_from: int | None

    @property
    def passed(self) -> bool:
        return self.first_failure is None


def verify_effective(trace: Trace, limit: Sequence) -> EffectiveReport:
    limit = tuple(Dyadic.coerce(v) for v in limit)
    dists = [_max_dist(x, limit).to_fraction() for x in trace.iterates]
    per_index = [d <= Fraction(1, 1 << n) for n, d in enumerate(dists)]

    tail_fail = None
    if trace.stop_reason == StopReason.FIXED_POINT and dists[-1] > 0:
        n = len(dists)
        while dists[-1] <= Fraction(1, 1 << n):
            n += 1
        tail_fail = n

    first = next((n for n, ok in enumerate(per_index) if not ok), tail_fail)
    if tail_fail is not None:
        passes_from = None
    else:
        passes_from = len(per_index)
        while passes_from > 0 and per_index[passes_from - 1]:
            passes_from -= 1
    return EffectiveReport(per_index, tail_fail, first, passes_from)


# ---------------------------------------------------------------------------
# JSON


def _value_json(v):
    return v.to_json() if isinstance(v, (Dyadic, Interval)) else v


def _value_from_json(obj):
    if "lo" in obj:
        return Interval.from_json(obj)
    return Dyadic.from_json(obj)


def _point_json(p: Point) -> list:
    return [v.to_json() for v in p]


def _point_from_json(obj) -> Point:
    return tuple(Dyadic.from_json(v) for v in obj)


def trace_to_json(trace: Trace) -> dict:
    return {
        "iterates": [_point_json(p) for p in trace.iterates],
        "values": [_value_json(v) for v in trace.values],
        "inner_steps": [[_point_json(p) for p in steps] for steps in trace.inner_steps],
        "stop_reason": trace.stop_reason.value,
        "sweeps": trace.sweeps,
        "heuristic": trace.heuristic,
        "message": trace.message,
    }


def trace_from_json(obj) -> Trace:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return Trace(
        iterates=[_point_from_json(p) for p in obj["iterates"]],
        values=[_value_from_json(v) for v in obj["values"]],
        inner_steps=[[_point_from_json(p) for p in steps] for steps in obj.get("inner_steps", [])],
        stop_reason=StopReason(obj["stop_reason"]),
        sweeps=obj["sweeps"],
        heuristic=obj.get("heuristic", False),
        message=obj.get("message", ""),
    )
