"""Reproducible experiments, each producing a deterministic JSON + CSV report."""

from __future__ import annotations

import csv
import io
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .argmin import (
    AssignmentPolicy,
    NoCertifiedSign,
    f1_assignments,
    g1_f1,
    g1_f2,
    m1_f2,
    ramp,
)
from .corpus import F1, F2Params, Rect, SequenceSpec, parse_rational
from .descent import Problem, StoppingPolicy, critical_point_check, gauss_seidel
from .realkit import Dyadic, Interval

__all__ = [
    "ExperimentReport",
    "QueryBudgetExceeded",
    "CountingAccessor",
    "STOPPING_RULES",
    "exp_f1_convergence",
    "exp_f2_reachability",
    "exp_approx_gap",
    "exp_adversarial_stopping",
    "EXPERIMENTS",
]


def _jsonable(v):
    if isinstance(v, (Dyadic, Interval)):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class ExperimentReport:
    """Records, a verdict derived only from them, and the files written."""

    name: str
    parameters: dict
    records: list[dict]
    verdict: bool
    summary: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "parameters": _jsonable(self.parameters),
            "records": _jsonable(self.records),
            "verdict": "pass" if self.verdict else "fail",
            "summary": _jsonable(self.summary),
            "artifacts": list(self.artifacts),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def csv_text(self) -> str:
        rows = _jsonable(self.records)
        header = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: r.get(k, "") for k in header})
        return buf.getvalue()

    def write(self, outdir) -> list[Path]:
        """Write ``<name>.json`` and ``<name>.csv`` into ``outdir``."""
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.name.replace("-", "_")
        self.artifacts = [f"{stem}.json", f"{stem}.csv"]
        paths = [out / a for a in self.artifacts]
        paths[0].write_text(self.dumps(), encoding="utf-8")
        paths[1].write_text(self.csv_text(), encoding="utf-8")
        return paths


def _fmt(p: Sequence[Dyadic]) -> str:
    return "(" + ", ".join(map(str, p)) + ")"


def _random_dyadic(rng: random.Random, lo: int, hi: int, bits: int = 20) -> Dyadic:
    """Uniform on the grid ``2**-bits`` inside ``[lo, hi]``."""
    return Dyadic(rng.randint(lo << bits, hi << bits), -bits)


# ---------------------------------------------------------------------------
# f1: convergence within two sweeps


def exp_f1_convergence(trials: int = 1000, seed: int = 0) -> ExperimentReport:
    """Random 20-bit dyadic starts on ``[-2, 2]**2`` under fixed-value policies.

    Policies cycle through ``-1, 0, 1`` and a random value in ``[-1, 1]``.
    Every fifth start lies exactly on the axis ``x2 = 0``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    rect = Rect.box(2, 2)
    problem = Problem(F1(), rect)
    records = []
    for t in range(trials):
        x1 = _random_dyadic(rng, -2, 2)
        x2 = Dyadic(0) if t % 5 == 0 else _random_dyadic(rng, -2, 2)
        choice = t % 4
        alpha = _random_dyadic(rng, -1, 1) if choice == 3 else Dyadic(choice - 1)
        policy = AssignmentPolicy.fixed(alpha)
        trace = gauss_seidel(problem, f1_assignments(policy, rect), (x1, x2),
                             StoppingPolicy.fixed_point(max_sweeps=10))
        final = trace.final
        records.append({
            "trial": t,
            "start": _fmt((x1, x2)),
            "policy": str(policy),
            "sweeps_to_fixed": len(trace.iterates) - 1,
            "sweeps_run": trace.sweeps,
            "stop_reason": trace.stop_reason.value,
            "final": _fmt(final),
            "final_value": str(trace.values[-1]),
            "on_segment": abs(final[0]) <= 1 and final[1] == 0,
            "critical": critical_point_check(problem.objective, rect, final),
            "x2_zero": x2 == 0,
            "alpha_minus_one_x2_pos": alpha == -1 and x2 > 0,
        })
    hist = Counter(r["sweeps_to_fixed"] for r in records)
    checks = {
        "all_fixed": all(r["stop_reason"] == "FixedPoint" for r in records),
        "within_two_sweeps": all(r["sweeps_to_fixed"] <= 2 for r in records),
        "final_on_segment": all(r["on_segment"] for r in records),
        "final_value_zero": all(r["final_value"] == "0" for r in records),
        "final_critical": all(r["critical"] for r in records),
        "axis_starts_one_sweep": all(r["sweeps_to_fixed"] <= 1 for r in records if r["x2_zero"]),
        "alpha_minus_one_x2_pos_one_sweep": all(
            r["sweeps_to_fixed"] <= 1 for r in records if r["alpha_minus_one_x2_pos"]),
    }
    summary = {"histogram": {str(k): hist[k] for k in sorted(hist)}, "checks": checks}
    return ExperimentReport("f1-convergence", {"trials": trials, "seed": seed},
                            records, all(checks.values()), summary)


# ---------------------------------------------------------------------------
# f2: only the two ends of the minimizer segment are reachable


def exp_f2_reachability(k_max: int = 12, tol=Dyadic.pow2(-40), xi_star="1/2",
                        alpha=Fraction(1, 10), prec: int = 64,
                        max_prec: int | None = None) -> ExperimentReport:
    """Certified ``G1(+-2**-k)`` for ``k = 1..k_max``.

    Rows where the bisection cannot decide a sign at the available precision
    are kept with status ``no-certified-sign`` and left out of the checks.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    p = F2Params.standard(xi_star, alpha)
    xi = p.gstar.seq.limit
    records = []
    plus: dict[int, Interval] = {}
    minus: dict[int, Interval] = {}
    for k in range(1, k_max + 1):
        for sign in (1, -1):
            x2 = Dyadic.pow2(-k) * sign
            row = {"k": k, "x2": str(x2), "side": "+" if sign > 0 else "-"}
            try:
                enc = g1_f2(p, x2, tol, prec, max_prec=max_prec)
            except NoCertifiedSign as exc:
                row.update(status="no-certified-sign", detail=str(exc))
                records.append(row)
                continue
            lo, hi = enc.lo.to_fraction(), enc.hi.to_fraction()
            dist = (-xi - hi, -xi - lo) if sign > 0 else (lo - xi, hi - xi)
            row.update(status="ok", lo=str(enc.lo), hi=str(enc.hi), mid=float(enc.mid),
                       dist_lo=float(dist[0]), dist_hi=float(dist[1]))
            (plus if sign > 0 else minus)[k] = enc
            records.append(row)

    ks = sorted(plus)
    adjacent = list(zip(ks, ks[1:]))
    checks = {
        "plus_below_minus_xi": all(plus[k].hi < -xi for k in ks),
        "minus_above_xi": all(minus[k].lo > xi for k in minus),
        "plus_strictly_increasing": all(plus[a].hi < plus[b].lo for a, b in adjacent),
        "mirror_symmetric": all(minus.get(k) == -plus[k] for k in ks if k in minus),
        "gap_shrinks": bool(ks) and plus[ks[0]].hi < plus[ks[-1]].lo,
    }
    segment = m1_f2(p, Dyadic(0), tol, prec)
    summary = {
        "minimizer_segment": [str(segment.lo), str(segment.hi)],
        "approached_from_above": str(-xi),
        "approached_from_below": str(xi),
        "obstructed_rows": sum(r["status"] != "ok" for r in records),
        "checks": checks,
    }
    params = {"k_max": k_max, "tol": str(Dyadic.coerce(tol)), "xi_star": str(xi),
              "alpha": str(Fraction(alpha)), "prec": prec}
    return ExperimentReport("f2-reachability", params, records, all(checks.values()), summary)


# ---------------------------------------------------------------------------
# Lipschitz approximants of the jump in G1


def _constant(value) -> Callable[[Dyadic], Dyadic]:
    value = Dyadic.coerce(value)
    return lambda x: value


def exp_approx_gap(Ls: Sequence = (1, 2, 4, 8, 16),
                   deltas: Sequence = tuple(Dyadic.pow2(-k) for k in range(4, 13)),
                   a=1, b=2) -> ExperimentReport:
    """Sup-distance between the true ``G1`` of f1 on ``[-a,a] x [-b,b]`` and
    L-Lipschitz candidates, sampled at ``x2 = +-delta``.

    Any L-Lipschitz candidate is at least ``min(1, a) - L delta`` away, since
    the true ``G1`` jumps by ``2 min(1, a)`` across ``x2 = 0``.
    """
    if not Ls or not deltas:
        raise ValueError("need at least one Lipschitz constant and one delta")
    a, b = Dyadic.coerce(a), Dyadic.coerce(b)
    rect = Rect(((-a, a), (-b, b)))
    step = min(Dyadic(1), a)
    policy = AssignmentPolicy.fixed(0)
    records = []
    for delta in map(Dyadic.coerce, deltas):
        samples = (-delta, delta)
        truth = {s: g1_f1(s, policy, rect) for s in samples}
        cands = [("constant", Dyadic(0), _constant(0))]
        for L in map(Dyadic.coerce, Ls):
            cands += [
                ("ramp", L, ramp(L, step=step)),
                ("shifted-ramp", L, ramp(L, shift=delta.half(), step=step)),
                ("half-ramp", L, ramp(L, step=step.half())),
            ]
        for kind, L, G in cands:
            gap = max(abs(truth[s] - G(s)) for s in samples)
            bound = step - L * delta
            records.append({
                "kind": kind, "L": str(L), "delta": str(delta),
                "true_left": str(truth[-delta]), "true_right": str(truth[delta]),
                "gap": str(gap), "bound": str(bound), "ok": gap >= bound,
            })
    checks = {
        "all_above_bound": all(r["ok"] for r in records),
        "constant_gap_is_step": all(r["gap"] == str(step) for r in records if r["kind"] == "constant"),
        "true_steps_are_pm_threshold": all(
            r["true_left"] == str(step) and r["true_right"] == str(-step) for r in records),
    }
    params = {"Ls": [str(Dyadic.coerce(L)) for L in Ls],
              "deltas": [str(Dyadic.coerce(d)) for d in deltas],
              "a": str(a), "b": str(b), "threshold": str(step)}
    return ExperimentReport("approx-gap", params, records, all(checks.values()), {"checks": checks})


# ---------------------------------------------------------------------------
# stopping rules that can only read a finite prefix


class QueryBudgetExceeded(LookupError):
    pass


class CountingAccessor:
    """Sequence wrapper allowing at most ``budget`` reads of indices ``1..budget``."""

    def __init__(self, seq: Callable[[int], Fraction], budget: int):
        self._seq = seq
        self.budget = budget
        self.log: list[int] = []

    def __call__(self, n: int) -> Fraction:
        if n < 1 or n > self.budget:
            raise QueryBudgetExceeded(f"index {n} outside 1..{self.budget}")
        if len(self.log) >= self.budget:
            raise QueryBudgetExceeded(f"more than {self.budget} queries")
        self.log.append(n)
        return self._seq(n)


def _rule_contract(read, m):
    x = read(m)
    return x, Fraction(1, 1 << m)


def _rule_last_difference(read, m):
    if m < 2:
        return _rule_contract(read, m)
    a, b = read(m - 1), read(m)
    return b - (a - b), abs(a - b)


def _rule_aitken(read, m):
    if m < 3:
        return _rule_last_difference(read, m)
    x0, x1, x2 = read(m - 2), read(m - 1), read(m)
    denom = x2 - 2 * x1 + x0
    if denom == 0:
        return x2, Fraction(0)
    est = x2 - (x2 - x1) ** 2 / denom
    return est, abs(x2 - est)


def _rule_geometric_tail(read, m):
    if m < 3:
        return _rule_last_difference(read, m)
    x0, x1, x2 = read(m - 2), read(m - 1), read(m)
    d1, d2 = x1 - x0, x2 - x1
    if d1 == 0 or not 0 <= d2 / d1 < 1:
        return x2, abs(d2)
    r = d2 / d1
    tail = d2 * r / (1 - r)
    return x2 + tail, abs(tail)


STOPPING_RULES: dict[str, Callable] = {
    "contract": _rule_contract,
    "last-difference": _rule_last_difference,
    "aitken": _rule_aitken,
    "geometric-tail": _rule_geometric_tail,
}


def exp_adversarial_stopping(budget: int = 10, trials: int = 1, seed: int = 0,
                             base="1/4") -> ExperimentReport:
    """Two sequences that agree on their first ``budget`` terms but whose
    limits differ by ``2**-(budget+1)``, fed to every registered stopping rule.

    Trial 0 uses ``base``; later trials draw bases in ``[1/8, 3/8]``.
    """
    m = budget
    if m < 1:
        raise ValueError("budget must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    records = []
    checks = {"prefix_identical": True, "limit_gap_exact": True,
              "rules_blind": True, "bound_violated": True, "plateau_decreasing": True}
    quarter_gap = Fraction(1, 1 << (m + 2))
    for t in range(trials):
        b = parse_rational(base) if t == 0 else Fraction(rng.randint(1 << 17, 3 << 17), 1 << 20)
        std, pla = SequenceSpec.standard(b), SequenceSpec.plateau(b, m)
        prefix_ok = all(std(n) == pla(n) for n in range(1, m + 1))
        gap = pla.limit - std.limit
        terms = [pla(n) for n in range(1, m + 66)]
        decreasing = all(x > y for x, y in zip(terms, terms[1:]))
        checks["prefix_identical"] &= prefix_ok
        checks["limit_gap_exact"] &= gap == Fraction(1, 1 << (m + 1))
        checks["plateau_decreasing"] &= decreasing
        for name, rule in STOPPING_RULES.items():
            outs = []
            for seq in (std, pla):
                acc = CountingAccessor(seq, m)
                est, claimed = rule(acc, m)
                outs.append((Fraction(est), Fraction(claimed), tuple(acc.log)))
            (e1, c1, log1), (e2, c2, log2) = outs
            err_std = abs(e1 - std.limit)
            err_pla = abs(e2 - pla.limit)
            blind = (e1, c1, log1) == (e2, c2, log2)
            violated = max(err_std, err_pla) >= quarter_gap
            checks["rules_blind"] &= blind
            checks["bound_violated"] &= violated
            records.append({
                "trial": t, "base": str(b), "rule": name, "estimate": str(e1),
                "claimed_error": str(c1), "queries": len(log1),
                "error_standard": str(err_std), "error_plateau": str(err_pla),
                "identical_output": blind, "worst_error_ge_quarter_gap": violated,
                "limit_standard": str(std.limit), "limit_plateau": str(pla.limit),
                "limit_gap": str(gap),
            })
    params = {"budget": m, "trials": trials, "seed": seed, "base": str(parse_rational(base)),
              "rules": sorted(STOPPING_RULES)}
    summary = {"limit_gap": str(Fraction(1, 1 << (m + 1))), "unattainable_error": str(quarter_gap),
               "checks": checks}
    return ExperimentReport("stopping-adversary", params, records, all(checks.values()), summary)


EXPERIMENTS: dict[str, Callable[..., ExperimentReport]] = {
    "f1-convergence": exp_f1_convergence,
    "f2-reachability": exp_f2_reachability,
    "approx-gap": exp_approx_gap,
    "stopping-adversary": exp_adversarial_stopping,
}
