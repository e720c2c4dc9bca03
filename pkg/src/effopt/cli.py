"""Command-line front end: ``effopt eval | optimize | experiment | schema``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .argmin import AssignmentPolicy, f1_assignments, f2_assignments, m1_f1, m1_f2
from .corpus import (
    F1,
    F2,
    F2Params,
    GStarParams,
    Rect,
    SequenceSpec,
    f1_eval,
    gstar_eval,
    parse_rational,
)
from .descent import Problem, Schedule, StopReason, StoppingPolicy, gauss_seidel, trace_to_json
from .experiments import EXPERIMENTS
from .realkit import DEFAULT_PREC, Dyadic, DyadicParseError, parse_dyadic

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERDICT_FAIL = 2
EXIT_NO_CERTIFIED_SIGN = 3

FUNCTIONS = ("f1", "f2", "gstar")


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    # usage errors share the validation exit code; 2 is reserved for failed verdicts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _point(text: str) -> tuple[Dyadic, ...]:
    try:
        return tuple(parse_dyadic(t) for t in text.split(","))
    except DyadicParseError as exc:
        raise ConfigError(str(exc)) from None


def _dyadic_list(text: str) -> list[Dyadic]:
    return list(_point(text))


def _rect(text: str) -> Rect:
    """``a1:b1,a2:b2``."""
    try:
        axes = [tuple(parse_dyadic(v) for v in part.split(":")) for part in text.split(",")]
        if any(len(ax) != 2 for ax in axes):
            raise ConfigError(f"axis bounds must look like a:b, got {text!r}")
        return Rect(tuple(axes))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def default_precision() -> int:
    raw = os.environ.get("EFFOPT_PREC")
    if raw is None:
        return DEFAULT_PREC
    try:
        prec = int(raw)
    except ValueError:
        raise ConfigError(f"EFFOPT_PREC must be an integer, got {raw!r}") from None
    if prec < 1:
        raise ConfigError("EFFOPT_PREC must be >= 1")
    return prec


@dataclass
class RunConfig:
    """Everything a run needs, validated before any computation starts."""

    function: str
    xi_star: Fraction = Fraction(1, 2)
    sequence: str = "standard"
    K: int | None = None
    alpha: Fraction = Fraction(1, 10)
    rect: Rect = field(default_factory=lambda: Rect.box(2, 2))
    policy: AssignmentPolicy | None = None
    stopping: StoppingPolicy = field(default_factory=StoppingPolicy.fixed_point)
    out: Path | None = None
    seed: int = 0
    prec: int = DEFAULT_PREC
    schedule: Schedule | None = None
    seq: SequenceSpec = field(init=False)

    def __post_init__(self):
        if self.function not in FUNCTIONS:
            raise ConfigError(f"unknown function {self.function!r}; choose from {', '.join(FUNCTIONS)}")
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.prec < 1:
            raise ConfigError("precision must be >= 1")
        try:
            self.seq = (SequenceSpec.standard(self.xi_star) if self.sequence == "standard"
                        else SequenceSpec(self.sequence, self.xi_star, self.K))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.function != "gstar" and self.rect.dim != 2:
            raise ConfigError(f"{self.function} lives on a 2-D rectangle")
        if self.schedule is None:
            self.schedule = Schedule.scalar(self.rect.dim)
        if self.policy is None:
            self.policy = AssignmentPolicy.fixed(0) if self.function == "f1" else AssignmentPolicy("left")
        if self.policy.kind == "fixed" and self.function != "gstar":
            seg = self.segment()
            if not seg.lo <= self.policy.alpha <= seg.hi:
                raise ConfigError(
                    f"fixed value {self.policy.alpha} lies outside the minimizer segment [{seg.lo}, {seg.hi}]")

    @property
    def f2_params(self) -> F2Params:
        return F2Params(GStarParams(self.seq), self.alpha)

    def segment(self):
        """Minimizer set of the first coordinate on the axis ``x2 = 0``."""
        if self.function == "f1":
            return m1_f1(Dyadic(0), self.rect)
        return m1_f2(self.f2_params, Dyadic(0), prec=max(self.prec, 64), rect=self.rect)

    def objective(self):
        return F1() if self.function == "f1" else F2(self.f2_params)

    def assignments(self):
        if self.function == "f1":
            return f1_assignments(self.policy, self.rect)
        return f2_assignments(self.f2_params, self.policy, self.rect, prec=max(self.prec, 64))


def _format(value) -> str:
    if isinstance(value, Dyadic):
        return str(value)
    if value.is_point:
        return str(value.lo)
    return f"[{value.lo}, {value.hi}]  width {value.width} (~{float(value.mid):.17g})"


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    cfg = _config(args, args.function)
    x = _point(args.at)
    if args.function == "gstar":
        if len(x) != 1:
            raise ConfigError("gstar takes one coordinate")
        value = gstar_eval(GStarParams(cfg.seq, truncation=max(cfg.prec, 53)), x[0])
    else:
        if len(x) != 2:
            raise ConfigError(f"{args.function} takes two coordinates")
        value = f1_eval(*x) if args.function == "f1" else cfg.objective().enclose(x, cfg.prec)
    if args.json:
        print(json.dumps(value.to_json(), sort_keys=True))
    else:
        print(_format(value))
    return EXIT_OK


def _stopping(args) -> StoppingPolicy:
    sweeps = args.max_sweeps
    if args.stop == "max-iter":
        return StoppingPolicy.max_iter(sweeps)
    if args.stop == "target":
        if args.target is None:
            raise ConfigError("--stop target needs --target M")
        oracle = _point(args.oracle) if args.oracle else None
        return StoppingPolicy.target(args.target, oracle, sweeps)
    eps = parse_dyadic(args.eps) if args.eps else (
        Dyadic(0) if args.function == "f1" else Dyadic.pow2(-30))
    return StoppingPolicy.fixed_point(eps, sweeps)


def cmd_optimize(args) -> int:
    if args.function == "gstar":
        raise ConfigError("optimize runs on f1 or f2")
    cfg = _config(args, args.function)
    cfg.stopping = _stopping(args)
    x0 = _point(args.start) if args.start else None
    problem = Problem(cfg.objective(), cfg.rect, cfg.schedule)
    try:
        trace = gauss_seidel(problem, cfg.assignments(), x0, cfg.stopping, cfg.prec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = json.dumps(trace_to_json(trace), sort_keys=True, indent=2)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n", encoding="utf-8")
        print(f"trace written to {cfg.out} ({trace.stop_reason.value}, {trace.sweeps} sweeps)")
    else:
        print(text)
    if trace.stop_reason == StopReason.NO_CERTIFIED_SIGN:
        print(f"no certified sign: {trace.message}", file=sys.stderr)
        return EXIT_NO_CERTIFIED_SIGN
    return EXIT_OK


def _experiment_kwargs(args) -> dict:
    name = args.name
    if name == "f1-convergence":
        return {"trials": args.trials, "seed": args.seed}
    if name == "f2-reachability":
        kw = {"k_max": args.k_max, "xi_star": parse_rational(args.xi_star),
              "alpha": parse_rational(args.alpha), "prec": max(_prec(args), 64)}
        if args.tol:
            kw["tol"] = parse_dyadic(args.tol)
        return kw
    if name == "approx-gap":
        kw = {"a": parse_dyadic(args.a)}
        if args.L:
            kw["Ls"] = _dyadic_list(args.L)
        if args.delta:
            kw["deltas"] = _dyadic_list(args.delta)
        return kw
    return {"budget": args.budget, "trials": args.trials, "seed": args.seed}


def cmd_experiment(args) -> int:
    try:
        report = EXPERIMENTS[args.name](**_experiment_kwargs(args))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    paths = report.write(args.out)
    print(f"{report.name}: {'pass' if report.verdict else 'fail'}")
    for key, val in sorted(report.to_json()["summary"].items()):
        print(f"  {key}: {json.dumps(val, sort_keys=True)}")
    for p in paths:
        print(f"  wrote {p}")
    return EXIT_OK if report.verdict else EXIT_VERDICT_FAIL


_DYADIC_SCHEMA = {
    "type": "object",
    "properties": {"m": {"type": "string", "pattern": "^-?[0-9]+$"}, "e": {"type": "integer"}},
    "required": ["m", "e"],
}
_INTERVAL_SCHEMA = {
    "type": "object",
    "properties": {"lo": _DYADIC_SCHEMA, "hi": _DYADIC_SCHEMA},
    "required": ["lo", "hi"],
}
_POINT_SCHEMA = {"type": "array", "items": _DYADIC_SCHEMA}

SCHEMAS = {
    "trace": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Gauss-Seidel trace",
        "type": "object",
        "properties": {
            "iterates": {"type": "array", "items": _POINT_SCHEMA},
            "values": {"type": "array", "items": {"oneOf": [_DYADIC_SCHEMA, _INTERVAL_SCHEMA]}},
            "inner_steps": {"type": "array", "items": {"type": "array", "items": _POINT_SCHEMA}},
            "stop_reason": {"enum": [r.value for r in StopReason]},
            "sweeps": {"type": "integer", "minimum": 0},
            "heuristic": {"type": "boolean"},
            "message": {"type": "string"},
        },
        "required": ["iterates", "values", "stop_reason", "sweeps"],
    },
    "report": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Experiment report",
        "type": "object",
        "properties": {
            "name": {"enum": sorted(EXPERIMENTS)},
            "parameters": {"type": "object"},
            "records": {"type": "array", "items": {"type": "object"}},
            "verdict": {"enum": ["pass", "fail"]},
            "summary": {"type": "object"},
            "artifacts": {"type": "array", "items": {"type": "string"}},
        },
        "required": ["name", "parameters", "records", "verdict", "artifacts"],
    },
}


def cmd_schema(args) -> int:
    chosen = SCHEMAS if args.which == "all" else {args.which: SCHEMAS[args.which]}
    print(json.dumps(chosen, sort_keys=True, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _prec(args) -> int:
    return args.prec if args.prec is not None else default_precision()


def _config(args, function: str) -> RunConfig:
    kw = {
        "function": function,
        "xi_star": parse_rational(args.xi_star),
        "sequence": args.sequence,
        "K": args.K,
        "alpha": parse_rational(args.alpha),
        "prec": _prec(args),
    }
    if getattr(args, "rect", None):
        kw["rect"] = _rect(args.rect)
    elif function == "gstar":
        kw["rect"] = Rect.box(2)
    if getattr(args, "policy", None):
        try:
            kw["policy"] = AssignmentPolicy.parse(args.policy)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if getattr(args, "out", None):
        kw["out"] = Path(args.out)
    return RunConfig(**kw)


def _add_function_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi-star", default="1/2", help="limit of the xi sequence (exact rational)")
    p.add_argument("--sequence", choices=("standard", "plateau"), default="standard")
    p.add_argument("--K", type=int, default=None, help="hidden index of a plateau sequence")
    p.add_argument("--alpha", default="1/10", help="exponential rate in f2 (exact rational, e.g. 0.1)")
    p.add_argument("--prec", type=int, default=None, help="precision in bits (default: $EFFOPT_PREC or 53)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="effopt", description="Exact coordinate-descent laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate f1 exactly or enclose f2 / gstar")
    p.add_argument("function", choices=FUNCTIONS)
    p.add_argument("--at", required=True, help="comma-separated dyadic coordinates")
    p.add_argument("--json", action="store_true", help="print the value as JSON")
    _add_function_params(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="run block Gauss-Seidel and print the trace")
    p.add_argument("function", choices=("f1", "f2"))
    p.add_argument("--start", help="start point (default: rectangle midpoint)")
    p.add_argument("--policy", help="left | right | mid | fixed:<value>")
    p.add_argument("--rect", help="bounds as a1:b1,a2:b2 (default -2:2,-2:2)")
    p.add_argument("--stop", choices=("fixed-point", "max-iter", "target"), default="fixed-point")
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--eps", help="fixed-point tolerance (default 0 for f1, 2^-30 for f2)")
    p.add_argument("--target", type=int, help="target error exponent M for --stop target")
    p.add_argument("--oracle", help="exact limit point used by --stop target")
    p.add_argument("--out", help="write the trace JSON here instead of stdout")
    _add_function_params(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("experiment", help="run a registered experiment and write its report")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--tol", help="bisection tolerance for f2-reachability")
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--L", help="comma-separated Lipschitz constants")
    p.add_argument("--delta", help="comma-separated sampling offsets")
    p.add_argument("--a", default="1", help="half-width of the x1 range for approx-gap")
    p.add_argument("--out", default="effopt-reports", help="directory for JSON and CSV output")
    _add_function_params(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("schema", help="print the JSON schemas of traces and reports")
    p.add_argument("which", nargs="?", choices=("all", "trace", "report"), default="all")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv=None) -> int:
    try:
        sys.stdout.reconfigure(encoding="utf-8", line_buffering=True)
    except (AttributeError, ValueError):
        pass
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
    except ValueError as exc:
        print(f"effopt: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
