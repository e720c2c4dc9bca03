"""Exact coordinate-descent laboratory.

Dyadic arithmetic and certified enclosures (``realkit``), the counterexample
objectives (``corpus``), certified coordinate minimizers (``argmin``), the
Gauss-Seidel engine (``descent``) and reproducible experiments
(``experiments``).
"""

from .argmin import (
    AssignmentPolicy,
    LocalMinSet,
    NoCertifiedSign,
    convex_1d_min,
    f1_assignments,
    f2_assignments,
    g1_f1,
    g1_f2,
    g2_f1,
    g2_f2,
    global_min_enclosure,
    m1_f1,
    m1_f2,
)
from .corpus import (
    F1,
    F2,
    F2Params,
    GStarParams,
    Rect,
    SequenceSpec,
    f1_eval,
    f2_eval,
    gstar_deriv,
    gstar_eval,
)
from .descent import (
    Problem,
    Schedule,
    StoppingPolicy,
    StopReason,
    Trace,
    critical_point_check,
    gauss_seidel,
    verify_effective,
)
from .experiments import EXPERIMENTS, ExperimentReport
from .realkit import Dyadic, DyadicParseError, Interval, interval_exp, parse_dyadic

__version__ = "0.1.0"
