"""
Coordinate descent on the piecewise bilinear f1
===============================================

Gauss-Seidel with exact minimizers settles in at most two sweeps from any
start.  The catch is the first assignment function: it jumps from +1 to -1
across x2 = 0, and no Lipschitz function can follow that jump closely.
"""

from effopt import AssignmentPolicy, Dyadic, F1, Problem, Rect, StoppingPolicy, gauss_seidel
from effopt.argmin import f1_assignments, g1_f1
from effopt.experiments import exp_approx_gap, exp_f1_convergence

box = Rect.box(2, 2)
problem = Problem(F1(), box)


def show(start, alpha):
    trace = gauss_seidel(problem, f1_assignments(AssignmentPolicy.fixed(alpha)),
                         tuple(Dyadic.coerce(v) for v in start), StoppingPolicy.max_iter(3))
    rows = ["(" + ", ".join(map(str, x)) + ")" for x in trace.iterates]
    print(f"  start {start!s:<14} alpha={alpha!s:<3}: " + " -> ".join(rows))


# One row per initialization case: above, below and on the axis x2 = 0.
print("iterates for three starts and three choices on the flat segment")
for start in (("3/4", "5/4"), ("-3/2", "-1/8"), ("1/2", 0)):
    for alpha in (-1, 0, 1):
        show(start, alpha)

# The same claim over many random starts.
rep = exp_f1_convergence(trials=500, seed=1)
print("\n500 random starts:", rep.summary["checks"])
print("sweeps needed:", rep.summary["histogram"])

# The assignment function itself: a step at zero.
policy = AssignmentPolicy.fixed(0)
print("\nG1 near zero:", {str(x): str(g1_f1(x, policy)) for x in
                          (Dyadic(-1, -10), Dyadic(0), Dyadic(1, -10))})

# Any L-Lipschitz replacement stays at least 1 - L*delta away somewhere.
gap = exp_approx_gap(Ls=(1, 4, 16), deltas=(Dyadic.pow2(-4), Dyadic.pow2(-8)))
print("\nworst-case distance of Lipschitz candidates to G1")
for r in gap.records:
    print(f"  {r['kind']:<13} L={r['L']:<3} delta={r['delta']:<6} gap={r['gap']:<8} bound={r['bound']}")
