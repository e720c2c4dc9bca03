"""
No stopping rule can certify the limit from finitely many terms
===============================================================

Two decreasing sequences share their first m terms but have limits
2^-(m+1) apart.  A rule that reads at most m terms returns the same answer
for both, so its error on one of them is at least 2^-(m+2).
"""

from effopt.corpus import SequenceSpec
from effopt.experiments import STOPPING_RULES, CountingAccessor, exp_adversarial_stopping

m = 8
std, pla = SequenceSpec.standard("1/4"), SequenceSpec.plateau("1/4", m)
print("n   standard        plateau")
for n in range(1, m + 4):
    mark = "" if std(n) == pla(n) else "  <- differ"
    print(f"{n:<3} {str(std(n)):<15} {pla(n)}{mark}")
print("limits:", std.limit, pla.limit)

for name, rule in STOPPING_RULES.items():
    acc = CountingAccessor(std, m)
    est, claimed = rule(acc, m)
    print(f"{name:<15} estimate {float(est):.8f}  claimed error {float(claimed):.2e}  "
          f"queries {len(acc.log)}")

rep = exp_adversarial_stopping(budget=m, trials=5, seed=2)
print("\nacross 5 random bases:", rep.summary["checks"])
