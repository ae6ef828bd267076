"""
Closed-form quantities for a degree law
=======================================

Branching ratio, critical red rate, range constant and the probability that
a vertex is open, for a few degree laws.
"""
import math

from chase_escape import DegreeModel, open_probability, theory_report
from chase_escape.degree_theory import c_lambda, lambda_crit, survival_bound

# The critical rate depends on the law only through a = E[D^2]/E[D] - 1.
from chase_escape import parse_model

for spec in ["regular:3", "regular:4", "poisson:3", "geometric:0.25", "powerlaw:2.5:1000"]:
    rep = theory_report(parse_model(spec))
    C = "n/a" if rep.range_const_C is None else f"{rep.range_const_C:.4f}"
    print(f"{spec:>18}  a={rep.a:8.4f}  Lambda={rep.lambda_crit:.6f}  C={C}")

# At a = 1 the square root vanishes; for large a the rate behaves like 1/(4a).
for a in [1, 2, 10, 1e3, 1e6, math.inf]:
    lam = lambda_crit(a)
    print(f"a={a:>9}  Lambda={lam:.3e}  4*a*Lambda={4 * a * lam if math.isfinite(a) else float('nan'):.4f}")

# A 2-regular graph is a union of cycles, so no giant component and no Lambda.
print(theory_report(DegreeModel.regular(2)).notes)

# Path survival bound: useful once k is large enough to beat the prefactor.
lam = 0.5
print(f"C_lambda({lam}) = {c_lambda(lam)}")
print([round(survival_bound(lam, k), 4) for k in range(1, 11)])

# Open probability: red must leave along every edge before blue arrives on any.
for k in range(0, 6):
    print(k, [round(open_probability(k, lam), 5) for lam in (0.5, 1, 5, 20)])
