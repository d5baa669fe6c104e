"""
Compensated variation under a price increase with quasi-linear utility.

CV is the utility change divided by the marginal utility of income. A
uniform price shift lowers everyone's CV by exactly the shift; a shift on
one good only spreads CV across consumers.
"""
import numpy as np

from sqwelfare.cv import PriceScenario, check_prop3
from sqwelfare.draws import NoiseSpec

h = np.array([[0.5, 0.0], [0.0, 0.5], [0.2, 0.2]])
betas = [0.1, 0.5, 1.0]
for label, p1 in (("both goods +1", [2.0, 3.0]), ("good 1 only +1", [2.0, 2.0])):
    psc = PriceScenario(h, 1.2, 10.0, [1.0, 2.0], p1, [0.3, 0.3, 0.4], NoiseSpec("uniform", low=-0.5, high=0.5),
                        cv_slack_mu=4 * 0.5 / 1.2)
    rep = check_prop3(psc, betas, 20_000, seed=3)
    print(label)
    for r in rep.by_bound("cv_upper"):
        print(f"  beta={r.level:3.1f}  S(CV)={r.lhs:7.4f}  S(average CV)={r.rhs:7.4f}")
