"""
Superquantiles of a small set of group estimates, three ways.

The sorted closed form, the quantile integral and the plug-in linear
program should give the same number; the LP also reports the beta-quantile
and how many groups sit in the lower tail.
"""
import numpy as np

from sqwelfare import make_sample
from sqwelfare.superquantile import lower_superquantile, superquantile_via_quantile_integral, upper_superquantile
from sqwelfare.variational import PluginProgram, interpret_solution, solve_simplex_lp

tau_hat = np.array([10.0, 20.0, 30.0, 40.0, 50.0])
weights = np.array([0.1, 0.3, 0.2, 0.2, 0.2])
s = make_sample(tau_hat, weights)

print(" beta   sorted   integral      LP   beta-quantile  binding")
for beta in (0.05, 0.2, 0.5, 0.8, 1.0):
    p = PluginProgram(tau_hat, beta, weights)
    info = interpret_solution(solve_simplex_lp(p), p)
    print(f"{beta:5.2f} {lower_superquantile(s, beta).value:8.3f} {superquantile_via_quantile_integral(s, beta):10.3f}"
          f" {info['superquantile_estimate']:7.3f} {info['beta_quantile_estimate']:15.3f} {info['n_binding']:8d}")

# upper tail: average of the best (1 - alpha) share
print("upper superquantile at alpha=0.8:", upper_superquantile(s, 0.8).value)
