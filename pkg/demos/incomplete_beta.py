"""
The binomial tail as an incomplete beta function
================================================

The probability of at least k successes in n trials equals I_p(k, n - k + 1).
The continued-fraction evaluation is checked against plain summation.
"""

import numpy as np

from pufclone import reg_inc_beta
from pufclone.bounds import acceptance_threshold, binomial_tail

n = 1000
for p in (0.3, 0.7, 0.9):
    for eps in (0.1, 0.25):
        k = acceptance_threshold(n, eps)
        beta = reg_inc_beta(p, k, n - k + 1)
        direct = binomial_tail(p, n, k)
        print(f"p={p} eps={eps}: beta {beta:.6e}  sum {direct:.6e}  diff {abs(beta - direct):.1e}")

# I_x(a, b) + I_{1-x}(b, a) = 1
x, a, b = 0.37, 12.5, 40.0
print("symmetry residual:", reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) - 1)

# monotone in p, so a better per-photon rate never lowers the total
ps = np.linspace(0.01, 0.99, 9)
print(np.round([reg_inc_beta(p, 16, 5) for p in ps], 6))
