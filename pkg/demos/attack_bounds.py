"""
How much an attacker can hope to pass
=====================================

Compare the cloning attack with the measure-and-resend attack, follow the
cloning bound as the number of clones grows, and average it over a Poisson
photon source.
"""

import numpy as np

from pufclone import est_fidelity, poisson_avg_bound, pqcm_fidelity_1to2, total_false_accept, uqcm_fidelity

# a single photon against many clones: the per-photon pass rate collapses
for d in (2, 10, 50):
    row = [uqcm_fidelity(1, m, d) for m in (2, 10, 100, 1000)]
    print(f"d={d:4d}  M=2,10,100,1000 ->", np.round(row, 5))

# more photons per pulse help the attacker
print("N=200 M=2000 d=100 ->", round(uqcm_fidelity(200, 2000, 100), 6))

# cloning always beats estimating, and approaches it as M grows
for n, d in [(1, 2), (5, 100), (50, 1100)]:
    print(f"N={n} d={d}: cloning {uqcm_fidelity(n, 10**6, d):.6f} vs estimating {est_fidelity(n, d):.6f}")

# equatorial challenges leak more to a phase-covariant cloner
for d in (2, 3, 11):
    print(f"d={d}: phase-covariant {pqcm_fidelity_1to2(d):.6f} vs universal {uqcm_fidelity(1, 2, d):.6f}")

# many rounds and a tolerance eps turn the per-photon rate into a total
p = uqcm_fidelity(1, 2, 2)
for m in (20, 100, 500):
    print(f"m={m:3d} rounds, eps=0.25: total false accept {total_false_accept(p, 1, m, 0.25):.3e}")

# photon-number averaging for a laser-like source
exact, jensen = poisson_avg_bound(230, 2000, 1100)
print(f"Poisson(230), M=2000, d=1100: average {exact:.6f} <= mean-photon bound {jensen:.6f}")
