"""
Building the optimal universal cloner by hand
=============================================

Feed N copies of a random qubit into the symmetric-subspace cloner, look at
one of the M outputs and compare its overlap with the input against the
closed-form bound.
"""

import numpy as np

from pufclone import CloneParams, SeededRng, avg_clone_fidelity_mc, haar_state, uqcm_clone, uqcm_fidelity
from pufclone.cloning import single_clone_state
from pufclone.quantum import fidelity, partial_trace

rng = SeededRng(2024)

# one qubit in, two clones out
params = CloneParams(n_in=1, m_out=2, d=2)
psi = haar_state(2, rng)
rho = uqcm_clone(psi, params)
print("output is a", rho.matrix.shape, "density matrix with trace", np.trace(rho.matrix).real)

# both clones carry the same reduced state
first, second = partial_trace(rho, [0]), partial_trace(rho, [1])
print("marginals agree:", np.allclose(first.matrix, second.matrix))

# the overlap does not depend on which state went in
for _ in range(3):
    psi = haar_state(2, rng)
    marginal = single_clone_state(uqcm_clone(psi, params))
    print(f"  clone fidelity {fidelity(psi, marginal):.12f}")
print(f"closed form      {uqcm_fidelity(1, 2, 2):.12f}")

# Monte Carlo average over Haar-random inputs for a few settings
for n, m, d in [(1, 3, 2), (2, 4, 2), (1, 2, 3)]:
    mean, se = avg_clone_fidelity_mc(CloneParams(n, m, d), 500, rng)
    print(f"N={n} M={m} d={d}: sampled {mean:.10f} (se {se:.1e}), formula {uqcm_fidelity(n, m, d):.10f}")
