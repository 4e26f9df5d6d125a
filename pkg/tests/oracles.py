"""Reference computations that share no code with the package."""
import math
from fractions import Fraction
from itertools import permutations

import mpmath
import numpy as np


def binomial_tail_mp(p, trials, k_min, dps=50):
    """P(X >= k_min), X ~ Binomial(trials, p), summed term by term in high precision."""
    with mpmath.workdps(dps):
        p = mpmath.mpf(p)
        q = 1 - p
        total = mpmath.fsum(
            mpmath.binomial(trials, k) * p**k * q ** (trials - k) for k in range(max(k_min, 0), trials + 1)
        )
        return float(total)


def binomial_tail_exact(p: Fraction, trials: int, k_min: int) -> Fraction:
    return sum(
        (Fraction(math.comb(trials, k)) * p**k * (1 - p) ** (trials - k) for k in range(k_min, trials + 1)),
        Fraction(0),
    )


def betainc_mp(x, a, b, dps=50):
    with mpmath.workdps(dps):
        return float(mpmath.betainc(a, b, 0, x, regularized=True))


def uqcm_formula_exact(N, M, d) -> Fraction:
    return Fraction(M - N + N * (M + d), M * (N + d))


def symmetrizer_by_kron(k, d):
    """Symmetric projector built from explicit basis-vector permutations with np.kron."""
    eye = np.eye(d)
    n = d**k
    proj = np.zeros((n, n))
    for idx in np.ndindex(*([d] * k)):
        src = eye[idx[0]]
        for i in idx[1:]:
            src = np.kron(src, eye[i])
        col = int(np.argmax(src))
        for perm in permutations(range(k)):
            permuted = [idx[p] for p in perm]
            dst = eye[permuted[0]]
            for i in permuted[1:]:
                dst = np.kron(dst, eye[i])
            proj[:, col] += dst
    return proj / math.factorial(k)


def partial_trace_by_loops(mat, d, k, keep):
    """Reduced matrix on the single factor ``keep`` by explicit index summation."""
    out = np.zeros((d, d), dtype=complex)
    for idx in np.ndindex(*([d] * k)):
        for jdx in np.ndindex(*([d] * k)):
            if all(idx[f] == jdx[f] for f in range(k) if f != keep):
                row = np.ravel_multi_index(idx, [d] * k)
                col = np.ravel_multi_index(jdx, [d] * k)
                out[idx[keep], jdx[keep]] += mat[row, col]
    return out
