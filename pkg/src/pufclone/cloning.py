"""Explicit optimal universal N -> M qudit cloner.

The channel is the symmetric-subspace construction

    L(sigma) = d[N] / d[M] * P_M (sigma ⊗ 1^{⊗(M-N)}) P_M,

with ``P_M`` the projector onto the symmetric subspace of ``(C^d)^{⊗M}`` and
``d[k] = C(d+k-1, k)`` its dimension. Everything is dense, so it is only
usable while ``d**M`` stays under the operator cap; it exists to check the
closed-form fidelity in :mod:`pufclone.bounds` by brute force.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .quantum import (
    POLICY,
    CapacityError,
    DensityOperator,
    DomainError,
    NumericPolicy,
    PureState,
    fidelity,
    haar_states,
    partial_trace,
    tensor_power,
)

_INT64_MAX = 2**63 - 1


class SymmetryViolationError(RuntimeError):
    """Single-clone marginals of a supposedly symmetric output differ."""


@dataclass(frozen=True)
class CloneParams:
    n_in: int
    m_out: int
    d: int

    def __post_init__(self):
        if not 1 <= self.n_in <= self.m_out:
            raise DomainError(f"need 1 <= N <= M, got N={self.n_in}, M={self.m_out}")
        if self.d < 2:
            raise DomainError(f"need d >= 2, got {self.d}")


@dataclass(frozen=True, eq=False)
class SymmetricProjector:
    k: int
    d: int
    matrix: np.ndarray


def sym_dim(k: int, d: int) -> int:
    """Dimension of the symmetric subspace of ``(C^d)^{⊗k}``."""
    if k < 0 or d < 2:
        raise DomainError(f"need k >= 0 and d >= 2, got k={k}, d={d}")
    n = math.comb(k + d - 1, k)
    if n > _INT64_MAX:
        raise CapacityError(f"sym_dim({k}, {d}) overflows 64 bits")
    return n


def permutation_indices(perm, d: int) -> np.ndarray:
    """Index map of the operator that moves tensor factor ``i`` to slot ``perm[i]``.

    Returns ``idx`` with ``P_perm v = v[idx]``.
    """
    k = len(perm)
    grid = np.arange(d**k).reshape([d] * k)
    # destination axis perm[i] receives source axis i
    inverse = np.argsort(perm)
    return np.transpose(grid, inverse).reshape(-1)


def permutation_operator(perm, d: int) -> np.ndarray:
    idx = permutation_indices(perm, d)
    n = idx.size
    op = np.zeros((n, n))
    op[np.arange(n), idx] = 1.0
    return op


def sym_projector(k: int, d: int, policy: NumericPolicy = POLICY) -> SymmetricProjector:
    """Average of all ``k!`` factor-permutation operators."""
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    if d**k > policy.max_operator_dim:
        raise CapacityError(f"dimension {d}^{k} exceeds cap {policy.max_operator_dim}")
    return SymmetricProjector(k, d, _sym_projector_matrix(k, d))


@lru_cache(maxsize=32)
def _sym_projector_matrix(k: int, d: int) -> np.ndarray:
    n = d**k
    acc = np.zeros((n, n))
    cols = np.arange(n)
    for perm in permutations(range(k)):
        np.add.at(acc, (cols, permutation_indices(perm, d)), 1.0)
    acc /= math.factorial(k)
    acc.setflags(write=False)
    return acc


def uqcm_clone(psi: PureState, params: CloneParams, policy: NumericPolicy = POLICY) -> DensityOperator:
    """Output of the optimal universal cloner on ``psi^{⊗N}``, an ``M``-factor operator."""
    if psi.factors != 1 or psi.local_dim != params.d:
        raise DomainError("uqcm_clone expects a single-factor state of the cloner's dimension")
    n, m, d = params.n_in, params.m_out, params.d
    proj = sym_projector(m, d, policy).matrix
    originals = tensor_power(psi, n, policy).amplitudes
    blank = d ** (m - n)
    # sigma ⊗ 1 = K K^dagger with K = |psi^N> ⊗ 1, so L(sigma) = c (P K)(P K)^dagger
    k_mat = np.kron(originals[:, None], np.eye(blank))
    a_mat = proj @ k_mat
    rho = (sym_dim(n, d) / sym_dim(m, d)) * (a_mat @ a_mat.conj().T)
    rho = (rho + rho.conj().T) / 2
    tr = np.trace(rho).real
    if abs(tr - 1.0) > policy.psd_slack:
        raise RuntimeError(f"cloner output has trace {tr!r}; construction is broken")
    return DensityOperator(rho, d, m)


def single_clone_state(rho_m: DensityOperator, policy: NumericPolicy = POLICY) -> DensityOperator:
    """Reduced state of one clone, after checking every clone has the same marginal."""
    if rho_m.factors == 1:
        return rho_m
    first = partial_trace(rho_m, [0])
    for j in range(1, rho_m.factors):
        other = partial_trace(rho_m, [j])
        dev = np.max(np.abs(first.matrix - other.matrix))
        if dev > policy.psd_slack:
            raise SymmetryViolationError(f"marginal {j} differs from marginal 0 by {dev:.3g}")
    return first


def clone_fidelity(psi: PureState, params: CloneParams, policy: NumericPolicy = POLICY) -> float:
    """``<psi| L^s(psi^{⊗N}) |psi>`` for one input state."""
    return fidelity(psi, single_clone_state(uqcm_clone(psi, params, policy), policy), policy)


def avg_clone_fidelity_mc(params: CloneParams, samples: int, rng, policy: NumericPolicy = POLICY):
    """Monte Carlo average of the single-clone fidelity over Haar-random inputs.

    Returns ``(mean, std_error)``.
    """
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    if params.d**params.m_out > policy.max_operator_dim:
        raise CapacityError(
            f"dimension {params.d}^{params.m_out} exceeds cap {policy.max_operator_dim}"
        )
    vecs = haar_states(params.d, samples, rng)
    vals = np.empty(samples)
    for i, v in enumerate(vecs):
        vals[i] = clone_fidelity(PureState(v, params.d), params, policy)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))
