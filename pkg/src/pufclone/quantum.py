"""Dense finite-dimensional Hilbert-space primitives.

States live on ``(C^d)^{⊗k}``, stored as a flat amplitude vector (pure states)
or a ``d^k x d^k`` matrix (density operators) in C order, factor 0 being the
most significant index. Factor indices are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidDimensionError(ValueError):
    pass


class CapacityError(ValueError):
    """Raised when a dense representation would exceed the configured cap."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances and size caps shared by every module."""

    norm_tol: float = 1e-12
    structural_tol: float = 1e-10
    psd_slack: float = 1e-9
    fidelity_slack: float = 1e-9
    max_state_dim: int = 10**6
    max_operator_dim: int = 4096
    # full eigendecomposition for the PSD check is skipped above this size
    psd_check_max_dim: int = 1024


POLICY = NumericPolicy()


class SeededRng:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Backed by the counter-based Philox bit generator, so distinct streams of
    the same seed are statistically independent and any stream can be
    recreated on any worker.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream_id={self.stream_id})"

    def derive(self, index: int) -> "SeededRng":
        """Child stream; depends only on (seed, stream_id, index)."""
        ss = np.random.SeedSequence((self.stream_id, int(index)), spawn_key=(0x5EED,))
        child_id = int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
        return SeededRng(self.seed, child_id)

    def random(self, size=None):
        return self.generator.random(size)

    def standard_complex_normal(self, shape):
        g = self.generator
        return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2)


def _as_rng(rng) -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(rng)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    local_dim: int
    factors: int = 1

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if self.local_dim < 1 or self.factors < 1:
            raise InvalidDimensionError("local_dim and factors must be positive")
        if amps.size != self.local_dim**self.factors:
            raise InvalidDimensionError(
                f"{amps.size} amplitudes for local_dim={self.local_dim}, factors={self.factors}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > POLICY.norm_tol * max(1.0, np.sqrt(amps.size)):
            raise DomainError(f"state is not normalized (norm={norm!r})")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def from_vector(cls, vec, local_dim=None, factors=1, normalize=True):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        if local_dim is None:
            local_dim = vec.size if factors == 1 else round(vec.size ** (1 / factors))
        return cls(vec, local_dim, factors)

    @classmethod
    def basis(cls, index: int, local_dim: int, factors: int = 1):
        vec = np.zeros(local_dim**factors, dtype=complex)
        vec[index] = 1.0
        return cls(vec, local_dim, factors)

    def projector(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(np.outer(a, a.conj()), self.local_dim, self.factors)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    local_dim: int
    factors: int = 1
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidDimensionError(f"density operator must be square, got {mat.shape}")
        if mat.shape[0] != self.local_dim**self.factors:
            raise InvalidDimensionError(
                f"size {mat.shape[0]} does not match local_dim={self.local_dim}, factors={self.factors}"
            )
        if self.validate:
            check_density(mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, local_dim: int, factors: int = 1):
        n = local_dim**factors
        return cls(np.eye(n, dtype=complex) / n, local_dim, factors)


def check_density(mat: np.ndarray, policy: NumericPolicy = POLICY) -> None:
    """Raise :class:`DomainError` unless ``mat`` is a valid density matrix."""
    herm = np.max(np.abs(mat - mat.conj().T))
    if herm > policy.structural_tol:
        raise DomainError(f"operator is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > policy.structural_tol:
        raise DomainError(f"trace is {tr!r}, expected 1")
    if mat.shape[0] <= policy.psd_check_max_dim:
        lo = np.linalg.eigvalsh((mat + mat.conj().T) / 2).min()
        if lo < -policy.psd_slack:
            raise DomainError(f"operator is not positive semidefinite (min eigenvalue {lo:.3g})")


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidDimensionError(f"unitary must be square, got {mat.shape}")
        dev = unitarity_deviation(mat)
        if dev > POLICY.structural_tol:
            raise DomainError(f"matrix is not unitary (deviation {dev:.3g})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def H(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix.conj().T)

    @classmethod
    def identity(cls, d: int):
        return cls(np.eye(d, dtype=complex))


def unitarity_deviation(mat: np.ndarray) -> float:
    mat = np.asarray(mat)
    return float(np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))))


def haar_state(d: int, rng) -> PureState:
    """Draw a pure state of dimension ``d`` from the unitarily invariant measure."""
    if d < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {d}")
    z = _as_rng(rng).standard_complex_normal(d)
    return PureState(z / np.linalg.norm(z), d)


def haar_states(d: int, count: int, rng) -> np.ndarray:
    """Batch of ``count`` Haar-random unit vectors as rows of a ``(count, d)`` array."""
    if d < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {d}")
    z = _as_rng(rng).standard_complex_normal((count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary(d: int, rng) -> UnitaryMatrix:
    """Haar-distributed ``d x d`` unitary.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved into
    ``Q`` so that the result is exactly Haar rather than QR-convention biased.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {d}")
    z = _as_rng(rng).standard_complex_normal((d, d))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return UnitaryMatrix(q)


def tensor_power(psi: PureState, n: int, policy: NumericPolicy = POLICY) -> PureState:
    if psi.factors != 1:
        raise DomainError("tensor_power expects a single-factor state")
    if n < 1:
        raise DomainError(f"power must be positive, got {n}")
    if psi.dim**n > policy.max_state_dim:
        raise CapacityError(f"dimension {psi.dim}^{n} exceeds cap {policy.max_state_dim}")
    out = psi.amplitudes
    for _ in range(n - 1):
        out = np.kron(out, psi.amplitudes)
    return PureState(out, psi.local_dim, n)


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Reduce ``rho`` onto the factors listed in ``keep`` (0-based, kept in the given order)."""
    keep = [int(i) for i in keep]
    k, d = rho.factors, rho.local_dim
    if not keep or len(set(keep)) != len(keep) or any(i < 0 or i >= k for i in keep):
        raise DomainError(f"invalid factor selection {keep} for {k} factors")
    if len(keep) == k and keep == list(range(k)):
        return rho
    traced = [i for i in range(k) if i not in keep]
    t = rho.matrix.reshape([d] * (2 * k))
    order = keep + traced
    t = t.transpose(order + [k + i for i in order])
    dk, dr = d ** len(keep), d ** len(traced)
    t = t.reshape(dk, dr, dk, dr)
    out = np.einsum("ajbj->ab", t)
    return DensityOperator(out, d, len(keep), validate=rho.validate)


def fidelity(psi: PureState, rho: DensityOperator, policy: NumericPolicy = POLICY) -> float:
    """``<psi|rho|psi>`` for a pure reference state."""
    if psi.dim != rho.dim:
        raise InvalidDimensionError(f"dimension mismatch: {psi.dim} vs {rho.dim}")
    a = psi.amplitudes
    return _clamp_probability(np.vdot(a, rho.matrix @ a).real, policy)


def _clamp_probability(value: float, policy: NumericPolicy = POLICY) -> float:
    if value < -policy.fidelity_slack or value > 1 + policy.fidelity_slack:
        raise DomainError(f"fidelity {value!r} outside [0, 1]; upstream operator is broken")
    return float(min(1.0, max(0.0, value)))


def _apply_local(mat: np.ndarray, vec_or_mat: np.ndarray, d: int, k: int):
    """Contract ``mat`` (d x d) into every factor of the row index."""
    t = vec_or_mat.reshape([d] * k + [-1])
    for axis in range(k):
        t = np.tensordot(mat, t, axes=([1], [axis]))
        t = np.moveaxis(t, 0, axis)
    return t.reshape(vec_or_mat.shape)


def apply_unitary(U: UnitaryMatrix, x):
    """Apply ``U`` to a state.

    If ``U`` matches the full dimension of ``x`` it acts directly; if it
    matches ``x.local_dim`` it acts as ``U^{⊗k}`` on every factor.
    """
    full = U.dim == x.dim
    if not full and U.dim != x.local_dim:
        raise InvalidDimensionError(f"unitary of size {U.dim} cannot act on {x.local_dim}^{x.factors}")
    u = U.matrix
    if isinstance(x, PureState):
        if full:
            out = u @ x.amplitudes
        else:
            out = _apply_local(u, x.amplitudes.reshape(-1, 1), x.local_dim, x.factors).reshape(-1)
        return PureState(out, x.local_dim, x.factors)
    if isinstance(x, DensityOperator):
        if full:
            out = u @ x.matrix @ u.conj().T
        else:
            d, k = x.local_dim, x.factors
            left = _apply_local(u, x.matrix, d, k)
            out = _apply_local(u.conj(), left.T, d, k).T
        return DensityOperator(out, x.local_dim, x.factors, validate=x.validate)
    raise TypeError(f"cannot apply a unitary to {type(x).__name__}")


def measure_accept(rho: DensityOperator, chi: PureState, rng) -> int:
    """Projective measurement ``{|chi><chi|, 1 - |chi><chi|}``; returns 1 on the first outcome."""
    p = fidelity(chi, rho)
    return int(_as_rng(rng).random() < p)
