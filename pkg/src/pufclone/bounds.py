"""Closed-form false-accept bounds and the special functions behind them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .quantum import DomainError, PureState

_INTEGER_SNAP = 1e-9


@dataclass(frozen=True)
class AttackBoundInputs:
    n_photons: int = 1
    m_clones: int = 1
    d: int = 2
    n_avg: float = 1.0
    m_rounds: int = 1
    epsilon: float = 0.0
    p_single: float = 0.0

    def __post_init__(self):
        if self.n_photons < 1 or self.m_clones < 1 or self.m_rounds < 1:
            raise DomainError("photon, clone and round counts must be positive")
        if self.n_photons > self.m_clones:
            raise DomainError(f"need N <= M, got N={self.n_photons}, M={self.m_clones}")
        if self.d < 2 or self.n_avg <= 0:
            raise DomainError("need d >= 2 and a positive mean photon number")
        if not (0 <= self.epsilon <= 1 and 0 <= self.p_single <= 1):
            raise DomainError("epsilon and p_single must lie in [0, 1]")


def _check_fidelity_args(N, M, d):
    N, M, d = np.asarray(N), np.asarray(M), np.asarray(d)
    if np.any(N < 1) or np.any(M < N) or np.any(d < 2):
        raise DomainError("need 1 <= N <= M and d >= 2")
    return N, M, d


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def uqcm_closed_form(N, M, d):
    """``(M - N + N(M + d)) / (M(N + d))`` with no range checks; ``N`` may be real."""
    N, M, d = (np.asarray(v, dtype=float) for v in (N, M, d))
    return _scalar_or_array((M - N + N * (M + d)) / (M * (N + d)))


def uqcm_fidelity(N, M, d):
    """Optimal single-clone fidelity of the universal N -> M qudit cloner.

    This is also the per-photon false-accept probability of the cloning
    attack. Vectorizes over array arguments.
    """
    _check_fidelity_args(N, M, d)
    return uqcm_closed_form(N, M, d)


def est_fidelity(N, d):
    """Optimal per-photon success of measure-and-prepare: ``(N + 1) / (N + d)``."""
    N, d = np.asarray(N, dtype=float), np.asarray(d, dtype=float)
    if np.any(N < 1) or np.any(d < 2):
        raise DomainError("need N >= 1 and d >= 2")
    return _scalar_or_array((N + 1) / (N + d))


def pqcm_fidelity_1to2(d):
    """Optimal 1 -> 2 phase-covariant cloning fidelity for qudits."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 2):
        raise DomainError("need d >= 2")
    return _scalar_or_array(1 / d + (d - 2 + np.sqrt(d * d + 4 * d - 4)) / (4 * d))


@dataclass(frozen=True, eq=False)
class EquatorialState:
    """Odd-dimensional state with equal-modulus amplitudes and free phases.

    Basis labels run over ``-l_d .. l_d`` with ``l_d = (d - 1) / 2``; index 0
    of ``phases`` belongs to ``-l_d``. :attr:`printed_amplitudes` keeps the
    ``1/d`` prefactor as it is usually written; :meth:`to_state` rescales to
    unit norm.
    """

    d: int
    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        object.__setattr__(self, "phases", phases)
        if self.d < 1 or self.d % 2 == 0:
            raise DomainError(f"equatorial states need odd d, got {self.d}")
        if phases.size != self.d:
            raise DomainError(f"expected {self.d} phases, got {phases.size}")

    @property
    def labels(self) -> np.ndarray:
        half = (self.d - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def printed_amplitudes(self) -> np.ndarray:
        return np.exp(1j * self.phases) / self.d

    def to_state(self) -> PureState:
        return PureState(np.exp(1j * self.phases) / np.sqrt(self.d), self.d)


# -- regularized incomplete beta --------------------------------------------

_BETA_EPS = 1e-16
_BETA_TINY = 1e-300
_BETA_MAX_ITER = 20000


def _beta_cf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    dd = 1.0 - qab * x / qap
    if abs(dd) < _BETA_TINY:
        dd = _BETA_TINY
    dd = 1.0 / dd
    h = dd
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        dd = 1.0 + aa * dd
        if abs(dd) < _BETA_TINY:
            dd = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        dd = 1.0 / dd
        h *= dd * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        dd = 1.0 + aa * dd
        if abs(dd) < _BETA_TINY:
            dd = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise RuntimeError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``.

    The continued fraction is evaluated on whichever side of the mean
    ``(a + 1) / (a + b + 2)`` converges fast, using
    ``I_x(a, b) = 1 - I_{1-x}(b, a)`` for the other side.
    """
    x, a, b = float(x), float(a), float(b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if a <= 0 or b <= 0:
        raise DomainError(f"a and b must be positive, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, front * _beta_cf(x, a, b) / a)
    return max(0.0, 1.0 - front * _beta_cf(1.0 - x, b, a) / b)


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binomial_tail(p: float, trials: int, k_min: int) -> float:
    """``P(X >= k_min)`` for ``X ~ Binomial(trials, p)`` by explicit log-space summation."""
    if k_min <= 0:
        return 1.0
    if k_min > trials:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    terms = [math.exp(log_binom(trials, k) + k * lp + (trials - k) * lq) for k in range(k_min, trials + 1)]
    return min(1.0, math.fsum(terms))


def acceptance_threshold(total: int, epsilon: float) -> int:
    """Smallest integer ``k`` with ``k >= (1 - epsilon) * total``.

    Products that land within rounding noise of an integer are snapped to it,
    so ``0.7 * 10`` gives 7, not 8.
    """
    t = total * (1.0 - epsilon)
    r = round(t)
    if abs(t - r) <= _INTEGER_SNAP * max(1.0, total):
        return int(r)
    return int(math.ceil(t))


def total_false_accept(p_single: float, N: int, m: int, epsilon: float) -> float:
    """Probability that at least ``ceil(Nm(1 - epsilon))`` of ``Nm`` photons pass.

    Uses ``I_p(n + 1, Nm - n)`` with ``n = floor(Nm(1 - epsilon))``. When
    ``Nm(1 - epsilon)`` is an integer that beta form starts one count too
    high, so the explicit binomial sum is used instead.
    """
    if not 0.0 <= p_single <= 1.0:
        raise DomainError(f"p_single must lie in [0, 1], got {p_single}")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    total = int(N) * int(m)
    if total < 1:
        raise DomainError("need N * m >= 1")
    k_min = acceptance_threshold(total, epsilon)
    t = total * (1.0 - epsilon)
    n_floor = int(math.floor(t))
    if k_min != n_floor + 1:
        return binomial_tail(p_single, total, k_min)
    return reg_inc_beta(p_single, n_floor + 1, total - n_floor)


def poisson_support(lam: float, tail: float = 1e-12) -> np.ndarray:
    """Photon numbers holding all but ``tail`` of the Poisson(lam) mass."""
    dist = stats.poisson(lam)
    lo = int(dist.ppf(tail / 2))
    hi = int(dist.isf(tail / 2)) + 1
    return np.arange(max(lo, 0), hi + 1)


def poisson_avg_bound(lam: float, M: int, d: int, source: str = "poisson", tail: float = 1e-12):
    """Photon-number-averaged cloning bound and its Jensen upper bound.

    Returns ``(exact, jensen)``. ``exact`` averages the per-photon bound over
    the source distribution, with vacuum pulses contributing 0 and pulses of
    more than ``M`` photons contributing 1 (no cloning needed). ``jensen`` is
    the closed form with ``N`` replaced by the mean, capped at 1.
    ``source="fixed"`` treats ``lam`` as a deterministic photon number.
    """
    if lam <= 0:
        raise DomainError(f"mean photon number must be positive, got {lam}")
    if M < 1 or d < 2:
        raise DomainError("need M >= 1 and d >= 2")
    if source == "fixed":
        if lam != int(lam):
            raise DomainError("fixed source needs an integer photon number")
        ns, weights = np.array([int(lam)]), np.array([1.0])
    elif source == "poisson":
        ns = poisson_support(lam, tail)
        weights = stats.poisson.pmf(ns, lam)
    else:
        raise DomainError(f"unknown photon source {source!r}")
    per_pulse = np.where(ns == 0, 0.0, uqcm_closed_form(np.clip(ns, 1, M), M, d))
    exact = float(math.fsum(weights * per_pulse))
    jensen = min(1.0, uqcm_closed_form(lam, M, d))
    return exact, jensen


# -- monotonicity ------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityViolation:
    quantity: str
    direction: str
    at: tuple
    values: tuple


def monotonicity_report(N_grid, M_grid, d_grid, p_grid, N_p=1, m_p=20, epsilon_p=0.25):
    """Check the expected monotone directions on finite grids.

    The cloning bound should grow with ``N`` and shrink with ``M`` and, when
    ``N < M``, with ``d``;
    the total false-accept probability (at ``N_p``, ``m_p``, ``epsilon_p``)
    should grow with the per-photon rate. Returns the list of violations.
    """
    N_grid, M_grid, d_grid = sorted(set(N_grid)), sorted(set(M_grid)), sorted(set(d_grid))
    violations = []

    def scan(label, direction, points, values):
        for (lo, hi), (v_lo, v_hi) in zip(zip(points, points[1:]), zip(values, values[1:])):
            ok = v_hi > v_lo if direction == "increasing" else v_hi < v_lo
            if not ok:
                violations.append(MonotonicityViolation(label, direction, (lo, hi), (v_lo, v_hi)))

    for M in M_grid:
        for d in d_grid:
            ns = [n for n in N_grid if n <= M]
            scan("uqcm_fidelity vs N", "increasing",
                 [(n, M, d) for n in ns], [uqcm_fidelity(n, M, d) for n in ns])
    for N in N_grid:
        for d in d_grid:
            ms = [m for m in M_grid if m >= N]
            scan("uqcm_fidelity vs M", "decreasing",
                 [(N, m, d) for m in ms], [uqcm_fidelity(N, m, d) for m in ms])
        for M in M_grid:
            # at M == N the bound is identically 1 in d
            if M <= N:
                continue
            scan("uqcm_fidelity vs d", "decreasing",
                 [(N, M, d) for d in d_grid], [uqcm_fidelity(N, M, d) for d in d_grid])
    ps = sorted(set(float(p) for p in p_grid))
    scan("total_false_accept vs p", "increasing",
         [(p,) for p in ps], [total_false_accept(p, N_p, m_p, epsilon_p) for p in ps])
    return violations
