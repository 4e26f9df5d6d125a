"""Monte Carlo model of PUF enrollment and quantum-challenge verification.

A PUF is reduced to its reflection unitary ``R``. In every verification round
the verifier draws a Haar-random challenge ``psi``, sends a pulse of ``N``
photons in that state, and projects every detected returned photon onto
``R psi``. Counters work at photon granularity: ``n1`` counts detected
photons and ``n2`` those projecting onto the expected response.
"""
from __future__ import annotations

import enum
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from . import bounds
from .cloning import CloneParams, single_clone_state, uqcm_clone
from .quantum import (
    POLICY,
    CapacityError,
    DensityOperator,
    DomainError,
    NumericPolicy,
    PureState,
    SeededRng,
    UnitaryMatrix,
    apply_unitary,
    fidelity,
    haar_state,
    haar_unitary,
    partial_trace,
)


# -- enrollment --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PufRecord:
    identity: str
    reflection: UnitaryMatrix

    @property
    def d(self) -> int:
        return self.reflection.dim


class PufRegistry:
    """In-memory challenge-response database keyed by identity code."""

    def __init__(self):
        self._records: dict[str, PufRecord] = {}

    def __len__(self):
        return len(self._records)

    def __contains__(self, identity):
        return identity in self._records

    def add(self, record: PufRecord) -> None:
        if record.identity in self._records:
            raise KeyError(f"identity {record.identity!r} is already enrolled")
        self._records[record.identity] = record

    def lookup(self, identity: str) -> PufRecord:
        try:
            return self._records[identity]
        except KeyError:
            raise KeyError(f"no PUF enrolled under {identity!r}") from None


REGISTRY = PufRegistry()


def enroll(d: int, rng, registry: PufRegistry | None = None) -> PufRecord:
    """Fabricate a PUF with a Haar-random reflection matrix and register it."""
    registry = REGISTRY if registry is None else registry
    rng = rng if isinstance(rng, SeededRng) else SeededRng(rng)
    reflection = haar_unitary(d, rng)
    while True:
        identity = "puf-" + rng.generator.bytes(8).hex()
        if identity not in registry:
            break
    record = PufRecord(identity, reflection)
    registry.add(record)
    return record


# -- parameters --------------------------------------------------------------


@dataclass(frozen=True)
class PhotonSource:
    """Photons per pulse: a fixed count or Poisson with the given mean."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "fixed":
            if self.value != int(self.value) or self.value < 1:
                raise DomainError(f"fixed source needs a positive integer, got {self.value}")
        elif self.kind == "poisson":
            if not self.value > 0:
                raise DomainError(f"poisson mean must be positive, got {self.value}")
        else:
            raise DomainError(f"unknown photon source {self.kind!r}")

    @classmethod
    def fixed(cls, n: int):
        return cls("fixed", int(n))

    @classmethod
    def poisson(cls, mean: float):
        return cls("poisson", float(mean))

    @classmethod
    def parse(cls, text: str):
        """Parse ``fixed:N`` or ``poisson:LAMBDA``."""
        kind, sep, value = text.partition(":")
        if not sep:
            raise DomainError(f"photon source must look like fixed:N or poisson:LAMBDA, got {text!r}")
        kind = kind.strip().lower()
        return cls.fixed(int(value)) if kind == "fixed" else cls(kind, float(value))

    @property
    def mean(self) -> float:
        return float(self.value)

    def draw(self, rng: SeededRng) -> int:
        if self.kind == "fixed":
            return int(self.value)
        return int(rng.generator.poisson(self.value))

    def __str__(self):
        value = int(self.value) if self.kind == "fixed" else self.value
        return f"{self.kind}:{value}"


@dataclass(frozen=True)
class ProtocolParams:
    m_rounds: int
    epsilon: float
    eta: float = 1.0
    source: PhotonSource = field(default_factory=lambda: PhotonSource.fixed(1))
    noise_level: float = 1e-3
    # "redraw": fresh challenge every round; "reuse": one challenge for all rounds
    challenge_mode: str = "redraw"
    seed: int = 0

    def __post_init__(self):
        if self.m_rounds < 1:
            raise DomainError(f"need at least one round, got {self.m_rounds}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.noise_level < 1.0:
            raise DomainError(f"noise level must lie in [0, 1), got {self.noise_level}")
        if self.challenge_mode not in ("redraw", "reuse"):
            raise DomainError(f"unknown challenge mode {self.challenge_mode!r}")


class Strategy(str, enum.Enum):
    HONEST = "honest"
    RANDOM_KEY = "random_key"
    ESTIMATION = "estimation_attack"
    UQCM = "uqcm_attack"


@dataclass(frozen=True)
class ProverStrategy:
    """Who answers the challenges.

    ``honest`` holds the PUF. ``random_key`` holds an unrelated PUF.
    ``estimation_attack`` measures the pulse and resends its best guess.
    ``uqcm_attack`` clones the pulse N -> ``m_clones`` with the optimal
    universal cloner, passes N clones through the (public) ``R`` and returns
    them; ``mode`` selects the explicit cloner (``exact``) or its closed-form
    per-photon rate (``analytic``).
    """

    kind: Strategy
    m_clones: int | None = None
    mode: str = "analytic"

    def __post_init__(self):
        object.__setattr__(self, "kind", Strategy(self.kind))
        if self.mode not in ("analytic", "exact"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.kind is Strategy.UQCM and (self.m_clones is None or self.m_clones < 1):
            raise DomainError("the cloning attack needs m_clones >= 1")

    def check_capacity(self, d: int, policy: NumericPolicy = POLICY) -> None:
        if self.kind is Strategy.UQCM and self.mode == "exact":
            if d**self.m_clones > policy.max_operator_dim:
                raise CapacityError(
                    f"exact cloning needs {d}^{self.m_clones} <= {policy.max_operator_dim}"
                )


@dataclass(frozen=True, eq=False)
class ProverResponse:
    """What comes back for one pulse.

    Either an explicit single-photon ``state`` (every returned photon has this
    marginal) or, for rate-level strategies, the per-photon ``rate`` of
    projecting onto the expected response.
    """

    photons: int
    state: PureState | DensityOperator | None = None
    rate: float | None = None


def prover_respond(strategy: ProverStrategy, challenge: PureState, n_photons: int,
                   knowledge: UnitaryMatrix | None, policy: NumericPolicy = POLICY) -> ProverResponse:
    """Prover's answer to ``challenge^{⊗n_photons}``.

    ``knowledge`` is the unitary the prover can apply: the real ``R`` for the
    honest prover and the cloning attacker, an unrelated unitary for
    ``random_key``; unused by the estimation attack.
    """
    if n_photons == 0:
        return ProverResponse(0, rate=0.0)
    d = challenge.dim
    kind = strategy.kind
    if kind in (Strategy.HONEST, Strategy.RANDOM_KEY):
        return ProverResponse(n_photons, state=apply_unitary(knowledge, challenge))
    if kind is Strategy.ESTIMATION:
        return ProverResponse(n_photons, rate=bounds.est_fidelity(n_photons, d))
    # cloning attack
    m = strategy.m_clones
    if n_photons >= m:
        # no cloning needed; forward the originals
        if strategy.mode == "analytic":
            return ProverResponse(n_photons, rate=1.0)
        return ProverResponse(n_photons, state=apply_unitary(knowledge, challenge))
    if strategy.mode == "analytic":
        return ProverResponse(n_photons, rate=bounds.uqcm_fidelity(n_photons, m, d))
    strategy.check_capacity(d, policy)
    clones = uqcm_clone(challenge, CloneParams(n_photons, m, d), policy)
    kept = partial_trace(clones, range(n_photons))
    marginal = single_clone_state(kept, policy)
    return ProverResponse(n_photons, state=apply_unitary(knowledge, marginal))


def response_rate(response: ProverResponse, expected: PureState) -> float:
    """Per-photon probability of the outcome ``|expected><expected|``."""
    if response.rate is not None:
        return float(response.rate)
    if isinstance(response.state, PureState):
        return float(min(1.0, abs(np.vdot(expected.amplitudes, response.state.amplitudes)) ** 2))
    return fidelity(expected, response.state)


# -- verification ------------------------------------------------------------


class Decision(str, enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    ABORT_NOISE = "abort_noise"


@dataclass(frozen=True)
class RoundDetail:
    photons: int
    detected: int
    passed: int
    rate: float


@dataclass(frozen=True)
class VerificationTranscript:
    n1: int
    n2: int
    rounds: int
    emitted: int
    decision: Decision
    per_round: tuple = ()

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


def _detection_distribution(params: ProtocolParams):
    if params.source.kind == "fixed":
        return stats.binom(int(params.source.value) * params.m_rounds, params.eta)
    return stats.poisson(params.eta * params.source.mean * params.m_rounds)


def noise_p_value(n1: int, params: ProtocolParams) -> float:
    """Two-sided (doubled smaller tail) p-value of the detection count ``n1``.

    Fixed sources give ``n1 ~ Binomial(N m, eta)``; Poisson sources give
    ``n1 ~ Poisson(eta * mean * m)``.
    """
    dist = _detection_distribution(params)
    return float(min(1.0, 2.0 * min(dist.cdf(n1), dist.sf(n1 - 1))))


@lru_cache(maxsize=64)
def _consistent_window(params: ProtocolParams) -> tuple[int, int]:
    """Inclusive ``n1`` range whose p-value reaches the noise level."""
    if params.noise_level <= 0:
        return (0, sys.maxsize)
    dist = _detection_distribution(params)
    if params.source.kind == "poisson":
        # p-values only shrink past this point, so nothing above it can pass
        hi = int(dist.isf(params.noise_level / 4)) + 2
    else:
        hi = int(dist.support()[1])
    ks = np.arange(0, hi + 1)
    pvals = np.minimum(1.0, 2.0 * np.minimum(dist.cdf(ks), dist.sf(ks - 1)))
    ok = np.flatnonzero(pvals >= params.noise_level)
    if ok.size == 0:
        return (1, 0)
    return int(ok[0]), int(ok[-1])


def decide(n1: int, n2: int, params: ProtocolParams) -> Decision:
    lo, hi = _consistent_window(params)
    if n1 == 0 or not lo <= n1 <= hi:
        return Decision.ABORT_NOISE
    if n2 >= bounds.acceptance_threshold(n1, params.epsilon):
        return Decision.ACCEPT
    return Decision.REJECT


def run_verification(puf: PufRecord, prover: ProverStrategy, params: ProtocolParams,
                     rng=None, keep_rounds: bool = False,
                     policy: NumericPolicy = POLICY) -> VerificationTranscript:
    """One complete verification session of ``m_rounds`` rounds."""
    rng = SeededRng(params.seed) if rng is None else rng
    rng = rng if isinstance(rng, SeededRng) else SeededRng(rng)
    d = puf.d
    prover.check_capacity(d, policy)
    if prover.kind is Strategy.RANDOM_KEY:
        knowledge = haar_unitary(d, rng)
    elif prover.kind is Strategy.ESTIMATION:
        knowledge = None
    else:
        knowledge = puf.reflection
    gen = rng.generator
    fixed_challenge = haar_state(d, rng) if params.challenge_mode == "reuse" else None

    n1 = n2 = emitted = 0
    details = []
    for _ in range(params.m_rounds):
        psi = fixed_challenge if fixed_challenge is not None else haar_state(d, rng)
        photons = params.source.draw(rng)
        emitted += photons
        response = prover_respond(prover, psi, photons, knowledge, policy)
        if response.photons == 0:
            if keep_rounds:
                details.append(RoundDetail(0, 0, 0, 0.0))
            continue
        if response.rate is not None:
            rate = float(response.rate)
        else:
            rate = response_rate(response, apply_unitary(puf.reflection, psi))
        detected = int(gen.binomial(response.photons, params.eta))
        passed = int(gen.binomial(detected, rate))
        n1 += detected
        n2 += passed
        if keep_rounds:
            details.append(RoundDetail(photons, detected, passed, rate))
    return VerificationTranscript(n1, n2, params.m_rounds, emitted, decide(n1, n2, params), tuple(details))


@dataclass(frozen=True)
class RateEstimate:
    trials: int
    accept_rate: float
    accept_std_error: float
    reject_rate: float
    abort_rate: float
    mean_n1: float
    mean_n2: float
    n1_std_error: float
    n2_std_error: float
    photon_pass_rate: float
    photon_pass_std_error: float


def _run_block(args):
    puf, prover, params, seed, stream_id, indices = args
    base = SeededRng(seed, stream_id)
    out = np.empty((len(indices), 3), dtype=np.int64)
    for row, i in enumerate(indices):
        t = run_verification(puf, prover, params, base.derive(i))
        out[row] = (t.n1, t.n2, list(Decision).index(t.decision))
    return out


def estimate_rates(puf: PufRecord, prover: ProverStrategy, params: ProtocolParams,
                   trials: int, rng=None, workers: int = 1) -> RateEstimate:
    """Aggregate ``trials`` independent verifications.

    Trial ``i`` always uses stream ``rng.derive(i)``, so the result does not
    depend on ``workers``. The per-photon pass rate is a ratio estimator
    over trials, with its standard error computed from per-trial residuals
    (photons within one trial share a challenge and a key).
    """
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    rng = SeededRng(params.seed) if rng is None else rng
    rng = rng if isinstance(rng, SeededRng) else SeededRng(rng)
    indices = np.arange(trials)
    if workers <= 1:
        data = _run_block((puf, prover, params, rng.seed, rng.stream_id, indices))
    else:
        blocks = np.array_split(indices, workers)
        jobs = [(puf, prover, params, rng.seed, rng.stream_id, b) for b in blocks if b.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            data = np.concatenate(list(pool.map(_run_block, jobs)))
    n1, n2, code = data[:, 0].astype(float), data[:, 1].astype(float), data[:, 2]
    decisions = list(Decision)
    accept = code == decisions.index(Decision.ACCEPT)
    p_acc = float(accept.mean())

    def sem(x):
        return float(x.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")

    total_n1 = n1.sum()
    if total_n1 > 0:
        ratio = float(n2.sum() / total_n1)
        resid = n2 - ratio * n1
        ratio_se = float(np.sqrt((resid**2).sum() / (trials * max(trials - 1, 1))) / n1.mean())
    else:
        ratio, ratio_se = float("nan"), float("nan")
    return RateEstimate(
        trials=trials,
        accept_rate=p_acc,
        accept_std_error=math.sqrt(p_acc * (1 - p_acc) / trials),
        reject_rate=float((code == decisions.index(Decision.REJECT)).mean()),
        abort_rate=float((code == decisions.index(Decision.ABORT_NOISE)).mean()),
        mean_n1=float(n1.mean()),
        mean_n2=float(n2.mean()),
        n1_std_error=sem(n1),
        n2_std_error=sem(n2),
        photon_pass_rate=ratio,
        photon_pass_std_error=ratio_se,
    )
