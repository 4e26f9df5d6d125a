"""
Simulating enrollment and verification
======================================

Enroll a random PUF, then let several provers try to pass 20-round
verification sessions. The cloning prover's empirical acceptance is set
against its binomial prediction.
"""

import math

from pufclone import (
    PhotonSource,
    ProtocolParams,
    ProverStrategy,
    PufRegistry,
    SeededRng,
    enroll,
    estimate_rates,
    run_verification,
    total_false_accept,
)

registry = PufRegistry()
puf = enroll(2, SeededRng(7), registry)
print("enrolled", puf.identity)

params = ProtocolParams(m_rounds=20, epsilon=0.25)

# one session, round by round
t = run_verification(puf, ProverStrategy("uqcm_attack", 2, "exact"), params, SeededRng(8), keep_rounds=True)
print(f"single session: n1={t.n1} n2={t.n2} -> {t.decision.value}")

provers = {
    "honest": ProverStrategy("honest"),
    "random key": ProverStrategy("random_key"),
    "estimate": ProverStrategy("estimation_attack"),
    "clone 1->2": ProverStrategy("uqcm_attack", 2),
}
for name, prover in provers.items():
    est = estimate_rates(puf, prover, params, 2000, SeededRng(9))
    print(f"{name:11s} accept {est.accept_rate:.4f}  per-photon pass {est.photon_pass_rate:.4f}")

predicted = total_false_accept(5 / 6, 1, 20, 0.25)
est = estimate_rates(puf, provers["clone 1->2"], params, 4000, SeededRng(10))
z = (est.accept_rate - predicted) / math.sqrt(predicted * (1 - predicted) / est.trials)
print(f"cloner: simulated {est.accept_rate:.4f}, predicted {predicted:.4f}, z = {z:+.2f}")

# lossy detection with a Poisson source; nothing detected means abort
lossy = ProtocolParams(20, 0.25, eta=0.5, source=PhotonSource.poisson(2.0))
est = estimate_rates(puf, provers["honest"], lossy, 1000, SeededRng(11))
print(f"honest over a lossy channel: accept {est.accept_rate:.3f}, abort {est.abort_rate:.3f}")
