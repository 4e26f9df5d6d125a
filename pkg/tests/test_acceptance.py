"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every check runs at its stated tolerance. A criterion that cannot be met is
left red rather than loosened.
"""
import filecmp
import math
import subprocess
import sys
import time

import numpy as np

from _report import record
from oracles import binomial_tail_mp, uqcm_formula_exact
from pufclone.bounds import (
    acceptance_threshold,
    est_fidelity,
    monotonicity_report,
    poisson_avg_bound,
    pqcm_fidelity_1to2,
    reg_inc_beta,
    total_false_accept,
    uqcm_fidelity,
)
from pufclone.cloning import CloneParams, avg_clone_fidelity_mc
from pufclone.protocol import PhotonSource, ProtocolParams, ProverStrategy, PufRegistry, enroll, estimate_rates
from pufclone.quantum import SeededRng

# the universal cloner is state independent, so the sample spread is pure
# round-off; this floor stands in for a zero standard error
ROUNDOFF = 1e-12


def test_criterion_01_oracle_matches_cloning_bound():
    configs = [(n, m, d) for n in (1, 2) for m in (2, 3, 4) for d in (2, 3) if n <= m]
    assert len(configs) == 12
    start = time.perf_counter()
    worst = 0.0
    failures = []
    for i, (n, m, d) in enumerate(configs):
        mean, se = avg_clone_fidelity_mc(CloneParams(n, m, d), 10_000, SeededRng(101, i))
        target = float(uqcm_formula_exact(n, m, d))
        gap = abs(mean - target)
        worst = max(worst, gap)
        if gap > 3 * se + ROUNDOFF:
            failures.append((n, m, d, mean, se))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    record(1, ok, f"12 configs x 1e4 Haar samples, max |mean - formula| = {worst:.2e}, {elapsed:.1f} s")
    assert ok, failures


def test_criterion_02_reported_points():
    low = uqcm_fidelity(1, 100, 50)
    high = uqcm_fidelity(200, 2000, 100)
    ok = abs(low - 0.048824) <= 1e-6 and low < 0.05 and abs(high - 0.7030) <= 1e-4 and high >= 0.7
    record(2, ok, f"F(1,100,50) = {low:.7f}, F(200,2000,100) = {high:.5f}")
    assert ok


def test_criterion_03_cloning_beats_estimation_everywhere():
    n, m, d = np.meshgrid(np.arange(1, 101), np.arange(1, 201), np.arange(2, 201), indexing="ij")
    mask = m > n
    n, m, d = n[mask], m[mask], d[mask]
    gap = uqcm_fidelity(n, m, d) - est_fidelity(n, d)
    violations = int(np.count_nonzero(gap <= 0))
    record(3, violations == 0, f"{gap.size} grid points, {violations} violations, min gap {gap.min():.3e}")
    assert violations == 0


def test_criterion_04_many_clones_reach_estimation():
    worst = max(abs(uqcm_fidelity(n, 10**6, d) - (n + 1) / (n + d)) for n in (1, 5, 50) for d in (2, 100, 1100))
    ok = worst < 1e-4
    record(4, ok, f"max |F(N,1e6,d) - (N+1)/(N+d)| = {worst:.3e}")
    assert ok


def test_criterion_05_large_dimension_limit():
    rows = []
    for n, m in ((1, 2), (10, 100), (230, 2000)):
        rel = abs(uqcm_fidelity(n, m, 10**9) - n / m) / (n / m)
        rows.append((n, m, rel))
    ok = all(rel < 1e-6 for _, _, rel in rows)
    detail = ", ".join(f"({n},{m}): {rel:.3e}" for n, m, rel in rows)
    record(5, ok, f"relative gap to N/M at d=1e9: {detail}")
    assert ok, rows


def test_criterion_06_phase_covariant_dominance():
    d = np.arange(2, 10**4 + 1)
    gap = pqcm_fidelity_1to2(d) - (d + 3) / (2 * (d + 1))
    at_two = float(pqcm_fidelity_1to2(2))
    ok = bool(np.all(gap > 0)) and abs(at_two - 0.8535534) <= 1e-6
    record(6, ok, f"min gap {gap.min():.3e} over d=2..1e4, value at d=2 = {at_two:.7f}")
    assert ok


def test_criterion_07_incomplete_beta_matches_binomial_sum():
    worst = 0.0
    count = 0
    for total in (20, 230, 1000):
        ps = np.linspace(0.05, 0.95, 10) if total == 1000 else np.linspace(0.1, 0.9, 5)
        eps = np.linspace(0.0, 0.45, 10) if total == 1000 else np.linspace(0.05, 0.45, 5)
        for p in ps:
            for e in eps:
                k = acceptance_threshold(total, float(e))
                direct = binomial_tail_mp(float(p), total, k)
                worst = max(worst, abs(reg_inc_beta(float(p), k, total - k + 1) - direct))
                worst = max(worst, abs(total_false_accept(float(p), 1, total, float(e)) - direct))
                count += 1
    sym = 0.0
    g = np.random.default_rng(7)
    for x, a, b in zip(g.uniform(0, 1, 200), g.uniform(0.5, 500, 200), g.uniform(0.5, 500, 200)):
        x = 1 - (1 - x)  # exact complement pair
        sym = max(sym, abs(reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) - 1))
    ok = count >= 100 and worst <= 1e-10 and sym <= 1e-12
    record(7, ok, f"{count} (p, eps) points, max |beta - sum| = {worst:.2e}, symmetry error {sym:.2e}")
    assert ok


def test_criterion_08_photon_average_below_jensen():
    worst = -math.inf
    for lam in (0.5, 2, 50, 230):
        for m in (10, 2000):
            for d in (4, 1100):
                exact, jensen = poisson_avg_bound(lam, m, d)
                worst = max(worst, exact - jensen)
    fixed = 0.0
    for n in (1, 5, 10):
        for m in (10, 2000):
            for d in (4, 1100):
                exact, jensen = poisson_avg_bound(n, m, d, source="fixed")
                fixed = max(fixed, abs(exact - jensen))
    ok = worst <= 1e-12 and fixed <= 1e-12
    record(8, ok, f"max (exact - jensen) = {worst:.3e}, fixed-source |exact - jensen| = {fixed:.1e}")
    assert ok


def test_criterion_09_protocol_end_to_end():
    registry = PufRegistry()
    params = ProtocolParams(20, 0.25)

    puf = enroll(4, SeededRng(900), registry)
    honest = estimate_rates(puf, ProverStrategy("honest"), params, 10_000, SeededRng(901))

    puf16 = enroll(16, SeededRng(902), registry)
    forged = estimate_rates(puf16, ProverStrategy("random_key"), params, 2_000, SeededRng(903))
    key_z = (forged.photon_pass_rate - 1 / 16) / forged.photon_pass_std_error

    puf2 = enroll(2, SeededRng(904), registry)
    clone = estimate_rates(puf2, ProverStrategy("uqcm_attack", 2), params, 10_000, SeededRng(905))
    predicted = total_false_accept(5 / 6, 1, 20, 0.25)
    clone_z = (clone.accept_rate - predicted) / math.sqrt(predicted * (1 - predicted) / clone.trials)

    ok = honest.accept_rate == 1.0 and abs(key_z) < 3 and abs(clone_z) < 3
    record(9, ok, f"honest accept {honest.accept_rate}, random-key rate {forged.photon_pass_rate:.5f} "
                  f"(z={key_z:+.2f}), cloner accept {clone.accept_rate:.4f} vs {predicted:.4f} (z={clone_z:+.2f})")
    assert ok


def test_criterion_10_monotone_directions():
    n_grid = range(1, 11)
    m_grid = [10, 15, 20, 30, 50, 80, 120, 200, 500, 1000]
    d_grid = [2, 3, 5, 8, 13, 21, 50, 100, 500, 1100]
    p_grid = np.linspace(0.01, 0.99, 100)
    violations = monotonicity_report(n_grid, m_grid, d_grid, p_grid)
    ip = [reg_inc_beta(p, 16, 5) for p in p_grid]
    beta_bad = sum(1 for a, b in zip(ip, ip[1:]) if not b > a)
    ok = not violations and beta_bad == 0
    record(10, ok, f"10x10x10 grid + 100-point p grid: {len(violations)} bound violations, "
                   f"{beta_bad} I_p violations")
    assert ok, violations[:5]


CLI_RUNS = {
    "bounds": ["bounds", "--preset", "fig2a"],
    "sweep": ["sweep", "--source", "poisson:230", "--clones", "10,2000", "--dim", "4,1100", "--rounds", "20",
              "--epsilon", "0.25"],
    "simulate": ["simulate", "--clones", "2,3", "--dim", "2,3", "--rounds", "20", "--epsilon", "0.25",
                 "--trials", "300", "--seed", "11"],
    "verify-cloner": ["verify-cloner", "--n", "1,2", "--clones", "2:4", "--dim", "2,3", "--samples", "200",
                      "--seed", "11"],
}


def test_criterion_11_cli_output_is_reproducible(tmp_path):
    differing = []
    for name, argv in CLI_RUNS.items():
        for fmt in ("csv", "json"):
            paths = []
            for attempt in range(2):
                path = tmp_path / f"{name}-{fmt}-{attempt}.out"
                proc = subprocess.run([sys.executable, "-m", "pufclone", *argv, "--format", fmt, "--out", str(path)],
                                      capture_output=True, text=True, check=False)
                assert proc.returncode == 0, proc.stderr
                paths.append(path)
            if not filecmp.cmp(paths[0], paths[1], shallow=False) or paths[0].stat().st_size == 0:
                differing.append(f"{name}/{fmt}")
    ok = not differing
    record(11, ok, f"4 commands x 2 formats run twice in fresh processes, differing: {differing or 'none'}")
    assert ok
