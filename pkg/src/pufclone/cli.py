"""Batch front-end: bound tables, cloner verification and protocol simulation.

Every command writes a flat table (CSV with header, or a JSON array of
objects) in which each row repeats its full parameter tuple.

Exit status: 0 success, 2 usage error, 3 statistical verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from . import bounds
from .cloning import CloneParams, avg_clone_fidelity_mc
from .protocol import (
    PhotonSource,
    ProtocolParams,
    ProverStrategy,
    PufRegistry,
    Strategy,
    enroll,
    estimate_rates,
)
from .quantum import CapacityError, DomainError, SeededRng

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY_FAILED = 3

# |z| above this marks an oracle/formula disagreement
Z_FAIL = 4.0
# standard errors below float round-off are floored here before forming z
SE_FLOOR = 1e-12

PRESETS = {
    "fig2a": {"n": [1], "clones": list(range(1, 201)), "dim": [2, 5, 10, 50, 100], "sweep": "m_clones"},
    "fig2b": {"n": list(range(1, 2001)), "clones": [2000], "dim": [10, 50, 100, 500, 1000, 1100], "sweep": "n"},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: list | None = None
    clones: list | None = None
    dim: list | None = None
    rounds: int = 1
    epsilon: float = 0.0
    eta: float = 1.0
    source: PhotonSource | None = None
    trials: int = 1000
    samples: int = 10000
    seed: int = 0
    fmt: str = "csv"
    out: str | None = None
    preset: str | None = None
    prover: str = "uqcm_attack"
    mode: str = "analytic"
    noise_level: float = 1e-3
    challenge_mode: str = "redraw"
    workers: int = 1


def parse_range(text: str) -> list[int]:
    """``start:stop:step`` (stop inclusive, step optional) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"range {text!r} is empty")
    return values


def _source(text: str) -> PhotonSource:
    try:
        return PhotonSource.parse(text)
    except (DomainError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pufclone", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=["bounds", "sweep", "simulate", "verify-cloner"])
    parser.add_argument("--n", type=parse_range, help="photons per pulse (RANGE)")
    parser.add_argument("--clones", type=parse_range, help="clone count M (RANGE)")
    parser.add_argument("--dim", type=parse_range, help="Hilbert-space dimension d (RANGE)")
    parser.add_argument("--rounds", type=int, default=1)
    parser.add_argument("--epsilon", type=float, default=0.0)
    parser.add_argument("--eta", type=float, default=1.0)
    parser.add_argument("--source", type=_source, help="fixed:N or poisson:LAMBDA")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--samples", type=int, default=10000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--prover", choices=[s.value for s in Strategy], default="uqcm_attack")
    parser.add_argument("--mode", choices=["analytic", "exact"], default="analytic")
    parser.add_argument("--noise-level", type=float, default=1e-3)
    parser.add_argument("--challenge-mode", choices=["redraw", "reuse"], default="redraw")
    parser.add_argument("--workers", type=int, default=1)
    return parser


def _require(cfg: RunConfig, *names):
    missing = [f"--{name}" for name in names if getattr(cfg, name) is None]
    if missing:
        raise UsageError(f"{cfg.command} needs {', '.join(missing)}")


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _z_score(observed: float, expected: float, se: float) -> float:
    diff = observed - expected
    if se < SE_FLOOR:
        return 0.0 if abs(diff) <= SE_FLOOR else math.copysign(math.inf, diff)
    return diff / se


# -- commands ----------------------------------------------------------------


def cmd_bounds(cfg: RunConfig) -> list[dict]:
    sweep = None
    if cfg.preset:
        preset = PRESETS[cfg.preset]
        sweep = preset["sweep"]
        cfg.n = cfg.n or preset["n"]
        cfg.clones = cfg.clones or preset["clones"]
        cfg.dim = cfg.dim or preset["dim"]
    _require(cfg, "n", "clones", "dim")
    rows = []
    for n in cfg.n:
        for m in cfg.clones:
            for d in cfg.dim:
                if n < 1 or n > m or d < 2:
                    continue
                rows.append({
                    "n": n,
                    "m_clones": m,
                    "d": d,
                    "uqcm_fidelity": bounds.uqcm_fidelity(n, m, d),
                    "est_fidelity": bounds.est_fidelity(n, d),
                    "pqcm_fidelity_1to2": bounds.pqcm_fidelity_1to2(d),
                    "provenance": "analytic",
                })
    if not rows:
        raise UsageError("parameter grid has no point with 1 <= n <= clones and dim >= 2")
    order = [sweep, "d"] if sweep else ["n", "m_clones", "d"]
    order += [k for k in ("n", "m_clones", "d") if k not in order]
    rows.sort(key=lambda r: tuple(r[k] for k in order))
    return rows


def cmd_sweep(cfg: RunConfig) -> list[dict]:
    _require(cfg, "clones", "dim")
    if cfg.n:
        sources = [PhotonSource.fixed(n) for n in cfg.n]
    elif cfg.source is not None:
        sources = [cfg.source]
    else:
        raise UsageError("sweep needs --n or --source")
    if cfg.rounds < 1 or not 0 <= cfg.epsilon <= 1:
        raise UsageError("need --rounds >= 1 and --epsilon in [0, 1]")
    rows = []
    for src in sources:
        for m in cfg.clones:
            for d in cfg.dim:
                if d < 2 or m < 1:
                    continue
                exact, jensen = bounds.poisson_avg_bound(src.mean, m, d, source=src.kind)
                row = {
                    "source": str(src),
                    "n_avg": src.mean,
                    "m_clones": m,
                    "d": d,
                    "rounds": cfg.rounds,
                    "epsilon": cfg.epsilon,
                    "uqcm_per_photon": exact,
                    "jensen_bound": jensen,
                    "est_per_photon": None,
                    "total_false_accept_uqcm": None,
                    "total_false_accept_est": None,
                    "provenance": "analytic",
                }
                if src.kind == "fixed":
                    n = int(src.value)
                    est = bounds.est_fidelity(n, d)
                    row["est_per_photon"] = est
                    row["total_false_accept_uqcm"] = bounds.total_false_accept(exact, n, cfg.rounds, cfg.epsilon)
                    row["total_false_accept_est"] = bounds.total_false_accept(est, n, cfg.rounds, cfg.epsilon)
                rows.append(row)
    if not rows:
        raise UsageError("parameter grid is empty")
    return rows


def cmd_verify_cloner(cfg: RunConfig) -> list[dict]:
    _require(cfg, "n", "clones", "dim")
    if cfg.samples < 100:
        raise UsageError("--samples must be at least 100")
    rows = []
    index = 0
    for n in cfg.n:
        for m in cfg.clones:
            for d in cfg.dim:
                if n < 1 or n > m or d < 2:
                    continue
                row = {"n": n, "m_clones": m, "d": d, "samples": cfg.samples,
                       "analytic": bounds.uqcm_fidelity(n, m, d),
                       "oracle_mean": None, "std_error": None, "z_score": None,
                       "status": "ok", "provenance": "oracle"}
                try:
                    mean, se = avg_clone_fidelity_mc(CloneParams(n, m, d), cfg.samples,
                                                     SeededRng(cfg.seed, index))
                except CapacityError:
                    row["status"] = "capacity_error"
                else:
                    z = _z_score(mean, row["analytic"], se)
                    row.update(oracle_mean=mean, std_error=se, z_score=z,
                               status="ok" if abs(z) <= Z_FAIL else "mismatch")
                rows.append(row)
                index += 1
    if not rows:
        raise UsageError("parameter grid has no point with 1 <= n <= clones and dim >= 2")
    return rows


def _predicted_rate(strategy: ProverStrategy, n: int, d: int) -> float | None:
    kind = strategy.kind
    if kind is Strategy.HONEST:
        return 1.0
    if kind is Strategy.ESTIMATION:
        return bounds.est_fidelity(n, d)
    if kind is Strategy.UQCM:
        return 1.0 if n >= strategy.m_clones else bounds.uqcm_fidelity(n, strategy.m_clones, d)
    return None


def cmd_simulate(cfg: RunConfig) -> list[dict]:
    _require(cfg, "dim")
    source = cfg.source or (PhotonSource.fixed(cfg.n[0]) if cfg.n else PhotonSource.fixed(1))
    if cfg.trials < 1:
        raise UsageError("--trials must be positive")
    clones = cfg.clones if cfg.prover == Strategy.UQCM.value else [None]
    if clones is None:
        raise UsageError("the uqcm_attack prover needs --clones")
    try:
        params = ProtocolParams(cfg.rounds, cfg.epsilon, cfg.eta, source, cfg.noise_level,
                                cfg.challenge_mode, cfg.seed)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    index = 0
    for m in clones:
        for d in cfg.dim:
            row = {"prover": cfg.prover, "mode": cfg.mode, "source": str(source),
                   "m_clones": m, "d": d, "rounds": cfg.rounds, "epsilon": cfg.epsilon,
                   "eta": cfg.eta, "trials": cfg.trials, "seed": cfg.seed}
            try:
                strategy = ProverStrategy(cfg.prover, m, cfg.mode)
                puf = enroll(d, SeededRng(cfg.seed, 2 * index), PufRegistry())
                est = estimate_rates(puf, strategy, params, cfg.trials,
                                     SeededRng(cfg.seed, 2 * index + 1), workers=cfg.workers)
            except (CapacityError, DomainError) as exc:
                row.update(status=type(exc).__name__, accept_rate=None)
                rows.append(row)
                index += 1
                continue
            predicted = z = None
            rate = _predicted_rate(strategy, int(source.value), d) if source.kind == "fixed" else None
            if rate is not None and cfg.eta == 1.0:
                predicted = bounds.total_false_accept(rate, int(source.value), cfg.rounds, cfg.epsilon)
                z = _z_score(est.accept_rate, predicted, math.sqrt(predicted * (1 - predicted) / cfg.trials))
            row.update(
                status="ok",
                accept_rate=est.accept_rate,
                accept_std_error=est.accept_std_error,
                reject_rate=est.reject_rate,
                abort_rate=est.abort_rate,
                mean_n1=est.mean_n1,
                mean_n2=est.mean_n2,
                photon_pass_rate=est.photon_pass_rate,
                photon_pass_std_error=est.photon_pass_std_error,
                predicted_accept=predicted,
                z_score=z,
                provenance="simulation",
            )
            rows.append(row)
            index += 1
    return rows


COMMANDS = {
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "verify-cloner": cmd_verify_cloner,
}


# -- output ------------------------------------------------------------------


def render(rows: list[dict], fmt: str) -> str:
    rows = [{k: _clean(v) for k, v in row.items()} for row in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    fields = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row[k] for k in fields})
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[list[dict], int]:
    rows = COMMANDS[cfg.command](cfg)
    status = EXIT_OK
    if cfg.command == "verify-cloner" and any(r["status"] == "mismatch" for r in rows):
        status = EXIT_VERIFY_FAILED
    return rows, status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        rows, status = run(cfg)
    except UsageError as exc:
        print(f"pufclone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(rows, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
