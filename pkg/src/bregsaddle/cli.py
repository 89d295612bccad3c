"""Experiment orchestration CLI: run, certify, oracle, list-instances.

Experiment configs are TOML files:

    instance = "entropy-game-20"      # builtin name or path to .json/.toml
    replications = 20
    seed = 42
    scheme = "uniform"                # or "lipschitz_proportional"
    oracle = "auto"                   # "closed_form" | "high_accuracy_deterministic"
    # M_prime = 1.5                   # linear-certificate knob (default 4||K||/alpha)

    [solver]
    theta = 1                         # 1 -> ergodic regime, 0 -> linear regime
    m = 50
    stages = 64
    # gamma = 0.02                    # default: largest certified step x 0.9
    # unsafe_override = false

Outputs: ``trace.csv`` (one row per replication and stage) and
``summary.json`` (per-stage statistics, certificate echo, seeds, instance
hash).  Both files are byte-deterministic for a fixed config; the wall_ms
column is therefore emitted as 0.0 and real timings go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import OracleMethod, SaddleOracle, find_saddle
from .certificates import (certificate_to_dict, certify_ergodic, certify_linear,
                           suggest_ergodic_gamma, suggest_linear_gamma)
from .errors import ConfigError, DivergenceError, OracleFailure
from .estimator import SamplingMode, make_scheme
from .instances import build_problem, instance_hash, load_instance
from .problem import primal_dual_gap_pair, product_bregman_distance
from .solver import GapTrace, SolverConfig, solve

EXIT_OK = 0
EXIT_CERT_REJECTED = 2
EXIT_DIVERGED = 3
EXIT_BAD_CONFIG = 4

TRACE_HEADER = "replication,stage,gap_pair,ergodic_gap,bregman_dist,bound,wall_ms"


@dataclass
class ExperimentConfig:
    instance: str
    replications: int = 1
    seed: int = 0
    scheme: SamplingMode = SamplingMode.UNIFORM
    oracle: str = "auto"
    M_prime: float | None = None
    theta: int = 1
    gamma: float | None = None
    m: int | None = None
    stages: int = 16
    unsafe_override: bool = False
    output_dir: Path = Path("bregsaddle-out")

    @classmethod
    def from_toml(cls, path: str | Path) -> "ExperimentConfig":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        solver = raw.get("solver", {})
        try:
            cfg = cls(
                instance=raw["instance"],
                replications=int(raw.get("replications", 1)),
                seed=int(raw.get("seed", 0)),
                scheme=SamplingMode(raw.get("scheme", "uniform")),
                oracle=str(raw.get("oracle", "auto")),
                M_prime=(float(raw["M_prime"]) if "M_prime" in raw else None),
                theta=int(solver.get("theta", 1)),
                gamma=(float(solver["gamma"]) if "gamma" in solver else None),
                m=(int(solver["m"]) if "m" in solver else None),
                stages=int(solver.get("stages", 16)),
                unsafe_override=bool(solver.get("unsafe_override", False)),
                output_dir=Path(raw.get("output_dir", "bregsaddle-out")),
            )
        except (KeyError, ValueError, TypeError) as err:
            raise ConfigError(f"malformed experiment config: {err}") from err
        if cfg.replications < 1:
            raise ConfigError("replications must be >= 1")
        if cfg.theta not in (0, 1):
            raise ConfigError("solver.theta must be 0 or 1")
        if cfg.oracle not in ("auto", "closed_form", "high_accuracy_deterministic"):
            raise ConfigError(f"unknown oracle method {cfg.oracle!r}")
        return cfg


def resolve_oracle(problem, method: str) -> SaddleOracle:
    if method == "auto":
        try:
            return find_saddle(problem, OracleMethod.CLOSED_FORM)
        except OracleFailure:
            return find_saddle(problem, OracleMethod.HIGH_ACCURACY_DETERMINISTIC)
    return find_saddle(problem, OracleMethod(method))


def prepare_run(cfg: ExperimentConfig):
    """Resolve instance, scheme, oracle, certificate, and the solver config."""
    spec = load_instance(cfg.instance)
    problem, init = build_problem(spec)
    scheme = make_scheme(problem, cfg.scheme)
    oracle = resolve_oracle(problem, cfg.oracle)
    init_dist = product_bregman_distance(problem, oracle.x, oracle.v, init[0], init[1])
    init_gap = primal_dual_gap_pair(problem, init[0], init[1], oracle.x, oracle.v)

    if cfg.theta == 1:
        gamma = cfg.gamma if cfg.gamma is not None else suggest_ergodic_gamma(problem, scheme)
        m = cfg.m if cfg.m is not None else 50
        cert = certify_ergodic(problem, scheme, gamma, m,
                               initial_distance=init_dist, initial_gap=init_gap)
        solver_cfg = SolverConfig(gamma=gamma, theta=1, m=m, stages=cfg.stages,
                                  weights="uniform", seed=cfg.seed,
                                  unsafe_override=cfg.unsafe_override)
        bounds = [cert.bound(s) for s in range(1, cfg.stages + 1)] if cert.valid else None
    else:
        gamma = cfg.gamma if cfg.gamma is not None else \
            suggest_linear_gamma(problem, scheme, cfg.M_prime)
        probe = certify_linear(problem, scheme, gamma, cfg.M_prime)
        m = cfg.m if cfg.m is not None else probe.m_min
        cert = certify_linear(problem, scheme, gamma, cfg.M_prime, m=m,
                              initial_distance=init_dist, initial_gap=init_gap)
        solver_cfg = SolverConfig(gamma=gamma, theta=0, m=m, stages=cfg.stages,
                                  weights="geometric", tau=cert.tau, seed=cfg.seed,
                                  unsafe_override=cfg.unsafe_override)
        bounds = [cert.bound(s) for s in range(1, cfg.stages + 1)] if cert.valid else None
    return spec, problem, init, scheme, oracle, cert, solver_cfg, bounds


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_trace_csv(path: Path, traces: list[GapTrace]) -> None:
    lines = [TRACE_HEADER]
    for trace in traces:
        for rec in trace.records:
            lines.append(",".join([
                str(rec.replication), str(rec.stage),
                _fmt(rec.gap_pair), _fmt(rec.ergodic_gap),
                _fmt(rec.bregman_dist), _fmt(rec.bound),
                _fmt(0.0),  # kept deterministic; real timings go to stderr
            ]))
    path.write_text("\n".join(lines) + "\n")


def per_stage_summary(traces: list[GapTrace], stages: int) -> list[dict]:
    rows = []
    for s in range(1, stages + 1):
        recs = [r for t in traces for r in t.records if r.stage == s]
        if not recs:
            break

        def stats(values):
            arr = np.array(values, dtype=float)
            return float(np.mean(arr)), float(np.std(arr))

        gap_mean, gap_std = stats([r.gap_pair for r in recs])
        erg_mean, erg_std = stats([r.ergodic_gap for r in recs])
        breg_mean, breg_std = stats([r.bregman_dist for r in recs])
        rows.append({"stage": s,
                     "gap_mean": gap_mean, "gap_std": gap_std,
                     "ergodic_mean": erg_mean, "ergodic_std": erg_std,
                     "bregman_mean": breg_mean, "bregman_std": breg_std,
                     "bound": recs[0].bound})
    return rows


def run_experiment(cfg: ExperimentConfig) -> int:
    try:
        spec, problem, init, scheme, oracle, cert, solver_cfg, bounds = prepare_run(cfg)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if not cert.valid and not cfg.unsafe_override:
        print("certificate rejected:", file=sys.stderr)
        print(json.dumps(certificate_to_dict(cert), sort_keys=True), file=sys.stderr)
        return EXIT_CERT_REJECTED

    seeds = [cfg.seed + r for r in range(cfg.replications)]
    traces: list[GapTrace] = []
    error_record = None
    t0 = time.perf_counter()
    for r, seed in enumerate(seeds):
        rep_cfg = SolverConfig(gamma=solver_cfg.gamma, theta=solver_cfg.theta,
                               m=solver_cfg.m, stages=solver_cfg.stages,
                               weights=solver_cfg.weights, tau=solver_cfg.tau,
                               seed=seed, unsafe_override=solver_cfg.unsafe_override)
        try:
            traces.append(solve(problem, scheme, rep_cfg, init,
                                saddle_ref=(oracle.x, oracle.v),
                                bound_values=bounds, replication=r))
        except DivergenceError as err:
            if err.trace is not None:
                for rec in err.trace.records:
                    object.__setattr__(rec, "replication", r)
                traces.append(err.trace)
            error_record = {"replication": r, "error": str(err)}
            break
    wall = time.perf_counter() - t0

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out / "trace.csv", traces)
    summary = {
        "instance": str(cfg.instance),
        "instance_hash": instance_hash(spec),
        "oracle": oracle.to_dict(),
        "certificate": certificate_to_dict(cert),
        "scheme": cfg.scheme.value,
        "seed_list": seeds,
        "stages": cfg.stages,
        "replications": cfg.replications,
        "per_stage": per_stage_summary(traces, cfg.stages),
    }
    if error_record is not None:
        summary["error"] = error_record
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out / 'trace.csv'} and {out / 'summary.json'} "
          f"({wall * 1e3:.1f} ms total)", file=sys.stderr)
    return EXIT_DIVERGED if error_record is not None else EXIT_OK


def certify_command(cfg: ExperimentConfig) -> int:
    try:
        *_, cert, _, _ = prepare_run(cfg)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    print(json.dumps(certificate_to_dict(cert), sort_keys=True, indent=2))
    return EXIT_OK if cert.valid else EXIT_CERT_REJECTED


def oracle_command(cfg: ExperimentConfig, output: Path | None) -> int:
    try:
        spec = load_instance(cfg.instance)
        problem, _ = build_problem(spec)
        oracle = resolve_oracle(problem, cfg.oracle)
    except (ConfigError, OracleFailure) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    text = json.dumps(oracle.to_dict(), sort_keys=True, indent=2)
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bregsaddle",
                                     description="variance-reduced Bregman primal-dual experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "certify", "oracle"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override base seed")
        p.add_argument("--stages", type=int, default=None, help="override stage count")
        p.add_argument("--unsafe-override", action="store_true",
                       help="run despite an invalid certificate")
        p.add_argument("--output", type=Path, default=None, help="output directory/file")
    sub.add_parser("list-instances")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-instances":
        from .instances import BUILTIN_NAMES
        for name in BUILTIN_NAMES:
            print(name)
        return EXIT_OK
    try:
        cfg = ExperimentConfig.from_toml(args.config)
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
    if args.stages is not None:
        cfg.stages = args.stages
    if args.unsafe_override:
        cfg.unsafe_override = True
    if args.output is not None and args.command == "run":
        cfg.output_dir = args.output
    if args.command == "run":
        return run_experiment(cfg)
    if args.command == "certify":
        return certify_command(cfg)
    return oracle_command(cfg, args.output)


if __name__ == "__main__":
    raise SystemExit(main())
