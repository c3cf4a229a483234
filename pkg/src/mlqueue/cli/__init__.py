"""Command-line interface: ``mlq <subcommand> ...``.

Exit status is 0 when everything ran and every check passed, 2 when outputs
were written but a check failed, and 1 on invalid input or a crash.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..analytics import (
    QueueAnalyticsParams,
    arrival_prob,
    critical_rho,
    invert_laplace,
    lt_moment,
    lt_p0n,
    mixing_time,
    p00_time_domain,
)
from ..errors import DomainError, SchemaError
from ..mlf import MLParams, ml_e
from ..queues import Model, QueueModelConfig, simulate
from ..sampling import (
    RngStream,
    sample_ml,
    simulate_fpp_renewal,
    simulate_fpp_timechange,
    simulate_inverse_subordinator,
)
from .config import DEFAULT_SEED, ExperimentConfig, parse_config
from .experiments import run_experiment
from .io import emit_path_csv, emit_series_csv, path_csv_text, to_jsonable

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CRASH, EXIT_CHECKS = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mlq", description="Fractional-time queue simulation and analytics.")
    ap.add_argument("--seed", type=int, default=None, help=f"root seed (default {DEFAULT_SEED})")
    ap.add_argument("--out", default=None, help="output file or directory")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for replicas")
    ap.add_argument("--config", default=None, help="JSON experiment configuration")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mlf", help="evaluate E_{alpha,beta}(z)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--z", type=float, nargs="+", required=True)

    p = sub.add_parser("sample", help="draw ML variates or an inverse subordinator path")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--inverse-subordinator", action="store_true")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--grid-step", type=float, default=None)

    p = sub.add_parser("fpp", help="simulate a fractional Poisson process")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--method", choices=["renewal", "timechange"], default="renewal")
    p.add_argument("--grid-step", type=float, default=None)

    p = sub.add_parser("simulate", help="simulate queue paths")
    p.add_argument("--model", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--initial-level", type=int, default=0)

    p = sub.add_parser("invert", help="numerically invert a queue transform")
    p.add_argument("--target", choices=["p00", "p0n", "mean", "m2"], required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, default=0)

    p = sub.add_parser("pml", help="probability that the arrival clock rings first")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rho", type=float, default=1.0)

    p = sub.add_parser("rhostar", help="rate ratio at which arrival_prob equals 1/2")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("mix", help="mixing time of the Model 1 queue")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trunc", type=int, default=200)

    p = sub.add_parser("experiment", help="run a registered experiment; extra --key value pairs set parameters")
    p.add_argument("name", nargs="?", default=None)
    return ap


def _parse_overrides(extra: list[str]) -> dict:
    params, i = {}, 0
    while i < len(extra):
        flag = extra[i]
        if not flag.startswith("--") or i + 1 >= len(extra):
            raise SchemaError(f"expected '--key value', got {' '.join(extra[i:])!r}")
        raw = extra[i + 1]
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        params[flag[2:].replace("-", "_")] = value
        i += 2
    return params


def _stdout_or_file(args, write):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write(fh)
    else:
        write(sys.stdout)


def _print_json(value) -> None:
    print(json.dumps(to_jsonable(value)))


def _cmd_mlf(args) -> int:
    vals = ml_e(args.alpha, args.beta, np.asarray(args.z, float))
    for v in np.atleast_1d(vals):
        print(repr(float(v)))
    return EXIT_OK


def _cmd_sample(args, seed) -> int:
    rng = RngStream(seed, 0)
    if args.inverse_subordinator:
        path = simulate_inverse_subordinator(args.alpha, args.horizon, args.grid_step, rng)
        if args.out:
            emit_path_csv(path, args.out)
        else:
            sys.stdout.write(path_csv_text(path))
        return EXIT_OK
    draws = np.atleast_1d(sample_ml(MLParams(args.alpha, args.lam), rng, args.n))
    _stdout_or_file(args, lambda fh: emit_series_csv(["value"], [draws], fh))
    return EXIT_OK


def _cmd_fpp(args, seed) -> int:
    params, rng = MLParams(args.alpha, args.lam), RngStream(seed, 0)
    if args.method == "renewal":
        path = simulate_fpp_renewal(params, args.horizon, rng)
    else:
        path = simulate_fpp_timechange(params, args.horizon, args.grid_step, rng)
    if args.out:
        emit_path_csv(path, args.out)
    else:
        sys.stdout.write(path_csv_text(path))
    return EXIT_OK


def _cmd_simulate(args, seed) -> int:
    if args.replicas < 1:
        raise DomainError("replicas must be at least 1")
    cfg = QueueModelConfig(
        Model(args.model), args.alpha1, args.alpha2, args.lam, args.mu, args.p, args.horizon, args.initial_level
    )
    summary = []
    for i in range(args.replicas):
        path = simulate(cfg, RngStream(seed, i))
        if args.out:
            target = Path(args.out)
            if args.replicas > 1:
                target = target / f"replica_{i}.csv"
            emit_path_csv(path, target)
        summary.append(
            {
                "replica": i,
                "final_level": path.final_level,
                "hit_zero": path.visits_zero(0.0, cfg.horizon) if cfg.horizon > 0 else cfg.initial_level == 0,
                "unused": int(path.unused_marks().size),
                "events": int(path.times.size),
            }
        )
    _print_json({"seed": seed, "replicas": summary})
    return EXIT_OK


def _cmd_invert(args) -> int:
    params = QueueAnalyticsParams(args.p, args.alpha, args.lam)
    t = np.asarray(args.t, float)
    if args.target == "p00":
        vals = np.atleast_1d(p00_time_domain(t, params))
    else:
        if args.target == "p0n":
            f = lambda s: lt_p0n(s, params, args.n)  # noqa: E731
        else:
            k = 1 if args.target == "mean" else 2
            f = lambda s: lt_moment(k, s, params)  # noqa: E731
        vals = np.array([float(invert_laplace(f, ti)) for ti in t])
    _stdout_or_file(args, lambda fh: emit_series_csv(["t", "value"], [t, vals], fh))
    return EXIT_OK


def _cmd_experiment(args, extra, seed) -> int:
    if args.config:
        base = parse_config(args.config)
        name = args.name or base.name
        if name != base.name:
            raise SchemaError(f"experiment {name!r} does not match config name {base.name!r}")
        params = {**base.parameters, **_parse_overrides(extra)}
        seed = args.seed if args.seed is not None else base.seed
        out = args.out or base.output_dir
    else:
        if args.name is None:
            raise SchemaError("experiment name required")
        name, params, out = args.name, _parse_overrides(extra), args.out
    cfg = ExperimentConfig(name, params, seed, out)
    report = run_experiment(cfg, threads=args.threads)
    for key, chk in report.checks.items():
        status = "vacuous" if chk["vacuous"] else ("PASS" if chk["passed"] else "FAIL")
        print(f"{status:7s} {key}: value={chk['value']} threshold={chk['threshold']}", file=sys.stderr)
    _print_json({"name": name, "output_dir": str(cfg.out), "summary": report.summary, "passed": report.passed})
    return EXIT_OK if report.passed else EXIT_CHECKS


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != "experiment":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    try:
        if args.threads < 1:
            raise DomainError("--threads must be at least 1")
        if args.command == "mlf":
            return _cmd_mlf(args)
        if args.command == "sample":
            return _cmd_sample(args, seed)
        if args.command == "fpp":
            return _cmd_fpp(args, seed)
        if args.command == "simulate":
            return _cmd_simulate(args, seed)
        if args.command == "invert":
            return _cmd_invert(args)
        if args.command == "pml":
            _print_json(arrival_prob(args.alpha, args.beta, args.rho))
            return EXIT_OK
        if args.command == "rhostar":
            _print_json(critical_rho(args.alpha, args.beta))
            return EXIT_OK
        if args.command == "mix":
            _print_json(mixing_time(args.eps, QueueAnalyticsParams(args.p, args.alpha, args.lam), args.trunc))
            return EXIT_OK
        if args.command == "experiment":
            return _cmd_experiment(args, extra, args.seed if args.seed is not None else DEFAULT_SEED)
    except (ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"mlq: error: {exc}", file=sys.stderr)
        return EXIT_CRASH
    return EXIT_CRASH


if __name__ == "__main__":
    sys.exit(main())
