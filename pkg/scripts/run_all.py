"""Run every registered experiment with its default parameters.

Usage: python scripts/run_all.py [--threads N] [--seed S] [--out DIR] [NAME ...]
"""

import argparse
import sys
from pathlib import Path

from mlqueue.cli.config import DEFAULT_SEED, SCHEMAS, ExperimentConfig
from mlqueue.cli.experiments import run_experiment


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=sorted(SCHEMAS))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    failed = 0
    for name in args.names:
        cfg = ExperimentConfig(name, seed=args.seed, output_dir=str(Path(args.out) / name))
        report = run_experiment(cfg, threads=args.threads)
        status = "ok" if report.passed else "CHECK FAILED"
        print(f"{name:14s} {report.wall_clock:7.1f}s  {status}")
        for key, chk in report.checks.items():
            if not chk["passed"]:
                print(f"    {key}: value={chk['value']} threshold={chk['threshold']}")
        failed += not report.passed
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
