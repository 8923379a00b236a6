"""Command-line entry point: ``cqc <experiment> --config <file> --out <dir> [--full-scale] [--seed k]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from cqc.errors import CqcError
from cqc.experiments import EXPERIMENTS, load_config, run_experiment

log = logging.getLogger("cqc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqc",
        description="Sequential-circuit compression and time evolution of the mixed-field Ising chain.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", type=Path, default=None, help="JSON config; unknown fields are rejected")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--full-scale", action="store_true", help="use the large reference sizes (hours)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seeds with one seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.experiment, args.full_scale, args.seed)
    except (CqcError, OSError, TypeError) as exc:
        print(f"cqc: config error: {exc}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        summary = run_experiment(cfg, args.out)
    except CqcError as exc:
        print(f"cqc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    log.info("%s finished in %.1f s", cfg.experiment, time.perf_counter() - t0)
    print(json.dumps({"experiment": cfg.experiment, "out": str(args.out)}, indent=None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
