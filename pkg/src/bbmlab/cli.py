"""Command-line entry point: ``bbmlab <experiment> --config PATH --out DIR``."""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import EXPERIMENTS, OUT_ENV, run_experiment, validate_config


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bbmlab", description="Pseudo-spectral lab for the BBM-BBM system.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON config or a previous manifest.json (defaults if omitted)")
        sp.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/<experiment> or bbmlab_runs/)")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
        sp.add_argument("--seed", type=int, help="override the config seed")
    vp = sub.add_parser("validate", help="static checks of a config; prints diagnostics as JSON")
    vp.add_argument("--config", required=True)
    vp.add_argument("--experiment", choices=EXPERIMENTS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        diags = validate_config(args.config, args.experiment)
        print(json.dumps(diags, indent=2))
        return 2 if any(d["level"] == "error" for d in diags) else 0
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return 2
    status = run_experiment(args.config, args.out, experiment=args.command, seed=args.seed, jobs=args.jobs)
    if status:
        print(f"bbmlab {args.command}: failed with status {status}; see manifest.json", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
