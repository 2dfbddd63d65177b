"""Command-line entry point: ``llg-inviscid <verb> --config cfg.json [overrides]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .experiments import RUNNERS

VERBS = ("simulate", "sweep", "truncate", "equivalence", "selftest")


def _grid(text: str) -> list[int]:
    parts = [int(p) for p in text.lower().replace("x", ",").split(",") if p]
    if not 1 <= len(parts) <= 3:
        raise argparse.ArgumentTypeError(f"grid must have 1-3 sizes, got {text!r}")
    return parts


def _epsilons(text: str) -> list[float]:
    return sorted((float(p) for p in text.split(",") if p), reverse=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llg-inviscid",
        description="Pseudospectral LLG / projected-equation experiments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, help=f"run the {verb} experiment")
        p.add_argument("--config", help="JSON config (defaults used when omitted)")
        p.add_argument("--epsilon", type=_epsilons, help="comma-separated damping values")
        p.add_argument("--grid", type=_grid, help="grid sizes, e.g. 32x32x32")
        p.add_argument("--T", type=float, help="final time")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--out", help="output directory for reports")
        p.add_argument("--workers", type=int, help="concurrent solves")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {
        "epsilons": args.epsilon,
        "grid": args.grid,
        "T": args.T,
        "dt": args.dt,
        "output": args.out,
        "workers": args.workers,
    }
    if args.T is not None:
        overrides["T_list"] = []
    try:
        config = load_config(args.config, args.verb, overrides)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = RUNNERS[args.verb](config)
    for line in report.summary_lines():
        print(line)
    if config.output:
        report.save(config.output)
        print(f"report written to {config.output}")
    print("OK" if report.passed else "FAILED")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
