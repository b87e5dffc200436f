"""Command-line entry point.

    optobec <experiment> [--config FILE] [--out DIR] [--seed N] [--threads N]

with experiments fig1 | fig2 | fig3 | kbar-sweep | coupled-check | custom.
Exit codes: 0 success, 1 configuration error, 2 numerical abort.
"""

from __future__ import annotations

import argparse
import sys

from .classical import NumericalAbortError
from .config import EXPERIMENTS, ConfigError, RunConfig
from .runners import RUNNERS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optobec",
        description=("Classical-ensemble and wave-packet simulations of a "
                     "driven-cavity condensate side mode"))
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--threads", type=int,
                       help="worker processes for sweep points")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_file(args.config)
        if cfg.experiment != args.experiment and cfg.experiment != "custom":
            raise ConfigError(
                f"config declares experiment {cfg.experiment!r} but the "
                f"command line asks for {args.experiment!r}")
    else:
        cfg = RunConfig(experiment=args.experiment)
    from dataclasses import replace
    updates: dict = {"experiment": args.experiment}
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.threads is not None:
        updates["threads"] = args.threads
    return replace(cfg, **updates)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        artifacts = RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalAbortError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2
    for name in sorted(artifacts.files):
        print(artifacts.files[name])
    return 0


if __name__ == "__main__":
    sys.exit(main())
