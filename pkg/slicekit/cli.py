# slicekit/cli.py
"""Command line: ``slicekit <experiment> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, create_runner
from .errors import SlicekitError
from .experiments import CLOUD_FLOWS, EXPERIMENTS, RunConfig
from .methods import list_methods

logger = logging.getLogger(__name__)

# RunConfig dict fields reachable through --set
SET_SECTIONS = ("selector", "flow", "synthetic", "inputs", "reference", "sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicekit", description="Sliced Wasserstein projection-selection experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--list-methods", action="store_true", help="print every method name and exit")
    parser.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON run config (a config.lock also works)")
    parser.add_argument("--method", action="append", dest="methods", metavar="NAME",
                        help="method to run; repeat for several")
    parser.add_argument("--L", action="append", type=int, dest="grid", metavar="N",
                        help="budget grid value (landscapes, approx-error) or flow L; repeat for several")
    parser.add_argument("--seed", action="append", type=int, dest="seeds", metavar="K", help="repeat for several")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="concurrent sub-runs")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config setting, e.g. selector.beta=0.5 or sweep.beta=[0.5,1] (VALUE is JSON)")
    parser.add_argument("--profile", help="settings profile: dev, test or prod")
    return parser


def _apply_set(cfg: RunConfig, item: str) -> None:
    key, sep, raw = item.partition("=")
    section, dot, name = key.partition(".")
    if not sep or not dot or section not in SET_SECTIONS:
        raise SlicekitError(f"--set expects SECTION.KEY=VALUE with SECTION one of {', '.join(SET_SECTIONS)}, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings, e.g. flow.eval=sw-highL
    getattr(cfg, section)[name] = value


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Config file first, then flag overrides."""
    if args.config:
        cfg = RunConfig.load(args.config)
        if args.experiment and args.experiment != cfg.experiment:
            raise SlicekitError(f"--config is for {cfg.experiment!r}, not {args.experiment!r}")
    else:
        if not args.experiment:
            raise SlicekitError("an experiment (or --config) is required")
        cfg = RunConfig(experiment=args.experiment)
    if args.methods:
        cfg.methods = args.methods
    if args.seeds:
        cfg.seeds = args.seeds
    if args.grid:
        if cfg.experiment in (*CLOUD_FLOWS, "style-transfer"):
            cfg.flow["L"] = args.grid[-1]
        else:
            cfg.grid = args.grid
    if args.out:
        cfg.output = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    for item in args.set:
        _apply_set(cfg, item)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_methods:
        print("\n".join(list_methods()))
        return 0
    try:
        cfg = config_from_args(args)
        runner = create_runner(args.profile)
        return runner.run(cfg)
    except SlicekitError as e:
        logger.error(str(e))
        print(f"slicekit: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
