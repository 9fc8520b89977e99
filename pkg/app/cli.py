"""Command-line entry point: python -m app.cli <command> [--config PATH] [--out DIR] [--threads N]."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app import __version__
from app.core.errors import ConfigInvalid, IoFailure, LabError, NumericalFailure
from app.core.log_config import configure_logging
from app.core.settings import DEFAULT_OUT_DIR, get_settings
from app.lab.experiments import load_config, run_experiment, summary_line
from app.models.experiment_models import COMMANDS

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_OTHER = 4

_HELP = {
    "classify": "blow-up / global verdict with per-point predicate table",
    "evaluate": "closed-form v, eta and density on a (t, x) grid",
    "simulate": "particle-method run with trajectory and observables",
    "sweep": "verdicts over a parameter family and its critical value",
    "asymptotics": "L1 distance to the limit profile and fitted decay rate",
    "picard": "fixed-point iteration deltas on a short window",
    "nsp": "Riccati boundary blow-up times against the upper bound",
}

_EPILOG = (
    "environment: LAB_OUT_DIR sets the output directory when --out is absent; "
    "LAB_THREADS and LOG_LEVEL supply defaults for --threads and --log-level. "
    "All three may also come from a .env file."
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML or JSON experiment config")
    common.add_argument("--out", type=Path, default=None, help="output directory (overrides LAB_OUT_DIR)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for sweeps (default LAB_THREADS, else 1)")
    common.add_argument("--seed", type=int, default=None, help="reserved; every method is deterministic")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ... (default LOG_LEVEL, else INFO)")

    parser = argparse.ArgumentParser(prog="app.cli", description="Euler-Poisson threshold lab", epilog=_EPILOG)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=_HELP[name], epilog=_EPILOG)
    return parser


def resolve_out_dir(flag: Optional[Path], config_dir: Optional[str]) -> Path:
    """--out beats LAB_OUT_DIR, which beats the config file, which beats the default."""
    if flag is not None:
        return flag
    env = get_settings().out_dir
    if env:
        return Path(env)
    if config_dir:
        return Path(config_dir)
    return Path(DEFAULT_OUT_DIR)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except ValidationError as exc:
        configure_logging(args.log_level or "INFO")
        logger.error("invalid environment: %s", exc)
        return EXIT_CONFIG
    configure_logging(args.log_level or settings.log_level)

    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be >= 1")
        return EXIT_CONFIG
    threads = args.threads or settings.threads

    try:
        config = load_config(args.config)
        out_dir = resolve_out_dir(args.out, config.output.out_dir)
        manifest = run_experiment(config, args.command, out_dir, threads)
    except ConfigInvalid as exc:
        logger.error("invalid config: %s", exc)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        logger.error("%s failed numerically: %s", args.command, exc)
        return EXIT_NUMERICAL
    except IoFailure as exc:
        logger.error("%s: %s", args.command, exc)
        return EXIT_OTHER
    except ValueError as exc:
        # validation-type LabErrors are ValueErrors too
        logger.error("%s rejected its input: %s", args.command, exc)
        return EXIT_CONFIG
    except LabError as exc:
        logger.error("%s: %s", args.command, exc)
        return EXIT_OTHER

    print(summary_line(manifest))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
