"""Provide a command-line interface for rearranged-expansions experiments.

Intervals whose lower bound is negative must be passed with ``=`` so argparse
does not read them as options, for example ``--cdf-interval=-3:3``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from . import __version__
from .config import CONFIG_KEYS, ExperimentConfig
from .constants import (
    EXIT_CONFIG_ERROR,
    EXIT_FAILURE,
    EXIT_IO_ERROR,
    EXIT_KEYBOARD_INTERRUPT,
    EXIT_NUMERIC_ERROR,
    EXIT_SUCCESS,
    Subcommand,
    WeightKind,
)
from .core.experiment_plan import build_experiment_plan
from .exceptions import (
    ConfigurationError,
    ContractError,
    DomainError,
    FileSystemError,
    UnsupportedOracleError,
)
from .shell.experiments import ExperimentDeps, ExperimentRunner

logger = logging.getLogger(__name__)

COMMAND_HELP: dict[Subcommand, str] = {
    Subcommand.CURVES: "Write truth, expansion and rearranged curves per sample size",
    Subcommand.TABLE: "Write Lp error tables for the distribution and quantile",
    Subcommand.COUPLING: "Write Monte Carlo coupling moments of Cornish-Fisher "
    "quantiles",
}


def _handle_unexpected_error(exc: Exception, context: str) -> int:
    """Classify an exception, report it and return the exit code."""
    if isinstance(exc, ConfigurationError):
        error_type, exit_code = "Configuration Error", EXIT_CONFIG_ERROR
    elif isinstance(exc, (DomainError, ContractError, UnsupportedOracleError)):
        error_type, exit_code = "Numeric Error", EXIT_NUMERIC_ERROR
    elif isinstance(exc, (FileSystemError, OSError)):
        error_type, exit_code = "File System Error", EXIT_IO_ERROR
    else:
        logger.error(
            "Unexpected error in %s: %s",
            context,
            exc,
            exc_info=True,
            extra={"context": context, "exception_type": type(exc).__name__},
        )
        print(f"Unexpected Error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    logger.debug("%s in %s", error_type, context, exc_info=True)
    print(f"{error_type}: {exc}", file=sys.stderr)
    return exit_code


def _add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        help="Flat key = value or YAML config file (flags override it)",
    )
    parser.add_argument(
        "--population",
        help="gamma:SHAPE:SCALE or lognormal:MU:SIGMA (default: gamma:0.0625:16)",
    )
    parser.add_argument(
        "--n",
        help="Comma-separated sample sizes (default: 4,8,16,32; 5 for lognormal)",
    )
    parser.add_argument(
        "--order",
        help="Comma-separated expansion orders in 1..3; the first is the "
        "baseline, the last is rearranged (default: 1,3)",
    )
    parser.add_argument(
        "--cdf-interval",
        help="Distribution interval LO:HI, e.g. --cdf-interval=-3:3",
    )
    parser.add_argument(
        "--q-interval",
        help="Quantile interval LO:HI inside (0, 1) (default: 0.005:0.995)",
    )
    parser.add_argument("--mesh", help="Number of mesh cells (default: 1001)")
    parser.add_argument(
        "--weight",
        choices=sorted(WeightKind.values()),
        help="Weight measure for weighted rearrangement (default: none)",
    )
    parser.add_argument(
        "--weight-file",
        help="Two-column x,cdf CSV used with --weight file",
    )
    parser.add_argument(
        "--iterations",
        help="Refinements of the iterated weight (default: 1)",
    )
    parser.add_argument(
        "--draws",
        help="Monte Carlo draws (default: 1000000; 10000000 for lognormal)",
    )
    parser.add_argument("--seed", help="Monte Carlo seed (default: 20070801)")
    parser.add_argument("--out", help="Output directory (default: results)")


def create_parser() -> argparse.ArgumentParser:
    """Create and return the CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="rearranged-expansions",
        description="Compare Edgeworth and Cornish-Fisher expansions with their "
        "monotone rearrangements",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"rearranged-expansions {__version__}",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "--verbose", "-v", action="store_true", help="Log debug diagnostics"
    )
    verbosity.add_argument(
        "--quiet", "-q", action="store_true", help="Log errors only"
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, summary in COMMAND_HELP.items():
        _add_experiment_arguments(subparsers.add_parser(command.value, help=summary))
    return parser


def configure_logging(*, verbose: bool = False, quiet: bool = False) -> None:
    """Configure root logging once for a CLI run."""
    level = logging.WARNING
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Return the config overrides for the flags given explicitly."""
    overrides: dict[str, Any] = {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Return the effective config: defaults, then ``--config``, then flags."""
    return ExperimentConfig.from_sources(
        config_file=getattr(args, "config", None),
        overrides=build_overrides(args),
    )


def run_command(
    command: Subcommand | str,
    config: ExperimentConfig,
    deps: ExperimentDeps | None = None,
) -> int:
    """Plan and execute one subcommand under ``config``."""
    plan = build_experiment_plan(command, config)
    result = ExperimentRunner(deps).run(plan, config)
    logger.info("%s", result)
    return EXIT_SUCCESS


def _make_handler(command: Subcommand) -> Callable[[argparse.Namespace], int]:
    def handler(args: argparse.Namespace) -> int:
        return run_command(command, resolve_config(args))

    handler.__name__ = f"handle_{command.value}_command"
    return handler


HANDLERS: dict[str, Callable[[argparse.Namespace], int]] = {
    command.value: _make_handler(command) for command in Subcommand
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI entry point."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_KEYBOARD_INTERRUPT
    except SystemExit as exc:
        return EXIT_CONFIG_ERROR if exc.code else EXIT_SUCCESS

    configure_logging(verbose=args.verbose, quiet=args.quiet)
    command = getattr(args, "command", "")
    try:
        return HANDLERS[command](args)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_KEYBOARD_INTERRUPT
    except Exception as exc:
        return _handle_unexpected_error(exc, f"{command} command")


if __name__ == "__main__":
    sys.exit(main())
