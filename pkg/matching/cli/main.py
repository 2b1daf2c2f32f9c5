#!/usr/bin/env python3
"""
Command-line interface for the matching distribution library.

Prints CSV or JSON to stdout; logs go to stderr.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

from pydantic import ValidationError

from matching.cli import commands
from matching.cli.figures import FIGURES, build_figures
from matching.cli.output import render, write_record
from matching.config.settings import settings
from matching.errors import MatchingError
from matching.models.distribution import Size, parse_size
from matching.models.output import OutputRecord

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace], OutputRecord]


def _size(text: str) -> Size:
    try:
        return parse_size(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--size", type=_size, required=True, help="Number of items n (integer or 'inf')")
    parser.add_argument("--trials", type=int, default=1, help="Number of games m (default: 1)")
    parser.add_argument("--prob", type=float, default=0.0, help="Matching probability (default: 0)")


def _add_approx(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--approx", dest="approx", action="store_const", const=True, default=None,
        help="Force the normal approximation for the total",
    )
    group.add_argument(
        "--exact", dest="approx", action="store_const", const=False,
        help="Force exact convolution (default: exact up to the trials threshold)",
    )


def _add_tails(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--lower-tail", action=argparse.BooleanOptionalAction, default=True,
        help="Use P(T <= t) (default) or P(T > t) with --no-lower-tail",
    )
    parser.add_argument("--log-p", action="store_true", help="Probabilities on the log scale")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="matching",
        description="Generalised matching distribution: probability functions, estimation and tests",
    )
    parser.add_argument(
        "--format", choices=["csv", "json"], default=settings.output_format,
        help=f"Output format (default: {settings.output_format})",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    parser.add_argument(
        "--version", action="version", version=f"{settings.app_name} {settings.app_version}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="Probability mass function")
    p.add_argument("--k", type=int, nargs="+", required=True, help="Argument values")
    _add_params(p)
    p.add_argument("--log", action="store_true", help="Return natural-log masses")
    _add_approx(p)
    p.set_defaults(handler=commands.pmf_command)

    p = sub.add_parser("cdf", help="Cumulative distribution function")
    p.add_argument("--t", type=int, nargs="+", required=True, help="Argument values")
    _add_params(p)
    _add_tails(p)
    _add_approx(p)
    p.set_defaults(handler=commands.cdf_command)

    p = sub.add_parser("quantile", help="Quantile function")
    p.add_argument("--p", type=float, nargs="+", required=True, help="Probabilities")
    _add_params(p)
    _add_tails(p)
    _add_approx(p)
    p.set_defaults(handler=commands.quantile_command)

    p = sub.add_parser("sample", help="Random generation")
    p.add_argument("--count", type=int, required=True, help="Number of draws")
    _add_params(p)
    p.add_argument("--seed", type=int, default=None, help="Generator seed")
    p.add_argument("--method", choices=["inverse", "two-step"], default="inverse")
    _add_approx(p)
    p.set_defaults(handler=commands.sample_command)

    p = sub.add_parser("hdr", help="Highest density region")
    p.add_argument("--cover-prob", type=float, required=True, help="Minimum coverage")
    _add_params(p)
    _add_approx(p)
    p.set_defaults(handler=commands.hdr_command)

    p = sub.add_parser("moments", help="Mean, variance, skewness and kurtosis")
    _add_params(p)
    p.add_argument("--include-sd", action="store_true", help="Also report the standard deviation")
    p.add_argument("--asymptotic", action="store_true", help="Use the large-size equivalents")
    p.set_defaults(handler=commands.moments_command)

    p = sub.add_parser("mle", help="Estimate the matching probability")
    p.add_argument("--data", type=Path, required=True, help="File with one match count per line")
    p.add_argument("--size", type=int, required=True, help="Number of items n")
    p.add_argument("--ci-method", choices=["asymptotic", "bootstrap"], default="asymptotic")
    p.add_argument("--conf-level", type=float, default=settings.conf_level)
    p.add_argument("--bootstrap-sims", type=int, default=settings.bootstrap_sims)
    p.add_argument("--seed", type=int, default=None, help="Bootstrap seed")
    p.add_argument(
        "--tail-split", choices=["fractional", "absolute"], default="fractional",
        help="How the lower-tail share is applied to the total tail mass",
    )
    p.set_defaults(handler=commands.mle_command)

    p = sub.add_parser(
        "test", help="Matching test",
        description="Two-sided p-values include outcomes whose mass ties the observed one "
        f"within a relative tolerance of {settings.two_sided_rel_tol:g}.",
    )
    p.add_argument("--data", type=Path, required=True, help="File with one match count per line")
    p.add_argument("--size", type=int, required=True, help="Number of items n")
    p.add_argument("--null-prob", type=float, default=0.0)
    p.add_argument("--alternative", choices=["greater", "less", "two-sided"], default="greater")
    _add_approx(p)
    p.set_defaults(handler=commands.matching_test_command)

    p = sub.add_parser("power", help="Power of the canonical matching test")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--theta-grid", type=float, nargs="+", default=None)
    _add_approx(p)
    p.set_defaults(handler=commands.power_command)

    p = sub.add_parser("figures", help="Plot data for the standard figures")
    p.add_argument("--name", choices=[*FIGURES, "all"], default="all")
    p.add_argument("--out-dir", type=Path, default=None, help="Write one file per figure here")

    p = sub.add_parser("subfactorial", help="Derangement counts")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.set_defaults(handler=commands.subfactorial_command)

    p = sub.add_parser("diagnostics", help="Recursion residuals and Poisson distance")
    p.add_argument("--size", type=int, required=True)
    p.set_defaults(handler=commands.diagnostics_command)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--prob", type=float, default=0.0)
    p.set_defaults(handler=commands.oracle_command)

    return parser


def _configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose or settings.debug else settings.log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _run_figures(args: argparse.Namespace) -> None:
    records = build_figures(args.name)
    for name, record in records.items():
        if args.out_dir is not None:
            path = write_record(record, args.format, args.out_dir, name)
            logger.info(f"Wrote {path}")
        else:
            sys.stdout.write(render(record, args.format))


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, print the result and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    _configure_logging(args.verbose)
    try:
        if args.command == "figures":
            _run_figures(args)
        else:
            handler: Handler = args.handler
            sys.stdout.write(render(handler(args), args.format))
    except (MatchingError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
