"""
Command-line entry point for the fast discrete-velocity collision solver
"""
import argparse
import logging
import sys
from typing import List, Optional

from fastdvm.commands import bench, farey, run, table1
from fastdvm.config import settings
from fastdvm.exceptions import FastDVMError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="Output path prefix (overrides the config's output_prefix)")
    common.add_argument("--deterministic", action="store_true", help="Single-threaded transforms and reductions")
    common.add_argument("--budget-seconds", type=float, help="Wall-clock cap (whole run, or per table cell)")
    common.add_argument("--threads", type=int, help="FFT worker threads when not deterministic")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="fastdvm",
        description="Discrete velocity models of the Boltzmann collision operator",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (run, table1, bench, farey):
        command.register(subparsers, [common])
    return parser


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch to the command and map errors to exit codes"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except FastDVMError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
