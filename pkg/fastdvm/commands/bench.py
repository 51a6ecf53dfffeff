"""
`bench` command: wall-clock of one RK2 step over (N, N_bar)
"""
import argparse
import logging

from fastdvm.schemas import BenchConfig
from fastdvm.services.experiment_service import experiment_service
from fastdvm.services.report_service import report_service
from fastdvm.utils import apply_runtime_overrides, load_config, output_prefix, with_suffix

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("bench", parents=parents, help="Timing sweep and fitted complexity exponents")
    parser.set_defaults(handler=cmd_bench)


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config, BenchConfig)
    # timings are single-threaded unless --threads is given
    apply_runtime_overrides(deterministic=True if args.deterministic else None, threads=args.threads)
    if args.budget_seconds is not None:
        config = config.model_copy(update={"cell_budget_seconds": args.budget_seconds})

    rows, fits = experiment_service.bench(config)
    prefix = output_prefix(args.out, config.output_prefix)
    report_service.write_table(
        rows, with_suffix(prefix, ".csv"), ["operator", "N", "tilde_N", "n_bar", "median_seconds", "repeats"]
    )
    report_service.write_table(fits, with_suffix(prefix, "_fit.csv"), ["quantity", "value"])

    summary = " ".join(f"{fit['quantity']}={fit['value']:.3g}" for fit in fits if fit["value"] is not None)
    print(f"bench: {len(rows)} cells {summary}")
    return 0
