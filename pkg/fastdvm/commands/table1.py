"""
`table1` command: relative L1 error of the classical and fast operators over N
"""
import argparse
import logging

from fastdvm.schemas import Table1Config
from fastdvm.services.experiment_service import experiment_service, fast_column
from fastdvm.services.report_service import report_service
from fastdvm.utils import apply_runtime_overrides, load_config, output_prefix, with_suffix

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("table1", parents=parents, help="Accuracy table against the BKW solution")
    parser.set_defaults(handler=cmd_table1)


def cmd_table1(args: argparse.Namespace) -> int:
    config = load_config(args.config, Table1Config)
    apply_runtime_overrides(deterministic=True if args.deterministic else None, threads=args.threads)
    if args.budget_seconds is not None:
        config = config.model_copy(update={"cell_budget_seconds": args.budget_seconds})

    rows = experiment_service.table1(config)
    columns = ["N", "T", "tilde_N", "classical"] + [fast_column(n_bar) for n_bar in config.n_bars]
    path = report_service.write_table(rows, with_suffix(output_prefix(args.out, config.output_prefix), ".csv"), columns)

    filled = sum(1 for row in rows for c in columns[3:] if row.get(c) is not None)
    print(f"table1: {len(rows)} rows, {filled} cells computed -> {path}")
    return 0
