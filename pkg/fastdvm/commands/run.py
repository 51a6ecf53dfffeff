"""
`run` command: time-dependent simulation from a config file
"""
import argparse
import logging

from fastdvm.config import settings
from fastdvm.exceptions import ConfigError
from fastdvm.schemas import SimulationConfig
from fastdvm.services.integrator_service import integrator_service
from fastdvm.services.report_service import report_service
from fastdvm.utils import apply_runtime_overrides, load_config, output_prefix, with_suffix

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("run", parents=parents, help="Advance one configured initial field in time")
    parser.set_defaults(handler=cmd_run)


def cmd_run(args: argparse.Namespace) -> int:
    """Run the integrator, write trajectory and final-field CSVs, print a summary line"""
    if args.config is None:
        raise ConfigError("run needs --config", kind="config-parse")
    config = load_config(args.config, SimulationConfig)
    # an explicit "deterministic" in the config counts unless --deterministic is passed
    deterministic = config.deterministic if "deterministic" in config.model_fields_set else None
    apply_runtime_overrides(deterministic=True if args.deterministic else deterministic, threads=args.threads)
    budget = args.budget_seconds if args.budget_seconds is not None else settings.BUDGET_SECONDS

    record = integrator_service.run(config, budget_seconds=budget)

    prefix = output_prefix(args.out, config.output_prefix)
    report_service.write_trajectory(record, config.grid.d, with_suffix(prefix, "_trajectory.csv"))
    report_service.write_field(record.final_field, with_suffix(prefix, "_field.csv"))

    initial_mass = record.moment_reports[0].mass
    final_mass = record.moment_reports[-1].mass
    drift = (final_mass - initial_mass) / initial_mass if initial_mass else final_mass - initial_mass
    summary = f"steps={record.steps} t={record.times[-1]:.6g} mass_drift={drift:.3e}"
    if record.l1_errors:
        summary += f" l1_error={record.l1_errors[-1]:.6e}"
    if config.time.clamp_negatives:
        summary += f" clamped_mass={record.clamped_mass:.3e}"
    print(summary)
    return 0
