"""
Time integration of df/dt = D(f, f) with the two-stage SSP Runge-Kutta scheme
"""
import logging
import time
from typing import Callable, Optional

import numpy as np

from fastdvm.exceptions import BudgetExceededError, ConfigError
from fastdvm.models import DistributionField, KernelModel, TrajectoryRecord
from fastdvm.schemas import GridConfig, GridSpec, SimulationConfig
from fastdvm.services.collision_service import collision_service
from fastdvm.services.kernel_service import kernel_service
from fastdvm.services.lattice_service import lattice_service
from fastdvm.services.validation_service import validation_service

logger = logging.getLogger(__name__)

OperatorEval = Callable[[DistributionField], np.ndarray]


class IntegratorService:
    """Service advancing distribution fields in time"""

    @staticmethod
    def rk2_step(f: DistributionField, dt: float, operator_eval: OperatorEval) -> DistributionField:
        """
        Heun step: f1 = f + dt D(f), f_next = f/2 + (f1 + dt D(f1))/2

        Raises:
            NumericalError: a stage produced non-finite values
        """
        if not dt > 0:
            raise ConfigError(f"dt must be positive, got {dt}", kind="schema")
        stage = f.with_values(f.values + dt * operator_eval(f))
        return f.with_values(0.5 * f.values + 0.5 * (stage.values + dt * operator_eval(stage)))

    @staticmethod
    def grid_from_config(grid_config: GridConfig) -> GridSpec:
        if grid_config.n_tilde is None and grid_config.truncation_rule == "halved":
            return lattice_service.grid_for_rule(
                grid_config.d, grid_config.N, grid_config.T, "halved", n_bar=grid_config.n_bar
            )
        return lattice_service.make_grid(
            grid_config.d, grid_config.N, grid_config.T, n_tilde=grid_config.n_tilde, n_bar=grid_config.n_bar
        )

    @staticmethod
    def make_evaluator(
        operator: str,
        model: KernelModel,
        grid: GridSpec,
        compensated: bool = False,
        use_cache: bool = False,
        line_weights: str = "plain",
    ) -> OperatorEval:
        """Bind an operator name to a field -> D(f) callable, precomputing its tables once"""
        if operator == "truncated":
            return lambda f: collision_service.dvm_truncated(model, grid, f, compensated=compensated).values
        if operator == "classical":
            return lambda f: collision_service.dvm_classical(model, grid, f, compensated=compensated).values
        if operator == "pseudospectral":
            modes = kernel_service.build_mode_table(model, grid)
            return lambda f: collision_service.dvm_pseudospectral(model, grid, f, modes).values
        if operator == "fast":
            tables = kernel_service.alpha_tables_for(model, grid, use_cache=use_cache, line_weights=line_weights)
            return lambda f: collision_service.dvm_fast(model, grid, f, tables).values
        raise ConfigError(f"unknown operator {operator!r}", kind="schema")

    @staticmethod
    def initial_field(config: SimulationConfig, grid: GridSpec) -> DistributionField:
        initial = config.initial
        if initial.kind == "bkw":
            return validation_service.sample_bkw(grid, initial.t0)
        if initial.kind == "maxwellian":
            return validation_service.maxwellian(grid, initial.rho, initial.u, initial.temperature)
        if initial.kind == "bump":
            return validation_service.sample_bump(grid, initial.radius)
        return validation_service.random_positive_field(grid, config.seed)

    @staticmethod
    def run(config: SimulationConfig, budget_seconds: Optional[float] = None) -> TrajectoryRecord:
        """
        Advance the configured initial field to t_end, recording moments every
        record_every steps and at the final step.

        Raises:
            BudgetExceededError: wall-clock time exceeded budget_seconds
        """
        grid = IntegratorService.grid_from_config(config.grid)
        model = kernel_service.make_model(config.model.name, config.model.weights)
        loop = config.time
        steps = loop.steps
        t0 = config.initial.t0

        logger.info(
            f"run: {config.model.name}/{config.model.weights}, operator={loop.operator}, "
            f"N={grid.N}, T={grid.T}, n_tilde={grid.n_tilde}, n_bar={grid.n_bar} ({config.grid.line_weights} lines), "
            f"dt={loop.dt}, steps={steps}"
        )
        started = time.monotonic()
        evaluate = IntegratorService.make_evaluator(
            loop.operator,
            model,
            grid,
            compensated=loop.compensated,
            use_cache=config.cache_tables,
            line_weights=config.grid.line_weights,
        )

        f = IntegratorService.initial_field(config, grid)
        record = TrajectoryRecord(l1_errors=[] if config.track_error else None)
        negative_snapshots = []
        clamped_steps = 0

        def snapshot(field: DistributionField, t: float) -> None:
            record.times.append(t)
            report = lattice_service.moments(field)
            record.moment_reports.append(report)
            if report.min_value < 0:
                negative_snapshots.append(t)
            if record.l1_errors is not None:
                reference = validation_service.sample_bkw(grid, t)
                record.l1_errors.append(validation_service.rel_l1_error(field, reference, t).rel_l1)

        snapshot(f, t0)
        for step in range(1, steps + 1):
            f = IntegratorService.rk2_step(f, loop.dt, evaluate)

            if loop.clamp_negatives and (f.values < 0).any():
                negative = f.values < 0
                record.clamped_mass += grid.cell_volume * float(-f.values[negative].sum())
                clamped_steps += 1
                logger.debug(f"step {step}: clamped {int(negative.sum())} negative entries")
                f = f.with_values(np.maximum(f.values, 0.0))

            if step % loop.record_every == 0 or step == steps:
                snapshot(f, t0 + step * loop.dt)

            elapsed = time.monotonic() - started
            if budget_seconds is not None and elapsed > budget_seconds:
                raise BudgetExceededError(
                    f"run stopped at step {step}/{steps} after {elapsed:.1f}s (budget {budget_seconds}s)"
                )
            logger.debug(f"step {step}/{steps} done, {elapsed:.2f}s elapsed")

        if clamped_steps:
            logger.warning(f"negative entries clamped in {clamped_steps} of {steps} steps, mass {record.clamped_mass:.3e}")
        if negative_snapshots:
            logger.warning(
                f"{len(negative_snapshots)} of {len(record.times)} recorded fields had negative entries "
                f"(first at t={negative_snapshots[0]:g}); they are left out of the entropy"
            )
        record.final_field = f
        record.steps = steps
        logger.info(f"run finished: {steps} steps in {time.monotonic() - started:.2f}s")
        return record


# Singleton instance
integrator_service = IntegratorService()
