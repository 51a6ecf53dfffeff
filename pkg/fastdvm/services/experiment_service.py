"""
Experiment drivers: accuracy table, timing sweep and Farey counting sweep
"""
import logging
import math
import statistics
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from fastdvm.config import settings
from fastdvm.exceptions import BudgetExceededError
from fastdvm.schemas import (
    BenchConfig,
    FareyConfig,
    GridConfig,
    InitialCondition,
    ModelConfig,
    SimulationConfig,
    Table1Config,
    TimeLoopConfig,
)
from fastdvm.services.farey_service import farey_service
from fastdvm.services.integrator_service import integrator_service
from fastdvm.services.kernel_service import kernel_service
from fastdvm.services.lattice_service import lattice_service
from fastdvm.services.validation_service import validation_service

logger = logging.getLogger(__name__)

Row = Dict[str, Optional[float]]


def _n_tilde(N: int, rule: str) -> int:
    if rule == "halved":
        return lattice_service.halved_n_tilde(N)
    return min(N, lattice_service.default_n_tilde(N))


def fast_column(n_bar: int) -> str:
    return f"fast_nbar_{n_bar}"


class ExperimentService:
    """Service running the accuracy, timing and counting experiments"""

    # Accuracy table

    @staticmethod
    def table1_cell(
        config: Table1Config, N: int, operator: str, n_tilde: int, n_bar: int
    ) -> Optional[float]:
        """E1 after config.steps RK2 steps from BKW(t0); None when the cell budget runs out"""
        sim = SimulationConfig(
            grid=GridConfig(
                d=2, N=N, T=config.boxes[N], n_tilde=n_tilde, n_bar=n_bar, line_weights=config.line_weights
            ),
            model=ModelConfig(name="maxwell2d", weights=config.weights),
            time=TimeLoopConfig(dt=config.dt, t_end=config.steps * config.dt, operator=operator,
                                record_every=config.steps),
            initial=InitialCondition(kind="bkw", t0=config.t0),
            track_error=True,
        )
        try:
            record = integrator_service.run(sim, budget_seconds=config.cell_budget_seconds)
        except BudgetExceededError as e:
            logger.warning(f"table1 cell N={N} {operator} n_bar={n_bar} skipped: {e}")
            return None
        return record.l1_errors[-1]

    @staticmethod
    def table1(config: Table1Config) -> List[Row]:
        """One row per N: classical and fast(n_bar) errors; cells with n_bar > n_tilde are None"""
        rows = []
        for N in config.sizes:
            n_tilde = _n_tilde(N, config.truncation_rule)
            row: Row = {"N": N, "T": config.boxes[N], "tilde_N": n_tilde}

            if config.include_classical and N <= config.classical_max_N:
                row["classical"] = ExperimentService.table1_cell(config, N, "classical", n_tilde, n_tilde)
            else:
                row["classical"] = None

            for n_bar in config.n_bars:
                if n_bar > n_tilde:
                    row[fast_column(n_bar)] = None
                    continue
                row[fast_column(n_bar)] = ExperimentService.table1_cell(config, N, "fast", n_tilde, n_bar)

            logger.info(f"table1 row: {row}")
            rows.append(row)
        return rows

    # Timing sweep

    @staticmethod
    def time_step(
        operator: str,
        N: int,
        T: float,
        n_tilde: int,
        n_bar: int,
        weights: str,
        dt: float,
        repeats: int,
        warmup: int,
        budget: Optional[float] = None,
    ) -> Optional[float]:
        """Median wall-clock seconds of one RK2 step from BKW(0); table precompute is excluded"""
        grid = lattice_service.make_grid(2, N, T, n_tilde=n_tilde, n_bar=n_bar)
        model = kernel_service.make_model("maxwell2d", weights)
        evaluate = integrator_service.make_evaluator(operator, model, grid)
        f = validation_service.sample_bkw(grid, 0.0)

        samples = []
        for i in range(warmup + repeats):
            started = time.perf_counter()
            integrator_service.rk2_step(f, dt, evaluate)
            elapsed = time.perf_counter() - started
            if budget is not None and elapsed > budget:
                logger.warning(f"bench cell {operator} N={N} n_bar={n_bar} exceeded {budget}s, skipped")
                return None
            if i >= warmup:
                samples.append(elapsed)
        return statistics.median(samples)

    @staticmethod
    def _fit_slope(xs: List[float], ys: List[Optional[float]]) -> Optional[float]:
        points = [(x, y) for x, y in zip(xs, ys) if y is not None and y > 0]
        if len(points) < 2:
            return None
        slope, _ = np.polyfit(np.log([p[0] for p in points]), np.log([p[1] for p in points]), 1)
        return float(slope)

    @staticmethod
    def bench(config: BenchConfig) -> Tuple[List[Row], List[Row]]:
        """
        Time the fast operator over N at fixed n_bar and over n_bar at fixed N,
        and the classical operator over its sizes

        Returns:
            (timing rows, fitted-quantity rows)
        """
        repeats = config.repeats or settings.BENCH_REPEATS
        warmup = settings.BENCH_WARMUP if config.warmup is None else config.warmup
        cache: Dict[Tuple[str, int, int], Optional[float]] = {}
        rows: List[Row] = []

        def cell(operator: str, N: int, n_bar: Optional[int]) -> Optional[float]:
            n_tilde = _n_tilde(N, config.truncation_rule)
            n_bar = n_tilde if n_bar is None else n_bar
            key = (operator, N, n_bar)
            if key in cache:
                return cache[key]
            if N not in config.boxes or n_bar > n_tilde:
                seconds = None
            else:
                seconds = ExperimentService.time_step(
                    operator, N, config.boxes[N], n_tilde, n_bar, config.weights, config.dt,
                    repeats, warmup, config.cell_budget_seconds,
                )
            cache[key] = seconds
            rows.append(
                {"operator": operator, "N": N, "tilde_N": n_tilde, "n_bar": n_bar,
                 "median_seconds": seconds, "repeats": repeats}
            )
            logger.info(f"bench {operator} N={N} n_bar={n_bar}: {seconds}")
            return seconds

        by_n = [cell("fast", N, config.fixed_n_bar) for N in config.sizes]
        by_n_bar = [cell("fast", config.n_bar_sweep_N, n_bar) for n_bar in config.n_bar_sweep]
        for N in config.classical_sizes:
            cell("classical", N, None)
        classical = cell("classical", config.speedup_N, None)
        fast = cell("fast", config.speedup_N, config.speedup_n_bar)

        fits: List[Row] = [
            {"quantity": "exponent_N_fixed_n_bar", "value": ExperimentService._fit_slope(config.sizes, by_n)},
            {"quantity": "exponent_n_bar_fixed_N", "value": ExperimentService._fit_slope(config.n_bar_sweep, by_n_bar)},
        ]
        if len(config.sizes) >= 2 and by_n[-1] and by_n[-2]:
            n_hi, n_lo = config.sizes[-1], config.sizes[-2]
            fits.append({"quantity": "ratio_last_sizes", "value": by_n[-1] / by_n[-2]})
            fits.append(
                {
                    "quantity": "ratio_predicted_n2logn",
                    "value": (n_hi ** 2 * math.log(n_hi)) / (n_lo ** 2 * math.log(n_lo)),
                }
            )
        fits.append({"quantity": "speedup_classical_over_fast", "value": classical / fast if classical and fast else None})
        return rows, fits

    # Counting sweep

    @staticmethod
    def farey(config: FareyConfig) -> List[Row]:
        rows = []
        for n_bar in range(config.n_bar_min, config.n_bar_max + 1):
            report = farey_service.line_count_report(config.d, n_bar)
            report["discrepancy"] = int(report["formula_count"] != report["enumerated_count"])
            report["asymptotic_ratio"] = report["farey_size"] / farey_service.leading_term(config.d, n_bar)
            rows.append(report)
        return rows


# Singleton instance
experiment_service = ExperimentService()
