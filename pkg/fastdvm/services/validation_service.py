"""
Reference solutions and error norms
"""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from fastdvm.exceptions import ConfigError, NumericalError
from fastdvm.models import DistributionField
from fastdvm.schemas import ErrorReport, GridSpec
from fastdvm.services.lattice_service import lattice_service

logger = logging.getLogger(__name__)


class ValidationService:
    """Service for the BKW solution, Maxwellians and error reports"""

    @staticmethod
    def bkw_scale(t: float) -> float:
        """S(t) = 1 - exp(-t/8)/2"""
        return 1.0 - math.exp(-t / 8.0) / 2.0

    @staticmethod
    def bkw(t: float, v: Union[Sequence[float], np.ndarray]) -> Union[float, np.ndarray]:
        """
        Exact BKW solution for 2D Maxwell molecules

        v is a 2-vector or an array whose last axis has length 2.
        """
        if t < 0:
            raise ConfigError(f"BKW time must be >= 0, got {t}", kind="schema")
        S = ValidationService.bkw_scale(t)
        v = np.asarray(v, dtype=np.float64)
        v2 = (v ** 2).sum(axis=-1)
        value = np.exp(-v2 / (2.0 * S)) / (2.0 * np.pi * S ** 2) * (2.0 * S - 1.0 + (1.0 - S) * v2 / (2.0 * S))
        return float(value) if np.ndim(value) == 0 else value

    @staticmethod
    def sample_bkw(grid: GridSpec, t: float) -> DistributionField:
        if grid.d != 2:
            raise ConfigError("the BKW solution exists only for d=2", kind="invalid-dimension")
        velocities = np.moveaxis(lattice_service.node_velocities(grid), 0, -1)
        return DistributionField(grid, ValidationService.bkw(t, velocities))

    @staticmethod
    def maxwellian(
        grid: GridSpec,
        rho: float = 1.0,
        u: Optional[Sequence[float]] = None,
        temperature: float = 1.0,
    ) -> DistributionField:
        """rho / (2 pi T)^(d/2) exp(-|v - u|^2 / 2T) sampled at the nodes"""
        u = np.zeros(grid.d) if u is None else np.asarray(u, dtype=np.float64)
        velocities = lattice_service.node_velocities(grid)
        dist2 = sum((velocities[j] - u[j]) ** 2 for j in range(grid.d))
        values = rho / (2.0 * np.pi * temperature) ** (grid.d / 2.0) * np.exp(-dist2 / (2.0 * temperature))
        return DistributionField(grid, values)

    @staticmethod
    def sample_bump(grid: GridSpec, radius: float, seed: Optional[int] = None) -> DistributionField:
        """
        Nonnegative field supported in the ball |v| < radius.

        (1 - |v|^2/radius^2)^2 inside the ball; with a seed, each node is
        further scaled by a random factor in [0.5, 1.5].
        """
        velocities = lattice_service.node_velocities(grid)
        r2 = (velocities ** 2).sum(axis=0) / radius ** 2
        values = np.where(r2 < 1.0, (1.0 - r2) ** 2, 0.0)
        if seed is not None:
            rng = np.random.default_rng(seed)
            values = values * rng.uniform(0.5, 1.5, size=grid.shape)
        return DistributionField(grid, values)

    @staticmethod
    def random_positive_field(grid: GridSpec, seed: int = 0) -> DistributionField:
        rng = np.random.default_rng(seed)
        return DistributionField(grid, rng.uniform(0.1, 1.0, size=grid.shape))

    @staticmethod
    def rel_l1_error(f: DistributionField, g: DistributionField, time: float = 0.0) -> ErrorReport:
        """
        E1 = sum |f_i - g_i| / sum |f_i| with f the numerical field

        Raises:
            NumericalError: sum |f_i| = 0
        """
        if f.grid != g.grid:
            raise ConfigError("error norms need fields on the same grid", kind="schema")
        denominator = float(np.abs(f.values).sum())
        if denominator == 0.0:
            raise NumericalError("relative L1 error of a zero field", kind="zero-denominator")
        difference = np.abs(f.values - g.values)
        return ErrorReport(
            rel_l1=float(difference.sum()) / denominator,
            linf=float(difference.max()),
            time=time,
        )


# Singleton instance
validation_service = ValidationService()
