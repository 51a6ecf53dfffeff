"""
Velocity-grid geometry, index arithmetic and the odd-length DFT pair
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft

from fastdvm.config import settings
from fastdvm.exceptions import ConfigError, NumericalError
from fastdvm.models import DistributionField, SpectralField
from fastdvm.schemas import GridSpec, MomentReport

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
ALIASING_FACTOR = 3.0 + SQRT2
EPS = float(np.finfo(np.float64).eps)
ROUNDOFF_FACTOR = 1e3


class LatticeService:
    """Service for grid construction, transforms and moments"""

    # Grid construction

    @staticmethod
    def default_n_tilde(N: int) -> int:
        """Kernel truncation [2N/(3+sqrt 2)], never below 1"""
        return max(1, int(math.floor(2 * N / ALIASING_FACTOR)))

    @staticmethod
    def halved_n_tilde(N: int) -> int:
        """The same rule applied to N/2, i.e. [N/(3+sqrt 2)], never below 1"""
        return max(1, int(math.floor(N / ALIASING_FACTOR)))

    @staticmethod
    def make_grid(
        d: int,
        N: int,
        T: float,
        n_tilde: Optional[int] = None,
        n_bar: Optional[int] = None,
    ) -> GridSpec:
        """
        Build a GridSpec with h = 2T/(2N+1)

        Raises:
            ConfigError: invalid dimension, N < 2, T <= 0 or N_bar > N_tilde > N
        """
        if d not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {d}", kind="invalid-dimension")
        if N < 2:
            raise ConfigError(f"N must be >= 2, got {N}", kind="invalid-grid")
        if not T > 0:
            raise ConfigError(f"T must be positive, got {T}", kind="invalid-grid")

        if n_tilde is None:
            n_tilde = min(N, LatticeService.default_n_tilde(N))
            if n_bar is not None and n_bar > n_tilde:
                raise ConfigError(
                    f"n_bar ({n_bar}) exceeds the default n_tilde ({n_tilde}) for N={N}",
                    kind="truncation-order",
                )
        if n_bar is None:
            n_bar = n_tilde

        if not (1 <= n_bar <= n_tilde <= N):
            raise ConfigError(
                f"need 1 <= n_bar ({n_bar}) <= n_tilde ({n_tilde}) <= N ({N})",
                kind="truncation-order",
            )

        h = 2.0 * T / (2 * N + 1)
        return GridSpec(d=d, N=N, T=float(T), h=h, n_tilde=int(n_tilde), n_bar=int(n_bar))

    @staticmethod
    def grid_for_rule(d: int, N: int, T: float, rule: str, n_bar: Optional[int] = None) -> GridSpec:
        """Grid whose N_tilde follows the named rule ("default" or "halved")"""
        if rule == "halved":
            n_tilde = LatticeService.halved_n_tilde(N)
        else:
            n_tilde = min(N, LatticeService.default_n_tilde(N))
        return LatticeService.make_grid(d, N, T, n_tilde=n_tilde, n_bar=n_bar)

    @staticmethod
    def with_n_bar(grid: GridSpec, n_bar: int) -> GridSpec:
        return LatticeService.make_grid(grid.d, grid.N, grid.T, n_tilde=grid.n_tilde, n_bar=n_bar)

    # Geometry

    @staticmethod
    def axis_indices(grid: GridSpec) -> np.ndarray:
        return np.arange(-grid.N, grid.N + 1)

    @staticmethod
    def index_grid(grid: GridSpec) -> Tuple[np.ndarray, ...]:
        """Integer index arrays (one per axis) in storage order"""
        axis = LatticeService.axis_indices(grid)
        return tuple(np.meshgrid(*([axis] * grid.d), indexing="ij"))

    @staticmethod
    def node_velocities(grid: GridSpec) -> np.ndarray:
        """Array of shape (d, n, ..., n) with v_i = i h"""
        return np.stack(LatticeService.index_grid(grid)) * grid.h

    @staticmethod
    def no_aliasing_support(T: float) -> float:
        """Largest support radius S with T >= (3 + sqrt 2) S / 2"""
        return 2.0 * T / ALIASING_FACTOR

    @staticmethod
    def satisfies_no_aliasing(grid: GridSpec, support_radius: float) -> bool:
        return grid.T >= ALIASING_FACTOR * support_radius / 2.0

    @staticmethod
    def truncation_from_support(support_radius: float, h: float) -> int:
        """N_tilde = [S/h]"""
        return int(math.floor(support_radius / h))

    # Index arithmetic

    @staticmethod
    def periodic_shift(values: np.ndarray, offset: Sequence[int]) -> np.ndarray:
        """g_i = f_{i+offset} with indices taken modulo 2N+1 on the trailing len(offset) axes"""
        d = len(offset)
        axes = tuple(range(values.ndim - d, values.ndim))
        return np.roll(values, tuple(-int(s) for s in offset), axis=axes)

    @staticmethod
    def clipped_shift(values: np.ndarray, offset: Sequence[int]) -> np.ndarray:
        """g_i = f_{i+offset} when i+offset stays in the box, 0 otherwise"""
        n = values.shape[-1]
        out = np.zeros_like(values)
        src, dst = [], []
        for s in offset:
            s = int(s)
            if abs(s) >= n:
                return out
            if s >= 0:
                src.append(slice(s, n))
                dst.append(slice(0, n - s))
            else:
                src.append(slice(0, n + s))
                dst.append(slice(-s, n))
        lead = (Ellipsis,)
        out[lead + tuple(dst)] = values[lead + tuple(src)]
        return out

    # Transforms

    @staticmethod
    def _axes(d: int) -> Tuple[int, ...]:
        return tuple(range(-d, 0))

    @staticmethod
    def analyze(values: np.ndarray, d: int) -> np.ndarray:
        """(2N+1)^{-d} sum_i f_i e^{-2i pi I.i/(2N+1)} over the trailing d axes, centered storage"""
        axes = LatticeService._axes(d)
        shifted = sp_fft.ifftshift(values, axes=axes)
        coeffs = sp_fft.fftn(shifted, axes=axes, norm="forward", workers=settings.fft_workers())
        return sp_fft.fftshift(coeffs, axes=axes)

    @staticmethod
    def synthesize(coeffs: np.ndarray, d: int) -> np.ndarray:
        """sum_I g_I e^{+2i pi I.i/(2N+1)} over the trailing d axes, centered storage"""
        axes = LatticeService._axes(d)
        shifted = sp_fft.ifftshift(coeffs, axes=axes)
        values = sp_fft.ifftn(shifted, axes=axes, norm="forward", workers=settings.fft_workers())
        return sp_fft.fftshift(values, axes=axes)

    # Real transforms for even tables: unshifted layout, last axis cut to N + 1

    @staticmethod
    def analyze_half(values: np.ndarray, d: int) -> np.ndarray:
        """Coefficients of a real field with K_d >= 0 only, in unshifted order"""
        axes = LatticeService._axes(d)
        shifted = sp_fft.ifftshift(values, axes=axes)
        return sp_fft.rfftn(shifted, axes=axes, norm="forward", workers=settings.fft_workers())

    @staticmethod
    def half_layout(coeffs: np.ndarray, d: int) -> np.ndarray:
        """Centred coefficients rearranged into the analyze_half layout"""
        axes = LatticeService._axes(d)
        half = coeffs.shape[-1] // 2 + 1
        return np.ascontiguousarray(sp_fft.ifftshift(coeffs, axes=axes)[..., :half])

    @staticmethod
    def synthesize_half(coeffs: np.ndarray, d: int, shape: Tuple[int, ...]) -> np.ndarray:
        """Real synthesis of Hermitian coefficients given in the analyze_half layout"""
        axes = LatticeService._axes(d)
        values = sp_fft.irfftn(coeffs, s=shape, axes=axes, norm="forward", workers=settings.fft_workers())
        return sp_fft.fftshift(values, axes=axes)

    @staticmethod
    def real_part_checked(
        values: np.ndarray,
        coeffs: Optional[np.ndarray] = None,
        d: Optional[int] = None,
        tol: Optional[float] = None,
        floor: Optional[float] = None,
    ) -> Tuple[np.ndarray, float]:
        """
        Split a synthesized array into its real part and the max imaginary residue.

        When the synthesized coefficients are given, the threshold never drops
        below the round-off level of the transform (ROUNDOFF_FACTOR * eps * sum |g_I|),
        so fields that cancel to ~0 are not flagged. Callers that already know
        a bound on sum |g_I| pass it as floor instead.

        Raises:
            NumericalError: max |Im| > tol * max |Re|
        """
        tol = settings.IMAG_RESIDUE_TOL if tol is None else tol
        real = values.real
        residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
        scale = float(np.max(np.abs(real))) if values.size else 0.0
        threshold = tol * scale
        if floor is not None:
            threshold = max(threshold, ROUNDOFF_FACTOR * EPS * floor)
        elif coeffs is not None and coeffs.size:
            axes = LatticeService._axes(d if d is not None else coeffs.ndim)
            l1 = float(np.max(np.abs(coeffs).sum(axis=axes)))
            threshold = max(threshold, ROUNDOFF_FACTOR * EPS * l1)
        if residue > threshold:
            raise NumericalError(
                f"imaginary residue {residue:.3e} exceeds {tol:.1e} x {scale:.3e}",
                kind="imaginary-residue-exceeded",
            )
        return np.ascontiguousarray(real), residue

    @staticmethod
    def forward_dft(f: DistributionField) -> SpectralField:
        return SpectralField(f.grid, LatticeService.analyze(f.values, f.grid.d))

    @staticmethod
    def inverse_dft(g: SpectralField) -> DistributionField:
        values = LatticeService.synthesize(g.coeffs, g.grid.d)
        real, residue = LatticeService.real_part_checked(values, g.coeffs, g.grid.d)
        logger.debug(f"inverse DFT imaginary residue {residue:.3e}")
        return DistributionField(g.grid, real)

    # Moments

    @staticmethod
    def moments(f: DistributionField) -> MomentReport:
        grid = f.grid
        values = f.values
        weight = grid.cell_volume
        velocities = LatticeService.node_velocities(grid)

        mass = weight * float(values.sum())
        momentum = [weight * float((velocities[j] * values).sum()) for j in range(grid.d)]
        speed2 = (velocities ** 2).sum(axis=0)
        energy = weight * float((speed2 * values).sum())

        positive = values > 0
        entropy = weight * float((values[positive] * np.log(values[positive])).sum())
        nonpositive = int(values.size - positive.sum())
        negative = values < 0
        if negative.any():
            logger.debug(f"{int(negative.sum())} negative entries skipped in the entropy sum")

        total = float(np.abs(values).sum())
        negative_fraction = float(-values[negative].sum()) / total if total > 0 else 0.0

        if mass > 0:
            mean_velocity = [p / mass for p in momentum]
            temperature = (energy - mass * sum(u * u for u in mean_velocity)) / (grid.d * mass)
        else:
            mean_velocity = [0.0] * grid.d
            temperature = 0.0

        return MomentReport(
            mass=mass,
            momentum=momentum,
            energy=energy,
            entropy=entropy,
            min_value=float(values.min()),
            negative_mass_fraction=negative_fraction,
            nonpositive_count=nonpositive,
            mean_velocity=mean_velocity,
            temperature=temperature,
        )


# Singleton instance
lattice_service = LatticeService()
