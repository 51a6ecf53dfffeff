"""
Domain containers: fields, direction sets, kernel tables and run records
"""
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from fastdvm.exceptions import NumericalError
from fastdvm.schemas import GridSpec, MomentReport

Direction = Tuple[int, ...]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


def _compact(array) -> np.ndarray:
    """float64 when the imaginary part is identically zero, complex128 otherwise"""
    array = np.asarray(array)
    if np.iscomplexobj(array):
        if not np.any(array.imag):
            return array.real.astype(np.float64)
        return array.astype(np.complex128)
    return array.astype(np.float64)


@dataclass(frozen=True)
class DistributionField:
    """Real nodal values f_i, i in [-N, N]^d, stored at array index i + N"""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.isfinite(values).all():
            raise NumericalError("field has non-finite entries", kind="non-finite-field")
        object.__setattr__(self, "values", _frozen(values))

    def with_values(self, values: np.ndarray) -> "DistributionField":
        return DistributionField(self.grid, values)


@dataclass(frozen=True)
class SpectralField:
    """Complex DFT coefficients f~_I, I in [-N, N]^d, stored at array index I + N"""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.shape:
            raise ValueError(f"spectrum shape {coeffs.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", _frozen(coeffs))


@dataclass(frozen=True)
class DirectionSet:
    """Canonical primitive directions of the lines through 0 in [-order, order]^d"""

    order: int
    d: int
    dirs: Tuple[Direction, ...]

    def __len__(self) -> int:
        return len(self.dirs)

    def __iter__(self):
        return iter(self.dirs)

    def as_array(self) -> np.ndarray:
        return np.array(self.dirs, dtype=np.int64).reshape(len(self.dirs), self.d)

    def contains_axes(self) -> bool:
        """True when every coordinate axis is one of the directions"""
        axes = {tuple(int(j == axis) for j in range(self.d)) for axis in range(self.d)}
        return axes.issubset(set(self.dirs))


@dataclass(frozen=True)
class FareySeries:
    order: int
    d: int
    elements: Tuple[Tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.elements)


class KernelVariant(str, Enum):
    MAXWELL_2D = "maxwell2d"
    HARD_SPHERE_3D = "hardsphere3d"
    TABLE_BASED = "table"


@dataclass(frozen=True)
class KernelModel:
    """
    Decoupled collision weights a(k) b(l).

    Built-in variants compute a, b in closed form; TABLE_BASED carries
    explicit arrays over [-radius, radius]^d.
    """

    variant: KernelVariant
    d: int
    weights: str = "lattice"
    a_table: Optional[np.ndarray] = None
    b_table: Optional[np.ndarray] = None
    radius: int = 0

    def __post_init__(self):
        if self.variant == KernelVariant.TABLE_BASED:
            if self.a_table is None or self.b_table is None:
                raise ValueError("table-based kernels need both a and b tables")
            shape = (2 * self.radius + 1,) * self.d
            a = np.asarray(self.a_table, dtype=np.float64)
            b = np.asarray(self.b_table, dtype=np.float64)
            if a.shape != shape or b.shape != shape:
                raise ValueError(f"kernel tables must have shape {shape}")
            if (a < 0).any() or (b < 0).any():
                raise ValueError("kernel tables must be nonnegative")
            if a[(self.radius,) * self.d] != 0:
                raise ValueError("a(0) must be 0")
            object.__setattr__(self, "a_table", _frozen(a))
            object.__setattr__(self, "b_table", _frozen(b))
        if self.weights not in ("lattice", "carleman"):
            raise ValueError(f"unknown weight convention {self.weights!r}")

    @property
    def model_id(self) -> int:
        return {KernelVariant.MAXWELL_2D: 1, KernelVariant.HARD_SPHERE_3D: 2, KernelVariant.TABLE_BASED: 3}[
            self.variant
        ]

    def cross_section(self) -> Callable[[float, float], float]:
        """Physical cross-section B(cos theta, r) of the built-in models"""
        if self.variant == KernelVariant.MAXWELL_2D:
            return lambda cos_theta, r: 1.0 / (2.0 * np.pi)
        if self.variant == KernelVariant.HARD_SPHERE_3D:
            return lambda cos_theta, r: r / (4.0 * np.pi)
        raise ValueError("table-based kernels have no closed-form cross-section")


@dataclass(frozen=True)
class KernelModeTable:
    """Dense beta(K, L); rows and columns are flattened K, L in storage order"""

    grid: GridSpec
    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.complex128)
        if beta.shape != (self.grid.size, self.grid.size):
            raise ValueError("mode table must be (2N+1)^d x (2N+1)^d")
        object.__setattr__(self, "beta", _frozen(beta))

    def entry(self, K, L) -> complex:
        n, N = self.grid.n, self.grid.N
        row = np.ravel_multi_index(tuple(int(x) + N for x in K), (n,) * self.grid.d)
        col = np.ravel_multi_index(tuple(int(x) + N for x in L), (n,) * self.grid.d)
        return complex(self.beta[row, col])


@dataclass(frozen=True)
class AlphaTables:
    """
    Per-direction factors alpha_p, alpha'_p and the loss modes lambda.

    Even coefficient tables give real factors; those are stored as float64
    to halve the footprint of the (A, n, ..., n) arrays.
    """

    grid: GridSpec
    directions: DirectionSet
    alpha: np.ndarray  # (A, n, ..., n)
    alpha_prime: np.ndarray  # (A, n, ..., n)
    loss_modes: np.ndarray  # (n, ..., n)
    model_id: int = 0
    weights: str = "lattice"
    line_weights: str = "plain"

    def __post_init__(self):
        count = len(self.directions)
        expected = (count,) + self.grid.shape
        for name in ("alpha", "alpha_prime"):
            array = _compact(getattr(self, name))
            if array.shape != expected:
                raise ValueError(f"{name} has shape {array.shape}, expected {expected}")
            object.__setattr__(self, name, _frozen(array))
        loss = _compact(self.loss_modes)
        if loss.shape != self.grid.shape:
            raise ValueError("loss_modes must have the grid shape")
        object.__setattr__(self, "loss_modes", _frozen(loss))

    @property
    def count(self) -> int:
        return len(self.directions)

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.alpha) or np.iscomplexobj(self.alpha_prime))

    @cached_property
    def half_spectrum(self) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """
        alpha, alpha' and lambda reordered for real transforms (unshifted, last
        axis cut to N + 1); None for complex tables
        """
        if not self.is_real:
            return None
        axes = tuple(range(-self.grid.d, 0))
        half = self.grid.N + 1
        return tuple(
            _frozen(np.fft.ifftshift(table, axes=axes)[..., :half])
            for table in (self.alpha, self.alpha_prime, self.loss_modes)
        )

    @cached_property
    def amplitude(self) -> float:
        """max |alpha_p|, |alpha'_p| over all directions"""
        if not self.count:
            return 0.0
        return float(max(np.abs(self.alpha).max(), np.abs(self.alpha_prime).max()))


@dataclass(frozen=True)
class CollisionOutput:
    values: np.ndarray
    imag_residue: float = 0.0
    elapsed_ns: int = 0
    term_count: int = 0


@dataclass
class TrajectoryRecord:
    times: List[float] = field(default_factory=list)
    moment_reports: List[MomentReport] = field(default_factory=list)
    l1_errors: Optional[List[float]] = None
    final_field: Optional[DistributionField] = None
    clamped_mass: float = 0.0
    steps: int = 0
