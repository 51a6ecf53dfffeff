"""
Collision kernel coefficients, kernel modes and the per-direction factor tables
"""
import logging
import math
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from fastdvm.config import settings
from fastdvm.exceptions import ConfigError
from fastdvm.models import AlphaTables, DirectionSet, KernelModel, KernelModeTable, KernelVariant
from fastdvm.schemas import GridSpec, LineWeighting
from fastdvm.services.farey_service import farey_service
from fastdvm.services.lattice_service import lattice_service

logger = logging.getLogger(__name__)

# Binary cache header: d, N, n_tilde, n_bar, model id, direction count, weights code
HEADER_DTYPE = np.dtype("<i8")
HEADER_INTS = 7
WEIGHTS_CODES = {"lattice": 0, "carleman": 1}


class KernelService:
    """Service for kernel weights, dense kernel modes and decomposition tables"""

    # Models

    @staticmethod
    def make_model(name: str, weights: str = "lattice") -> KernelModel:
        try:
            variant = KernelVariant(name)
        except ValueError:
            raise ConfigError(f"unknown kernel model {name!r}", kind="schema")
        if variant == KernelVariant.TABLE_BASED:
            raise ConfigError("table-based kernels are built with table_model()", kind="schema")
        d = 2 if variant == KernelVariant.MAXWELL_2D else 3
        return KernelModel(variant=variant, d=d, weights=weights)

    @staticmethod
    def table_model(a_table: np.ndarray, b_table: np.ndarray) -> KernelModel:
        """Kernel with explicit a(k), b(l) over [-R, R]^d"""
        a_table = np.asarray(a_table, dtype=np.float64)
        radius = (a_table.shape[0] - 1) // 2
        try:
            return KernelModel(
                variant=KernelVariant.TABLE_BASED,
                d=a_table.ndim,
                a_table=a_table,
                b_table=b_table,
                radius=radius,
            )
        except ValueError as e:
            raise ConfigError(str(e), kind="schema")

    # Continuous kernel

    @staticmethod
    def carleman_kernel(cross_section: Callable[[float, float], float], x: Sequence[float], y: Sequence[float]) -> float:
        """
        B~(x, y) = 2^(d-1) B(|x|/r, r) r^-(d-2), r = sqrt(|x|^2 + |y|^2)

        Raises:
            ConfigError: x = y = 0
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        d = x.size
        r = math.sqrt(float(x @ x) + float(y @ y))
        if r == 0.0:
            raise ConfigError("Carleman kernel is undefined at x = y = 0", kind="undefined-at-origin")
        cos_theta = math.sqrt(float(x @ x)) / r
        return 2.0 ** (d - 1) * cross_section(cos_theta, r) * r ** (-(d - 2))

    @staticmethod
    def carleman_constant(model: KernelModel, h: float) -> float:
        """B~ of a built-in model; constant for both cross-sections, evaluated at x = h e_1, y = 0"""
        x = np.zeros(model.d)
        x[0] = h
        return KernelService.carleman_kernel(model.cross_section(), x, np.zeros(model.d))

    # Discrete weights

    @staticmethod
    def a_values(model: KernelModel, points: np.ndarray, h: float) -> np.ndarray:
        """a(k) for every row of an (M, d) integer array"""
        points = np.asarray(points, dtype=np.int64).reshape(-1, model.d)
        if model.variant == KernelVariant.TABLE_BASED:
            return KernelService._table_lookup(model.a_table, model.radius, points)

        g = np.gcd.reduce(np.abs(points), axis=1)
        nonzero = g > 0
        safe_g = np.where(nonzero, g, 1).astype(np.float64)
        if model.weights == "carleman":
            scale = KernelService.carleman_constant(model, h) * h ** (2 * model.d - 2)
            values = scale / safe_g
        else:
            norms = np.sqrt((points.astype(np.float64) ** 2).sum(axis=1))
            values = h ** (2 * model.d - 1) * norms / safe_g
        return np.where(nonzero, values, 0.0)

    @staticmethod
    def b_values(model: KernelModel, points: np.ndarray, h: float) -> np.ndarray:
        points = np.asarray(points, dtype=np.int64).reshape(-1, model.d)
        if model.variant == KernelVariant.TABLE_BASED:
            return KernelService._table_lookup(model.b_table, model.radius, points)
        return np.ones(len(points))

    @staticmethod
    def _table_lookup(table: np.ndarray, radius: int, points: np.ndarray) -> np.ndarray:
        inside = (np.abs(points) <= radius).all(axis=1)
        idx = np.clip(points + radius, 0, 2 * radius)
        return np.where(inside, table[tuple(idx.T)], 0.0)

    @staticmethod
    def coeff_a(model: KernelModel, k: Sequence[int], h: float) -> float:
        return float(KernelService.a_values(model, np.array([k]), h)[0])

    @staticmethod
    def coeff_b(model: KernelModel, l: Sequence[int], h: float) -> float:
        return float(KernelService.b_values(model, np.array([l]), h)[0])

    @staticmethod
    def gamma_tilde(model: KernelModel, k: Sequence[int], l: Sequence[int], h: float) -> float:
        """a(k) b(l) for orthogonal k, l; 0 otherwise"""
        if int(np.dot(k, l)) != 0:
            return 0.0
        return KernelService.coeff_a(model, k, h) * KernelService.coeff_b(model, l, h)

    @staticmethod
    def box_points(d: int, radius: int) -> np.ndarray:
        """All integer points of [-radius, radius]^d in storage order, shape (M, d)"""
        axis = np.arange(-radius, radius + 1)
        return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)

    @staticmethod
    def _check_model(model: KernelModel, grid: GridSpec) -> None:
        if model.d != grid.d:
            raise ConfigError(f"model dimension {model.d} does not match grid dimension {grid.d}", kind="schema")

    @staticmethod
    def orthogonal_pairs(model: KernelModel, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Pairs (k, l) in the N_tilde box with k.l = 0 and nonzero weight a(k) b(l)

        Returns:
            (ks, ls, weights) with shapes (P, d), (P, d), (P,), ordered by k then l
        """
        KernelService._check_model(model, grid)
        points = KernelService.box_points(grid.d, grid.n_tilde)
        a = KernelService.a_values(model, points, grid.h)
        b = KernelService.b_values(model, points, grid.h)
        weights = np.where(points @ points.T == 0, np.outer(a, b), 0.0)
        k_idx, l_idx = np.nonzero(weights)
        return points[k_idx], points[l_idx], weights[k_idx, l_idx]

    # Kernel modes

    @staticmethod
    def beta_direct(model: KernelModel, grid: GridSpec, K: Sequence[int], L: Sequence[int]) -> complex:
        """Exhaustive sum of a(k) b(l) e_K(k) e_L(l) over orthogonal pairs"""
        ks, ls, weights = KernelService.orthogonal_pairs(model, grid)
        phase = 2j * np.pi * (ks @ np.asarray(K) + ls @ np.asarray(L)) / grid.n
        return complex((weights * np.exp(phase)).sum())

    @staticmethod
    def build_mode_table(model: KernelModel, grid: GridSpec) -> KernelModeTable:
        """Dense beta(K, L) = E^T diag(a) [k.l = 0] diag(b) E with E[k, K] = e_K(k)"""
        KernelService._check_model(model, grid)
        points = KernelService.box_points(grid.d, grid.n_tilde)
        modes = KernelService.box_points(grid.d, grid.N)
        a = KernelService.a_values(model, points, grid.h)
        b = KernelService.b_values(model, points, grid.h)
        coupling = np.where(points @ points.T == 0, np.outer(a, b), 0.0)
        # integer phases mod n keep the exponent small
        E = np.exp(2j * np.pi * ((points @ modes.T) % grid.n) / grid.n)
        beta = E.T @ coupling @ E
        logger.debug(f"built dense mode table {beta.shape} for N={grid.N}, n_tilde={grid.n_tilde}")
        return KernelModeTable(grid=grid, beta=beta)

    # Decomposition tables

    @staticmethod
    def _is_even(model: KernelModel) -> bool:
        if model.variant != KernelVariant.TABLE_BASED:
            return True
        flip = tuple(range(model.d))
        return np.array_equal(model.a_table, np.flip(model.a_table, axis=flip)) and np.array_equal(
            model.b_table, np.flip(model.b_table, axis=flip)
        )

    @staticmethod
    def line_masses(model: KernelModel, grid: GridSpec, dirs: np.ndarray) -> np.ndarray:
        """sum a(k) b(l) over k on the line e Z and l.e = 0, both in the N_tilde box, per row e"""
        points = KernelService.box_points(grid.d, grid.n_tilde)
        a_box = KernelService.a_values(model, points, grid.h)
        b_box = KernelService.b_values(model, points, grid.h)
        masses = np.empty(len(dirs))
        for r, e in enumerate(dirs):
            line = a_box[KernelService._on_line(points, e)].sum()
            plane = b_box[points @ e == 0].sum()
            masses[r] = line * plane
        return masses

    @staticmethod
    def angular_line_factors(model: KernelModel, grid: GridSpec, directions: DirectionSet) -> np.ndarray:
        """
        Per-direction factors c_p that hand the weight of every line left out of
        the set to the kept line(s) closest in angle, split evenly on ties.

        All lines of order N_tilde carry sum_p c_p M_p between them, so with
        N_bar = N_tilde every factor is 1.
        """
        kept = directions.as_array()
        if directions.order >= grid.n_tilde or not len(kept):
            return np.ones(len(kept))
        every = farey_service.enumerate_directions(grid.d, grid.n_tilde).as_array()

        kept_unit = kept / np.linalg.norm(kept, axis=1, keepdims=True)
        every_unit = every / np.linalg.norm(every, axis=1, keepdims=True)
        cosines = np.abs(every_unit @ kept_unit.T)
        nearest = np.isclose(cosines, cosines.max(axis=1, keepdims=True), rtol=0.0, atol=1e-12)
        share = nearest / nearest.sum(axis=1, keepdims=True)

        collected = share.T @ KernelService.line_masses(model, grid, every)
        own = KernelService.line_masses(model, grid, kept)
        factors = np.divide(collected, own, out=np.ones(len(kept)), where=own > 0)
        logger.debug(f"angular line factors for n_bar={directions.order}: min {factors.min():.3f}, max {factors.max():.3f}")
        return factors

    @staticmethod
    def build_alpha_tables(
        model: KernelModel,
        grid: GridSpec,
        directions: Optional[DirectionSet] = None,
        line_weights: LineWeighting = "plain",
    ) -> AlphaTables:
        """
        alpha_p = sum of a over the line e_p Z, alpha'_p = sum of b over the plane
        l.e_p = 0 (both inside the N_tilde box, as transforms of masked coefficient
        fields), lambda = sum_p alpha_p alpha'_p.

        With line_weights="angular" each alpha_p is scaled by its angular line
        factor, so a partial direction set keeps the total kernel weight.

        Raises:
            ConfigError: direction order exceeds N_tilde
        """
        KernelService._check_model(model, grid)
        if directions is None:
            directions = farey_service.enumerate_directions(grid.d, grid.n_bar)
        if directions.order > grid.n_tilde:
            raise ConfigError(
                f"direction order {directions.order} exceeds n_tilde {grid.n_tilde}",
                kind="direction-order-exceeds-n-tilde",
            )

        N, n_tilde, d = grid.N, grid.n_tilde, grid.d
        points = KernelService.box_points(d, n_tilde)
        a_box = KernelService.a_values(model, points, grid.h)
        b_box = KernelService.b_values(model, points, grid.h)
        # box point -> flat storage index on the full grid
        flat = np.ravel_multi_index(tuple((points + N).T), grid.shape)

        dirs = directions.as_array()
        count = len(dirs)
        factors = (
            KernelService.angular_line_factors(model, grid, directions)
            if line_weights == "angular"
            else np.ones(count)
        )
        dtype = np.float64 if KernelService._is_even(model) else np.complex128
        alpha = np.empty((count,) + grid.shape, dtype=dtype)
        alpha_prime = np.empty((count,) + grid.shape, dtype=dtype)

        batch = settings.DIRECTION_BATCH
        for start in range(0, count, batch):
            rows = dirs[start:start + batch]
            line_fields = np.zeros((len(rows), grid.size))
            plane_fields = np.zeros((len(rows), grid.size))
            for r, e in enumerate(rows):
                on_line = KernelService._on_line(points, e)
                plane = points @ e == 0
                line_fields[r, flat[on_line]] = factors[start + r] * a_box[on_line]
                plane_fields[r, flat[plane]] = b_box[plane]
            for fields, out in ((line_fields, alpha), (plane_fields, alpha_prime)):
                values = lattice_service.synthesize(fields.reshape((len(rows),) + grid.shape), d)
                out[start:start + len(rows)] = values.real if dtype == np.float64 else values

        loss_modes = np.zeros(grid.shape, dtype=dtype)
        for p in range(count):
            loss_modes += alpha[p] * alpha_prime[p]

        logger.info(
            f"built alpha tables: {count} directions, N={N}, n_tilde={n_tilde}, "
            f"n_bar={directions.order}, line weights {line_weights}"
        )
        return AlphaTables(
            grid=grid,
            directions=directions,
            alpha=alpha,
            alpha_prime=alpha_prime,
            loss_modes=loss_modes,
            model_id=model.model_id,
            weights=model.weights,
            line_weights=line_weights,
        )

    @staticmethod
    def _on_line(points: np.ndarray, e: np.ndarray) -> np.ndarray:
        """Rows of points that are integer multiples of the primitive vector e"""
        axis = int(np.argmax(e != 0))
        m = points[:, axis] // e[axis]
        return (points == np.outer(m, e)).all(axis=1)

    # Cache

    @staticmethod
    def cache_path(model: KernelModel, grid: GridSpec, line_weights: LineWeighting = "plain") -> Path:
        name = (
            f"alpha_d{grid.d}_N{grid.N}_nt{grid.n_tilde}_nb{grid.n_bar}"
            f"_m{model.model_id}_{model.weights}_{line_weights}_T{grid.T:g}.bin"
        )
        return Path(settings.CACHE_DIR) / name

    @staticmethod
    def save_alpha_tables(tables: AlphaTables, path: Path) -> Path:
        """Little-endian dump: int64 header, float64 T, then complex alpha, alpha', lambda"""
        grid = tables.grid
        header = np.array(
            [
                grid.d,
                grid.N,
                grid.n_tilde,
                tables.directions.order,
                tables.model_id,
                tables.count,
                WEIGHTS_CODES[tables.weights],
            ],
            dtype=HEADER_DTYPE,
        )
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(np.array([grid.T], dtype="<f8").tobytes())
            for array in (tables.alpha, tables.alpha_prime, tables.loss_modes):
                fh.write(np.ascontiguousarray(array, dtype="<c16").tobytes())
        logger.info(f"saved alpha tables to {path}")
        return path

    @staticmethod
    def load_alpha_tables(path: Path, line_weights: LineWeighting = "plain") -> AlphaTables:
        """Read a table written by save_alpha_tables; the line weighting is not part of the header"""
        raw = Path(path).read_bytes()
        header_size = HEADER_INTS * HEADER_DTYPE.itemsize
        d, N, n_tilde, n_bar, model_id, count, weights_code = (
            int(x) for x in np.frombuffer(raw[:header_size], dtype=HEADER_DTYPE)
        )
        T = float(np.frombuffer(raw[header_size:header_size + 8], dtype="<f8")[0])
        grid = lattice_service.make_grid(d, N, T, n_tilde=n_tilde, n_bar=n_bar)
        directions = farey_service.enumerate_directions(d, n_bar)
        if len(directions) != count:
            raise ConfigError(f"cached table in {path} holds {count} directions, expected {len(directions)}",
                              kind="tables-grid-mismatch")

        body = np.frombuffer(raw[header_size + 8:], dtype="<c16")
        row = grid.size
        expected = (2 * count + 1) * row
        if body.size != expected:
            raise ConfigError(f"cached table in {path} is truncated", kind="tables-grid-mismatch")
        alpha = body[:count * row].reshape((count,) + grid.shape)
        alpha_prime = body[count * row:2 * count * row].reshape((count,) + grid.shape)
        loss_modes = body[2 * count * row:].reshape(grid.shape)
        weights = {code: name for name, code in WEIGHTS_CODES.items()}[weights_code]
        return AlphaTables(
            grid=grid,
            directions=directions,
            alpha=alpha,
            alpha_prime=alpha_prime,
            loss_modes=loss_modes,
            model_id=model_id,
            weights=weights,
            line_weights=line_weights,
        )

    @staticmethod
    def alpha_tables_for(
        model: KernelModel, grid: GridSpec, use_cache: bool = False, line_weights: LineWeighting = "plain"
    ) -> AlphaTables:
        """Build tables for the grid's n_bar, reusing the on-disk cache when asked"""
        if not use_cache:
            return KernelService.build_alpha_tables(model, grid, line_weights=line_weights)
        path = KernelService.cache_path(model, grid, line_weights)
        if path.exists():
            logger.info(f"loading alpha tables from {path}")
            return KernelService.load_alpha_tables(path, line_weights)
        tables = KernelService.build_alpha_tables(model, grid, line_weights=line_weights)
        KernelService.save_alpha_tables(tables, path)
        return tables


# Singleton instance
kernel_service = KernelService()
