"""
Collision operator evaluators: truncated and periodized direct sums, the dense
pseudo-spectral form and the fast direction-decomposed form
"""
import logging
import time
from typing import Callable, Tuple

import numpy as np

from fastdvm.config import settings
from fastdvm.exceptions import ConfigError
from fastdvm.models import AlphaTables, CollisionOutput, DistributionField, KernelModel, KernelModeTable
from fastdvm.schemas import GridSpec
from fastdvm.services.kernel_service import kernel_service
from fastdvm.services.lattice_service import lattice_service

logger = logging.getLogger(__name__)


def _neumaier_add(total: np.ndarray, comp: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Add x into total in place, accumulating the lost low-order bits in comp"""
    t = total + x
    comp += np.where(np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total)
    total[...] = t
    return total


class CollisionService:
    """Service evaluating D(f, f) on a grid"""

    @staticmethod
    def _check_field(model: KernelModel, grid: GridSpec, f: DistributionField) -> None:
        if model.d != grid.d:
            raise ConfigError(f"model dimension {model.d} does not match grid dimension {grid.d}", kind="schema")
        if f.grid != grid:
            raise ConfigError("field was sampled on a different grid", kind="tables-grid-mismatch")

    @staticmethod
    def _direct_sum(
        model: KernelModel,
        grid: GridSpec,
        f: DistributionField,
        shift: Callable[[np.ndarray, np.ndarray], np.ndarray],
        masked: bool,
        compensated: bool,
    ) -> Tuple[np.ndarray, int]:
        """
        sum_{k.l=0} a(k) b(l) [f_{i+k} f_{i+l} - f_i f_{i+k+l}] grouped by k, k ascending.

        With masked=True a term only counts when i+k, i+l and i+k+l are all in the box.
        """
        values = f.values
        ks, ls, weights = kernel_service.orthogonal_pairs(model, grid)
        ones = np.ones_like(values)

        total = np.zeros_like(values)
        comp = np.zeros_like(values)
        start = 0
        while start < len(ks):
            k = ks[start]
            stop = start
            while stop < len(ks) and (ks[stop] == k).all():
                stop += 1

            f_k = shift(values, k)
            mask_k = shift(ones, k) if masked else None
            contribution = np.zeros_like(values)
            for l, w in zip(ls[start:stop], weights[start:stop]):
                bracket = f_k * shift(values, l) - values * shift(values, k + l)
                if masked:
                    bracket *= mask_k * shift(ones, l) * shift(ones, k + l)
                contribution += w * bracket

            if compensated:
                _neumaier_add(total, comp, contribution)
            else:
                total += contribution
            start = stop

        if compensated:
            total += comp
        return total, len(ks)

    @staticmethod
    def dvm_truncated(model: KernelModel, grid: GridSpec, f: DistributionField, compensated: bool = False) -> CollisionOutput:
        """Fully conservative DVM: collisions leaving [-N, N]^d are discarded"""
        CollisionService._check_field(model, grid, f)
        started = time.perf_counter_ns()
        values, terms = CollisionService._direct_sum(
            model, grid, f, lattice_service.clipped_shift, masked=True, compensated=compensated
        )
        return CollisionOutput(values=values, elapsed_ns=time.perf_counter_ns() - started, term_count=terms)

    @staticmethod
    def dvm_classical(model: KernelModel, grid: GridSpec, f: DistributionField, compensated: bool = False) -> CollisionOutput:
        """Periodized DVM with indices taken modulo 2N+1"""
        CollisionService._check_field(model, grid, f)
        started = time.perf_counter_ns()
        values, terms = CollisionService._direct_sum(
            model, grid, f, lattice_service.periodic_shift, masked=False, compensated=compensated
        )
        return CollisionOutput(values=values, elapsed_ns=time.perf_counter_ns() - started, term_count=terms)

    @staticmethod
    def dvm_pseudospectral(
        model: KernelModel, grid: GridSpec, f: DistributionField, modes: KernelModeTable
    ) -> CollisionOutput:
        """g~_I = sum_{K+L = I mod 2N+1} (beta(K, L) - beta(L, L)) f~_K f~_L, back to nodal values"""
        CollisionService._check_field(model, grid, f)
        if modes.grid != grid:
            raise ConfigError("mode table was built for a different grid", kind="tables-grid-mismatch")
        started = time.perf_counter_ns()

        ft = lattice_service.analyze(f.values, grid.d).ravel()
        beta = modes.beta
        loss_diag = np.diagonal(beta)

        # one row K at a time: L -> K + L mod 2N+1 is a permutation, so no collisions
        shifted = kernel_service.box_points(grid.d, grid.N) + grid.N
        g_tilde = np.zeros(grid.size, dtype=np.complex128)
        for K in range(grid.size):
            target = np.ravel_multi_index(tuple(((shifted + shifted[K] - grid.N) % grid.n).T), grid.shape)
            g_tilde[target] += (beta[K] - loss_diag) * (ft[K] * ft)
        g_tilde = g_tilde.reshape(grid.shape)

        values, residue = lattice_service.real_part_checked(
            lattice_service.synthesize(g_tilde, grid.d), g_tilde, grid.d
        )
        return CollisionOutput(
            values=values,
            imag_residue=residue,
            elapsed_ns=time.perf_counter_ns() - started,
            term_count=grid.size ** 2,
        )

    @staticmethod
    def _check_tables(model: KernelModel, grid: GridSpec, tables: AlphaTables) -> None:
        if tables.grid != grid:
            raise ConfigError(
                f"alpha tables built for N={tables.grid.N}, T={tables.grid.T}, n_tilde={tables.grid.n_tilde} "
                f"do not match the grid N={grid.N}, T={grid.T}, n_tilde={grid.n_tilde}",
                kind="tables-grid-mismatch",
            )
        if tables.model_id != model.model_id or tables.weights != model.weights:
            raise ConfigError("alpha tables were built for another kernel model", kind="tables-grid-mismatch")

    @staticmethod
    def _fast_terms(grid: GridSpec, values: np.ndarray, tables: AlphaTables, with_loss: bool = True):
        """Gain sum_p u_p w_p and loss f * inv(lambda f~); 2A + 2 transforms in total"""
        if tables.is_real:
            return CollisionService._fast_terms_real(grid, values, tables, with_loss)

        d = grid.d
        ft = lattice_service.analyze(values, d)
        gain = np.zeros_like(values)
        residue = 0.0
        batch = settings.DIRECTION_BATCH
        # sum_K |alpha_p f~| <= max |alpha| * sum |f~|
        floor = tables.amplitude * float(np.abs(ft).sum())

        for start in range(0, tables.count, batch):
            stop = min(start + batch, tables.count)
            line_coeffs = tables.alpha[start:stop] * ft
            plane_coeffs = tables.alpha_prime[start:stop] * ft
            u, res_u = lattice_service.real_part_checked(lattice_service.synthesize(line_coeffs, d), floor=floor)
            w, res_w = lattice_service.real_part_checked(lattice_service.synthesize(plane_coeffs, d), floor=floor)
            residue = max(residue, res_u, res_w)
            gain += np.einsum("p...,p...->...", u, w)

        if not with_loss:
            return gain, None, residue

        loss_coeffs = tables.loss_modes * ft
        collision_rate, res_l = lattice_service.real_part_checked(
            lattice_service.synthesize(loss_coeffs, d), loss_coeffs, d
        )
        return gain, values * collision_rate, max(residue, res_l)

    @staticmethod
    def _fast_terms_real(grid: GridSpec, values: np.ndarray, tables: AlphaTables, with_loss: bool):
        """Even tables: every product alpha_p f~ is Hermitian, so half-spectrum transforms suffice"""
        d, shape = grid.d, grid.shape
        alpha, alpha_prime, loss_modes = tables.half_spectrum
        ft = lattice_service.analyze_half(values, d)
        gain = np.zeros_like(values)
        batch = settings.DIRECTION_BATCH

        for start in range(0, tables.count, batch):
            stop = min(start + batch, tables.count)
            u = lattice_service.synthesize_half(alpha[start:stop] * ft, d, shape)
            w = lattice_service.synthesize_half(alpha_prime[start:stop] * ft, d, shape)
            gain += np.einsum("p...,p...->...", u, w)

        if not with_loss:
            return gain, None, 0.0
        collision_rate = lattice_service.synthesize_half(loss_modes * ft, d, shape)
        return gain, values * collision_rate, 0.0

    @staticmethod
    def dvm_fast(model: KernelModel, grid: GridSpec, f: DistributionField, tables: AlphaTables) -> CollisionOutput:
        """
        Direction-decomposed operator D^{N_tilde, N_bar}

        Raises:
            ConfigError: tables built for another grid or model
            NumericalError: imaginary residue exceeded
        """
        CollisionService._check_field(model, grid, f)
        CollisionService._check_tables(model, grid, tables)
        started = time.perf_counter_ns()
        gain, loss, residue = CollisionService._fast_terms(grid, f.values, tables)
        elapsed = time.perf_counter_ns() - started
        logger.debug(f"fast operator: {tables.count} directions, {elapsed / 1e6:.2f} ms, residue {residue:.2e}")
        return CollisionOutput(
            values=gain - loss,
            imag_residue=residue,
            elapsed_ns=elapsed,
            term_count=2 * tables.count + 2,
        )

    @staticmethod
    def fast_gain(model: KernelModel, grid: GridSpec, f: DistributionField, tables: AlphaTables) -> np.ndarray:
        """Gain part of dvm_fast alone"""
        CollisionService._check_field(model, grid, f)
        CollisionService._check_tables(model, grid, tables)
        gain, _, _ = CollisionService._fast_terms(grid, f.values, tables, with_loss=False)
        return gain


# Singleton instance
collision_service = CollisionService()
