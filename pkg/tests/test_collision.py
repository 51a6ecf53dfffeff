"""
Tests for the collision operator evaluators
"""
import numpy as np
import pytest

from fastdvm.exceptions import ConfigError
from fastdvm.models import DistributionField
from fastdvm.services.collision_service import collision_service
from fastdvm.services.kernel_service import kernel_service
from fastdvm.services.lattice_service import lattice_service
from fastdvm.services.validation_service import validation_service


def rel_max(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def weighted_moments(grid, values):
    """Mass, momentum and energy sums of an operator output"""
    v = lattice_service.node_velocities(grid)
    w = grid.cell_volume
    return (
        w * values.sum(),
        [w * (v[j] * values).sum() for j in range(grid.d)],
        w * ((v ** 2).sum(axis=0) * values).sum(),
    )


def loss_scale(grid, f, output_values):
    """Magnitude of the individual terms, used for conservation tolerances"""
    return grid.cell_volume * np.abs(output_values).sum() + grid.cell_volume * np.abs(f.values).sum()


def all_operators(model, grid, f):
    tables = kernel_service.build_alpha_tables(model, grid)
    modes = kernel_service.build_mode_table(model, grid)
    return {
        "classical": collision_service.dvm_classical(model, grid, f).values,
        "pseudospectral": collision_service.dvm_pseudospectral(model, grid, f, modes).values,
        "fast": collision_service.dvm_fast(model, grid, f, tables).values,
        "truncated": collision_service.dvm_truncated(model, grid, f).values,
    }


# Exactness of the decomposition

def test_fast_matches_classical_2d(maxwell, grid_2d_n16, random_field):
    tables = kernel_service.build_alpha_tables(maxwell, grid_2d_n16)
    for _ in range(10):
        f = random_field(grid_2d_n16)
        classical = collision_service.dvm_classical(maxwell, grid_2d_n16, f).values
        fast = collision_service.dvm_fast(maxwell, grid_2d_n16, f, tables).values
        assert rel_max(fast, classical) <= 1e-10


def test_fast_matches_classical_3d(hard_spheres, random_field):
    grid = lattice_service.make_grid(3, 8, 4.0, n_tilde=1, n_bar=1)
    tables = kernel_service.build_alpha_tables(hard_spheres, grid)
    for _ in range(10):
        f = random_field(grid)
        classical = collision_service.dvm_classical(hard_spheres, grid, f).values
        fast = collision_service.dvm_fast(hard_spheres, grid, f, tables).values
        assert rel_max(fast, classical) <= 1e-10


def test_fast_matches_classical_on_bkw(grid_2d_n16):
    model = kernel_service.make_model("maxwell2d", "carleman")
    f = validation_service.sample_bkw(grid_2d_n16, 0.0)
    tables = kernel_service.build_alpha_tables(model, grid_2d_n16)
    classical = collision_service.dvm_classical(model, grid_2d_n16, f).values
    fast = collision_service.dvm_fast(model, grid_2d_n16, f, tables).values
    assert rel_max(fast, classical) <= 1e-10


def test_three_operators_agree_2d(maxwell, grid_2d, random_field):
    f = random_field(grid_2d)
    out = all_operators(maxwell, grid_2d, f)
    assert rel_max(out["pseudospectral"], out["classical"]) <= 1e-10
    assert rel_max(out["fast"], out["classical"]) <= 1e-10


def test_three_operators_agree_3d(hard_spheres, grid_3d, random_field):
    f = random_field(grid_3d)
    out = all_operators(hard_spheres, grid_3d, f)
    assert rel_max(out["pseudospectral"], out["classical"]) <= 1e-10
    assert rel_max(out["fast"], out["classical"]) <= 1e-10


@pytest.mark.slow
def test_three_operators_agree_3d_n8(hard_spheres, random_field):
    grid = lattice_service.make_grid(3, 8, 4.0, n_tilde=1, n_bar=1)
    f = random_field(grid)
    modes = kernel_service.build_mode_table(hard_spheres, grid)
    classical = collision_service.dvm_classical(hard_spheres, grid, f).values
    pseudospectral = collision_service.dvm_pseudospectral(hard_spheres, grid, f, modes).values
    fast = collision_service.dvm_fast(hard_spheres, grid, f, kernel_service.build_alpha_tables(hard_spheres, grid)).values
    assert rel_max(pseudospectral, classical) <= 1e-10
    assert rel_max(fast, classical) <= 1e-10


def test_pseudospectral_matches_classical_on_larger_2d_grid(maxwell, grid_2d_n16, random_field):
    f = random_field(grid_2d_n16)
    modes = kernel_service.build_mode_table(maxwell, grid_2d_n16)
    classical = collision_service.dvm_classical(maxwell, grid_2d_n16, f).values
    pseudospectral = collision_service.dvm_pseudospectral(maxwell, grid_2d_n16, f, modes).values
    assert rel_max(pseudospectral, classical) <= 1e-10


# Trivial inputs

def test_constant_field_is_equilibrium(maxwell, grid_2d):
    f = DistributionField(grid_2d, np.full(grid_2d.shape, 0.7))
    for name, values in all_operators(maxwell, grid_2d, f).items():
        assert np.abs(values).max() <= 1e-12, name


def test_point_mass_is_inert_for_truncated(maxwell, grid_2d):
    values = np.zeros(grid_2d.shape)
    values[3, 5] = 1.0
    out = collision_service.dvm_truncated(maxwell, grid_2d, DistributionField(grid_2d, values))
    assert not out.values.any()


def test_zero_mode_table_gives_zero(grid_2d, random_field):
    model = kernel_service.table_model(np.zeros((5, 5)), np.ones((5, 5)))
    modes = kernel_service.build_mode_table(model, grid_2d)
    out = collision_service.dvm_pseudospectral(model, grid_2d, random_field(grid_2d), modes)
    assert not np.abs(out.values).max() > 0


def test_table_model_matches_built_in(maxwell, grid_2d, random_field):
    points = kernel_service.box_points(2, grid_2d.n_tilde)
    size = 2 * grid_2d.n_tilde + 1
    a = kernel_service.a_values(maxwell, points, grid_2d.h).reshape(size, size)
    table = kernel_service.table_model(a, np.ones((size, size)))
    f = random_field(grid_2d)
    built_in = collision_service.dvm_classical(maxwell, grid_2d, f).values
    from_table = collision_service.dvm_fast(table, grid_2d, f, kernel_service.build_alpha_tables(table, grid_2d)).values
    assert rel_max(from_table, built_in) <= 1e-10


def test_uneven_table_model_matches_classical(grid_2d, random_field, rng):
    size = 2 * grid_2d.n_tilde + 1
    model = kernel_service.table_model(rng.uniform(0.5, 1.5, size=(size, size)), np.ones((size, size)))
    tables = kernel_service.build_alpha_tables(model, grid_2d)
    assert not tables.is_real
    f = random_field(grid_2d)
    out = collision_service.dvm_fast(model, grid_2d, f, tables)
    classical = collision_service.dvm_classical(model, grid_2d, f).values
    assert rel_max(out.values, classical) <= 1e-10
    assert out.imag_residue < 1e-10 * np.abs(out.values).max()


def test_even_tables_use_half_spectra(maxwell, grid_2d):
    tables = kernel_service.build_alpha_tables(maxwell, grid_2d)
    alpha, alpha_prime, loss_modes = tables.half_spectrum
    assert alpha.shape == (tables.count, grid_2d.n, grid_2d.N + 1)
    assert loss_modes.shape == (grid_2d.n, grid_2d.N + 1)
    assert alpha[:, 0, 0] == pytest.approx(tables.alpha[:, grid_2d.N, grid_2d.N])


# Conservation

def test_mass_is_conserved_by_every_operator(maxwell, grid_2d, random_field):
    f = random_field(grid_2d)
    for name, values in all_operators(maxwell, grid_2d, f).items():
        mass, _, _ = weighted_moments(grid_2d, values)
        assert abs(mass) <= 1e-12 * loss_scale(grid_2d, f, values), name


def test_fast_conserves_mass_for_partial_direction_sets(maxwell, random_field):
    grid = lattice_service.make_grid(2, 16, 5.5, n_tilde=5, n_bar=2)
    f = random_field(grid)
    values = collision_service.dvm_fast(maxwell, grid, f, kernel_service.build_alpha_tables(maxwell, grid)).values
    mass, _, _ = weighted_moments(grid, values)
    assert abs(mass) <= 1e-12 * loss_scale(grid, f, values)


def test_angular_line_weights_conserve_mass(maxwell, random_field):
    grid = lattice_service.make_grid(2, 16, 5.5, n_tilde=5, n_bar=2)
    f = random_field(grid)
    tables = kernel_service.build_alpha_tables(maxwell, grid, line_weights="angular")
    values = collision_service.dvm_fast(maxwell, grid, f, tables).values
    mass, _, _ = weighted_moments(grid, values)
    assert abs(mass) <= 1e-12 * loss_scale(grid, f, values)


@pytest.mark.parametrize("compensated", [False, True])
def test_truncated_conserves_momentum_and_energy(maxwell, grid_2d, random_field, compensated):
    f = random_field(grid_2d)
    values = collision_service.dvm_truncated(maxwell, grid_2d, f, compensated=compensated).values
    mass, momentum, energy = weighted_moments(grid_2d, values)
    v_max = grid_2d.N * grid_2d.h
    scale = loss_scale(grid_2d, f, values) * (1 + 2 * v_max ** 2)
    assert abs(mass) <= 1e-12 * scale
    assert max(abs(p) for p in momentum) <= 1e-12 * scale
    assert abs(energy) <= 1e-12 * scale


def test_truncated_conserves_in_3d(hard_spheres, grid_3d, random_field):
    f = random_field(grid_3d)
    values = collision_service.dvm_truncated(hard_spheres, grid_3d, f).values
    mass, momentum, energy = weighted_moments(grid_3d, values)
    scale = loss_scale(grid_3d, f, values) * (1 + 3 * (grid_3d.N * grid_3d.h) ** 2)
    assert abs(mass) <= 1e-12 * scale
    assert max(abs(p) for p in momentum) <= 1e-12 * scale
    assert abs(energy) <= 1e-12 * scale


def test_periodized_operators_conserve_with_compact_support(maxwell):
    grid = lattice_service.make_grid(2, 16, 5.0, n_tilde=3, n_bar=3)
    support = lattice_service.no_aliasing_support(grid.T)
    f = validation_service.sample_bump(grid, support, seed=7)
    tables = kernel_service.build_alpha_tables(maxwell, grid)
    for values in (
        collision_service.dvm_classical(maxwell, grid, f).values,
        collision_service.dvm_fast(maxwell, grid, f, tables).values,
    ):
        mass, momentum, energy = weighted_moments(grid, values)
        scale = loss_scale(grid, f, values) * (1 + 2 * grid.T ** 2)
        assert abs(mass) <= 1e-12 * scale
        assert max(abs(p) for p in momentum) <= 1e-12 * scale
        assert abs(energy) <= 1e-12 * scale


def test_compensated_classical_matches_plain(maxwell, grid_2d, random_field):
    f = random_field(grid_2d)
    plain = collision_service.dvm_classical(maxwell, grid_2d, f).values
    compensated = collision_service.dvm_classical(maxwell, grid_2d, f, compensated=True).values
    assert rel_max(compensated, plain) <= 1e-13


# Structure

def test_parity_is_preserved(maxwell, grid_2d, random_field):
    raw = random_field(grid_2d).values
    f = DistributionField(grid_2d, raw + raw[::-1, ::-1])
    for name, values in all_operators(maxwell, grid_2d, f).items():
        assert np.abs(values - values[::-1, ::-1]).max() <= 1e-12 * np.abs(values).max(), name


def test_fast_gain_is_nonnegative(maxwell, grid_2d_n16, rng):
    grid = lattice_service.with_n_bar(grid_2d_n16, 2)
    values = rng.uniform(0.0, 1.0, size=grid.shape) * (rng.uniform(size=grid.shape) > 0.5)
    f = DistributionField(grid, values)
    gain = collision_service.fast_gain(maxwell, grid, f, kernel_service.build_alpha_tables(maxwell, grid))
    assert gain.min() >= -1e-12 * np.abs(gain).max()


def test_fast_reports_diagnostics(maxwell, grid_2d, random_field):
    tables = kernel_service.build_alpha_tables(maxwell, grid_2d)
    out = collision_service.dvm_fast(maxwell, grid_2d, random_field(grid_2d), tables)
    assert out.term_count == 2 * tables.count + 2
    assert out.elapsed_ns > 0
    assert 0.0 <= out.imag_residue < 1e-8 * np.abs(out.values).max() + 1e-12


def test_fast_rejects_mismatched_tables(maxwell, grid_2d, grid_2d_n16, random_field):
    tables = kernel_service.build_alpha_tables(maxwell, grid_2d_n16)
    with pytest.raises(ConfigError) as exc:
        collision_service.dvm_fast(maxwell, grid_2d, random_field(grid_2d), tables)
    assert exc.value.kind == "tables-grid-mismatch"


def test_fast_rejects_tables_of_other_weights(grid_2d, random_field):
    lattice = kernel_service.make_model("maxwell2d", "lattice")
    carleman = kernel_service.make_model("maxwell2d", "carleman")
    tables = kernel_service.build_alpha_tables(lattice, grid_2d)
    with pytest.raises(ConfigError):
        collision_service.dvm_fast(carleman, grid_2d, random_field(grid_2d), tables)
