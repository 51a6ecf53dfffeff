"""
Pytest configuration and fixtures
"""
import numpy as np
import pytest

from fastdvm.config import settings
from fastdvm.models import DistributionField
from fastdvm.services.kernel_service import kernel_service
from fastdvm.services.lattice_service import lattice_service


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def deterministic_settings(tmp_path, monkeypatch):
    """Single-threaded transforms and a throwaway output/cache location for every test"""
    monkeypatch.setattr(settings, "DETERMINISTIC", True)
    monkeypatch.setattr(settings, "THREADS", 1)
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setattr(settings, "CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setattr(settings, "BUDGET_SECONDS", None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def maxwell():
    return kernel_service.make_model("maxwell2d")


@pytest.fixture
def hard_spheres():
    return kernel_service.make_model("hardsphere3d")


@pytest.fixture
def grid_2d():
    """N=8, T=5, N_tilde=2"""
    return lattice_service.make_grid(2, 8, 5.0, n_tilde=2, n_bar=2)


@pytest.fixture
def grid_2d_n16():
    """N=16, T=5.5, N_tilde=N_bar=3"""
    return lattice_service.make_grid(2, 16, 5.5, n_tilde=3, n_bar=3)


@pytest.fixture
def grid_3d():
    """N=4, T=3, N_tilde=N_bar=1"""
    return lattice_service.make_grid(3, 4, 3.0, n_tilde=1, n_bar=1)


@pytest.fixture
def random_field(rng):
    """Factory for seeded positive fields on a grid"""

    def make(grid):
        return DistributionField(grid, rng.uniform(0.1, 1.0, size=grid.shape))

    return make
