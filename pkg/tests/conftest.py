import numpy as np
import pytest

from auxskin import auc
from auxskin.catalog import get_dielectric, reference_geometry
from auxskin.types import HysteresisTrace, ModelParams


@pytest.fixture(scope="session")
def geom():
    return reference_geometry()


@pytest.fixture(scope="session")
def hfp():
    return get_dielectric("pvdf-hfp")


@pytest.fixture(scope="session")
def mylar():
    return get_dielectric("mylar")


@pytest.fixture(scope="session")
def trfe():
    return get_dielectric("pvdf-trfe-cfe")


@pytest.fixture
def params():
    return ModelParams()


def synthetic_traces(E, mu, geom, dielectric, n_points=101, strain_max=0.05,
                     voltage=600.0, noise=0.0, seed=0):
    """Unlocked loading sweep plus an energised stretch-and-release loop."""
    p = ModelParams(E=E, mu=mu)
    grid = np.linspace(0.0, strain_max, n_points)
    free = auc.force_strain_curve(grid, geom, dielectric, p.replace(voltage=0.0))
    held = auc.hysteresis_loop(strain_max, n_points, geom, dielectric, p.replace(voltage=voltage))
    if noise:
        rng = np.random.default_rng(seed)
        free = HysteresisTrace(free.strain, free.force + rng.normal(0, noise, len(free)),
                               free.voltage, free.branch, free.metadata)
    return [free, held]
