import numpy as np
import pytest

from wignerflow import (
    CatichaPotential,
    EigenstatePair,
    PhaseSpaceGrid,
    PhysicsConfig,
    WignerBasisFields,
)

L_MAX = 18


@pytest.fixture(scope="session")
def cfg():
    return PhysicsConfig()


@pytest.fixture(scope="session")
def pair(cfg):
    return EigenstatePair(cfg)


@pytest.fixture(scope="session")
def potential(cfg):
    return CatichaPotential(cfg, max_order=2 * L_MAX + 1)


@pytest.fixture(scope="session")
def small_basis(pair):
    """Fast low-resolution basis for unit tests."""
    grid = PhaseSpaceGrid(nx=128, np=384, ny=512)
    return WignerBasisFields.from_pair(grid, pair, l_max=12)


@pytest.fixture(scope="session")
def med_basis(pair):
    """Medium basis meeting all contractual tolerances."""
    grid = PhaseSpaceGrid(nx=256, np=768, ny=1024)
    return WignerBasisFields.from_pair(grid, pair, l_max=L_MAX)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(715517)
