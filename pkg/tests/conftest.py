import numpy as np
import pytest

from consboltz.collision import CollisionWorkspace
from consboltz.velocity_grid import build_grid
from consboltz.weights import KernelSpec, generate_table


@pytest.fixture(scope="session")
def grid8():
    return build_grid(8, 5.0)


@pytest.fixture(scope="session")
def table8_l0(grid8):
    return generate_table(grid8, KernelSpec.for_grid(grid8, 0.0))


@pytest.fixture(scope="session")
def table8_l1(grid8):
    return generate_table(grid8, KernelSpec.for_grid(grid8, 1.0))


@pytest.fixture(scope="session")
def grid16():
    return build_grid(16, 5.0)


@pytest.fixture(scope="session")
def table16_l0(grid16):
    return generate_table(grid16, KernelSpec.for_grid(grid16, 0.0))


@pytest.fixture(scope="session")
def ws16(grid16, table16_l0):
    return CollisionWorkspace.create(grid16, table16_l0)


@pytest.fixture(scope="session")
def ws8(grid8, table8_l0):
    return CollisionWorkspace.create(grid8, table8_l0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
