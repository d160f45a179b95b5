import pytest

from wavelab import make_polynomial_model
from wavelab.kp2d import petviashvili_solve
from wavelab.spectral import GridSpec2D


@pytest.fixture(scope="session")
def default_grid():
    return GridSpec2D(64.0, 64.0, 512, 512)


@pytest.fixture(scope="session")
def ground_state(default_grid):
    return petviashvili_solve(default_grid)


@pytest.fixture(scope="session")
def small_state():
    return petviashvili_solve(GridSpec2D(32.0, 32.0, 256, 256))


@pytest.fixture
def quadratic():
    return make_polynomial_model()


@pytest.fixture
def degenerate():
    return make_polynomial_model(a3=-0.5)
