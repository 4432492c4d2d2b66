import numpy as np
import pytest

from shrinkerlab import build_grid, make_model


@pytest.fixture(scope="session")
def gaussian1():
    return make_model("gaussian", 1)


@pytest.fixture(scope="session")
def gaussian2():
    return make_model("gaussian", 2)


@pytest.fixture(scope="session")
def cylinder32():
    return make_model("cylinder", 3, 2)


@pytest.fixture(scope="session")
def grid1_256(gaussian1):
    return build_grid(gaussian1, 256, 10.0)


@pytest.fixture(scope="session")
def grid2_64(gaussian2):
    return build_grid(gaussian2, 64, 8.0)


@pytest.fixture(scope="session")
def grid2_small(gaussian2):
    return build_grid(gaussian2, 48, 6.0)


@pytest.fixture(scope="session")
def cyl_grid(cylinder32):
    return build_grid(cylinder32, 48, 8.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
