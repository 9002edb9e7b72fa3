import numpy as np
import pytest

from pseudosusy import build_grid, pt_oscillator, scalar_tanh, scarf2


@pytest.fixture(scope="session")
def scarf():
    return scarf2()


@pytest.fixture(scope="session")
def osc():
    return pt_oscillator()


@pytest.fixture(scope="session")
def stanh():
    return scalar_tanh()


@pytest.fixture(scope="session")
def grid_scarf_small():
    return build_grid(12.0, 200)


@pytest.fixture(scope="session")
def grid_osc_small():
    return build_grid(8.0, 200)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
