import numpy as np
import pytest

from lab import radial
from lab.ckn_core import validate_params


@pytest.fixture
def bn3():
    """Classical Brezis-Nirenberg setting in R^3: p=2, no weights, J = int u^2"""
    return validate_params(3, 2.0, 0.0, 0.0, 2.0)


@pytest.fixture
def bn5():
    return validate_params(5, 2.0, 0.0, 0.0, 2.0)


@pytest.fixture
def weighted():
    return validate_params(4, 3.0, 0.1, 0.4, 1.5)


@pytest.fixture
def small_grid():
    return radial.default_grid(1.0, 512)


@pytest.fixture
def grid_1024():
    return radial.default_grid(1.0, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
