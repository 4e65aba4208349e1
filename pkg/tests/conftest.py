import numpy as np
import pytest

from qce_lqr.control_math import CostPair, SystemPair


@pytest.fixture
def scalar():
    return SystemPair([[1.1]], [[1.0]]), CostPair.identity(1, 1)


@pytest.fixture
def double_integrator():
    return SystemPair([[1.0, 1.0], [0.0, 1.0]], [[0.5], [1.0]]), CostPair.identity(2, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
