"""
Shared fixtures for the test suite
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.settings import RATE_OPERATOR_DECAY, RATE_OPERATOR_KIND, RATE_OPERATOR_SIZE  # noqa: E402
from entities.operators import SpectralOperator, SpectralVector, make_operator  # noqa: E402


@pytest.fixture
def single_mode():
    """lambda = 1 with x_dag = [1]"""
    return SpectralOperator([1.0]), SpectralVector([1.0])


@pytest.fixture
def two_modes():
    """lambda = [1, 0.25] with x_dag = [1, 2]"""
    return SpectralOperator([1.0, 0.5]), SpectralVector([1.0, 2.0])


@pytest.fixture
def small_op():
    return make_operator("polynomial", 50, 1.0)


@pytest.fixture(scope="session")
def rate_op():
    """Log-uniform spectrum over fourteen decades used by the rate experiments"""
    return make_operator(RATE_OPERATOR_KIND, RATE_OPERATOR_SIZE, RATE_OPERATOR_DECAY)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs the whole acceptance suite")
