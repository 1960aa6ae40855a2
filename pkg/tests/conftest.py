import numpy as np
import pytest

import sheetmle as sm


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical test")


@pytest.fixture(scope="session")
def basis():
    return sm.polynomial_example_basis()


@pytest.fixture(scope="session")
def disc662():
    return sm.validate(sm.circle_domain(6.0, 6.0, 2.0))


@pytest.fixture(scope="session")
def disc221():
    return sm.validate(sm.circle_domain(2.0, 2.0, 1.0))


@pytest.fixture(scope="session")
def true_m():
    return np.array([5.0, 8.0, 3.0])
