import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

CYCLIC_M = np.array(
    [
        [-1.0, 0.5, 0.0, 0.2, 0.0],
        [-1.0, -1.0, 0.2, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, -1.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, -1.0],
    ]
)

CYCLIC_SIGMA = np.array(
    [
        [0.496, -0.091, 0.123, 0.207, 0.151],
        [-0.091, 0.594, 0.013, -0.038, -0.005],
        [0.123, 0.013, 0.838, 0.676, 0.647],
        [0.207, -0.038, 0.676, 1.412, 0.912],
        [0.151, -0.005, 0.647, 0.912, 1.147],
    ]
)


def random_stable(rng, d):
    """Dense drift with spectral abscissa in [-1.5, -0.1] and a random PSD volatility."""
    A = rng.normal(size=(d, d)) / np.sqrt(d)
    a = np.linalg.eigvals(A).real.max()
    M = A - (a + rng.uniform(0.1, 1.5)) * np.eye(d)
    B = rng.normal(size=(d, d))
    return M, B @ B.T / d


def random_acyclic(rng, d, diag=(-1.0, -0.1), off=0.5, density=0.5):
    M = np.tril(rng.uniform(-off, off, (d, d)), -1) * (rng.random((d, d)) < density)
    np.fill_diagonal(M, rng.uniform(*diag, d))
    B = rng.normal(size=(d, d))
    return M, B @ B.T / d


@pytest.fixture
def cyclic5():
    return CYCLIC_M.copy(), np.eye(5)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, (status, title) in sorted(acc.RESULTS.items()):
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
