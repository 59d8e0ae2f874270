import numpy as np
import pytest

A_DEMO = np.array([[0.0, 1.0], [1.0, 0.0]])
B_DEMO = np.array([[0.0, 1.0], [4.0, 0.0]])
C_DEMO = np.array([[0.0, 2.0], [5.0, 0.0]])


def random_hyperbolic(rng, n, spread=3.0, max_cond=20.0):
    """``R diag(lam) R^{-1}`` with separated nonzero eigenvalues and cond(R) bounded."""
    while True:
        r = rng.standard_normal((n, n))
        if np.linalg.cond(r) < max_cond:
            break
    while True:
        lam = rng.uniform(-spread, spread, n)
        gaps = np.diff(np.sort(lam))
        if np.min(np.abs(lam)) > 0.2 and (n == 1 or np.min(gaps) > 0.2):
            break
    return r @ np.diag(lam) @ np.linalg.inv(r)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def demo_matrices():
    return A_DEMO, B_DEMO, C_DEMO


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
