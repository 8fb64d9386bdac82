import numpy as np
import pytest

from risbis.field import quadratic_form
from risbis.solver import ProblemInstance

ACCEPTANCE_LINES = []


def random_factor(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def random_instance(rng, N, K, Q, sigma_frac=(0.1, 0.5)):
    """Users with random factors; thresholds a random fraction of each
    constraint row's coherent bound so the constraints can bind."""
    users = [quadratic_form(random_factor(rng, N), 1.0) for _ in range(K)]
    cons = [quadratic_form(random_factor(rng, N), 1.0) for _ in range(Q)]
    sig = [rng.uniform(*sigma_frac) * c.coherent_bound() for c in cons]
    return ProblemInstance(users, cons, sig)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def record_acceptance(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
