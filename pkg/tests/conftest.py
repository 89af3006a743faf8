import math

import numpy as np
import pytest

from quantumpd.classify import builtin_datasets, compute_indicators
from quantumpd.qcore import PayoffMatrix

GAMES = {
    "blonski1": PayoffMatrix(70, 100, 90, 80),
    "blonski2": PayoffMatrix(0, 100, 90, 80),
    "blonski3": PayoffMatrix(30, 130, 90, 70),
    "blonski4": PayoffMatrix(0, 100, 90, 70),
    "blonski5": PayoffMatrix(0, 120, 90, 50),
    "blonski6": PayoffMatrix(0, 140, 90, 30),
    "dalbo1": PayoffMatrix(12, 50, 32, 25),
    "dalbo2": PayoffMatrix(12, 50, 40, 25),
    "dalbo3": PayoffMatrix(12, 50, 48, 25),
}

ACCEPTANCE_LINES = []


def random_pd(rng) -> PayoffMatrix:
    """Valid PD matrix with payoffs of order 1..100."""
    while True:
        d = rng.uniform(-50, 50)
        a = d - rng.uniform(0.5, 50)
        c = d + rng.uniform(0.5, 50)
        b = c + rng.uniform(0.5, 50)
        if 2 * c > a + b:
            return PayoffMatrix(a, b, c, d)


def barrier_oracle(payoff):
    """Closed-form thresholds sin^2 g1 = (d-a)/(b-a), sin^2 g2 = (b-c)/(b-a).

    Obtained by comparing payoffs of the corner deviations D and Q; used only
    as an independent check on the grid+bisection search.
    """
    a, b, c, d = payoff.as_tuple()
    g1 = math.asin(math.sqrt((d - a) / (b - a)))
    g2 = math.asin(math.sqrt((b - c) / (b - a)))
    return g1, g2


@pytest.fixture
def rng():
    return np.random.default_rng(20070501)


@pytest.fixture(scope="session")
def builtin_records():
    return builtin_datasets()


@pytest.fixture(scope="session")
def builtin_indicators(builtin_records):
    return compute_indicators(builtin_records)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
