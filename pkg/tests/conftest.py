import numpy as np
import pytest

from polopt.graph import WeightedGraph

ACCEPTANCE_LINES = []


def random_graph(rng, n, p=0.4, wmin=0.1, wmax=3.0):
    edges = [
        (u, v, float(rng.uniform(wmin, wmax)))
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return WeightedGraph(n, tuple(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def table1_opinions():
    return np.array([0.0, 0.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
