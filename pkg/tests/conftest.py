from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from gargaml.fileio import read_graph

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

DATA = Path(__file__).parent / "data"
TOY_EDGES = DATA / "toy_edges.csv"

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def toy():
    return read_graph(TOY_EDGES, directed=True)


@pytest.fixture(scope="session")
def toy_undirected():
    return read_graph(TOY_EDGES, directed=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
