import itertools

import pytest

from trekci.graph_core import DirectedGraph


def all_graphs(n):
    pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
    for mask in range(1 << len(pairs)):
        yield DirectedGraph(n, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))


def all_dags(n):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        yield DirectedGraph(n, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))


@pytest.fixture
def chain_collider():
    return DirectedGraph.from_edges(4, [(1, 2), (2, 3), (4, 3)])


@pytest.fixture
def diamond():
    return DirectedGraph.from_edges(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


@pytest.fixture
def trek4():
    return DirectedGraph.from_edges(4, [(1, 2), (1, 3), (3, 4)])


@pytest.fixture
def zigzag5():
    return DirectedGraph.from_edges(5, [(1, 3), (1, 4), (2, 4), (2, 5)])


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
