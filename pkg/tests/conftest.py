import numpy as np
import pytest
from hypothesis import strategies as st

from contagion_eph.graph import from_edge_list


def cycle(n):
    return from_edge_list([(i, (i + 1) % n) for i in range(n)])


def path(n):
    return from_edge_list([(i, i + 1) for i in range(n - 1)], node_count=n)


def star(leaves):
    return from_edge_list([(0, i) for i in range(1, leaves + 1)])


@st.composite
def graphs(draw, max_nodes=10, min_nodes=1):
    n = draw(st.integers(min_nodes, max_nodes))
    possible = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(possible), unique=True)) if possible else []
    return from_edge_list(chosen, node_count=n)


@st.composite
def filtered_graphs(draw, max_nodes=10, lo=-4, hi=0):
    g = draw(graphs(max_nodes))
    values = draw(st.lists(st.integers(lo, hi), min_size=g.node_count, max_size=g.node_count))
    return g, np.array(values, dtype=float)


def random_graph(rng, n, p):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return from_edge_list(pairs, node_count=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
