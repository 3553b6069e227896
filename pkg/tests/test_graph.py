import numpy as np
import pytest
from hypothesis import given

from contagion_eph.graph import GraphError, cycle_rank, from_edge_list, induced_subgraph, sample_nodes

from conftest import cycle, graphs, path


def test_reversed_pair_is_deduplicated():
    g = from_edge_list([(0, 1), (1, 0), (1, 2)])
    assert (g.node_count, g.edge_count) == (3, 2)


def test_empty_edge_list_keeps_isolated_nodes():
    g = from_edge_list([], node_count=5)
    assert (g.node_count, g.edge_count) == (5, 0)


def test_self_loop_rejected():
    with pytest.raises(GraphError):
        from_edge_list([(0, 0)])


@pytest.mark.parametrize("g, rank", [(path(8), 0), (cycle(6), 1),
                                     (from_edge_list([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]), 2)])
def test_cycle_rank(g, rank):
    assert cycle_rank(g) == rank


def test_induced_triangle_pair_is_single_edge():
    sub, remap = induced_subgraph(cycle(3), {0, 1})
    assert sub.edge_set() == {(0, 1)}
    assert remap.tolist() == [0, 1]


def test_induced_all_nodes_is_identity():
    g = cycle(7)
    sub, remap = induced_subgraph(g, range(7))
    assert sub == g and remap.tolist() == list(range(7))


def test_induced_six_cycle_subset():
    sub, remap = induced_subgraph(cycle(6), {0, 1, 2, 4})
    assert remap.tolist() == [0, 1, 2, 4]
    assert sub.edge_set() == {(0, 1), (1, 2)}
    assert sub.degrees.tolist() == [1, 2, 1, 0]


def test_induced_empty_keep_rejected():
    with pytest.raises(GraphError):
        induced_subgraph(cycle(4), [])


def test_sample_nodes_sizes_and_determinism():
    g = from_edge_list([], node_count=1005)
    assert len(sample_nodes(g, 1.0, np.random.default_rng(0))) == 1005
    assert len(sample_nodes(g, 0.4, np.random.default_rng(0))) == 402
    a = sample_nodes(g, 0.4, np.random.default_rng(7))
    b = sample_nodes(g, 0.4, np.random.default_rng(7))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
def test_sample_nodes_rejects_bad_fraction(fraction):
    with pytest.raises(GraphError):
        sample_nodes(cycle(4), fraction, np.random.default_rng(0))


@given(graphs(max_nodes=12))
def test_cycle_rank_matches_components(g):
    c, _ = g.component_labels()
    assert cycle_rank(g) == g.edge_count - g.node_count + c >= 0


@given(graphs(max_nodes=12))
def test_edges_canonical(g):
    e = g.edges
    assert (e[:, 0] < e[:, 1]).all()
    assert len({tuple(x) for x in e.tolist()}) == g.edge_count
    assert int(g.degrees.sum()) == 2 * g.edge_count
