import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contagion_eph.contagion import ContagionParams, InfectedFraction, run
from contagion_eph.eph import (CONE_EDGE, CONE_TRIANGLE, CONE_VERTEX, EDGE, VERTEX, PersistenceDiagram, Remap,
                               build_coned_complex, check_filtration_order, extended_persistence,
                               extract_diagram, reduce_boundary_matrix)
from contagion_eph.filtration import extend_to_edges, trace_filtration
from contagion_eph.graph import cycle_rank, from_edge_list
from contagion_eph.oracle import oracle_extended_persistence

from conftest import cycle, filtered_graphs, graphs, path

REDUCERS = ("cone", "standard", "twist")


def seeded_cycle_diagram(n, seeds, engine=extended_persistence):
    g = cycle(n)
    tr = run(g, ContagionParams.simple(1.0, termination=InfectedFraction(1.0)), 0, seeds=seeds)
    return engine(g, trace_filtration(g, tr))


def dim1_lifetimes(diagram):
    return sorted(diagram.lifetimes[diagram.dims == 1].tolist())


def test_single_vertex_complex():
    g = from_edge_list([], node_count=1)
    cx = build_coned_complex(g, extend_to_edges(g, [5.0]))
    by_role = {int(r): float(v) for r, v in zip(cx.role, cx.values)}
    assert by_role == {CONE_VERTEX: -3.0, VERTEX: -1.5, CONE_EDGE: 1.5}


def test_single_edge_complex():
    g = from_edge_list([(0, 1)])
    cx = build_coned_complex(g, extend_to_edges(g, [0.0, 1.0]))
    got = {(int(r), int(i)): float(v) for r, i, v in zip(cx.role, cx.ref, cx.values)}
    assert got == {(CONE_VERTEX, 0): -3.0, (VERTEX, 0): -2.0, (VERTEX, 1): -1.0, (EDGE, 0): -1.0,
                   (CONE_EDGE, 1): 1.0, (CONE_EDGE, 0): 2.0, (CONE_TRIANGLE, 0): 2.0}
    check_filtration_order(cx)


def test_coning_is_deterministic():
    g = cycle(6)
    f = extend_to_edges(g, [0, -1, -2, -3, -2, -1])
    a, b = build_coned_complex(g, f), build_coned_complex(g, f)
    assert np.array_equal(a.values, b.values) and a.boundary == b.boundary


def test_remap_round_trip():
    r = Remap(-4.0, 0.0)
    x = np.array([-4.0, -3.0, 0.0])
    assert r.ascending(x).tolist() == [-2.0, -1.75, -1.0]
    assert r.descending(x).tolist() == [2.0, 1.75, 1.0]
    assert np.allclose(r.invert(r.ascending(x)), x) and np.allclose(r.invert(r.descending(x)), x)


def test_single_vertex_pairs_across_whole_sequence():
    g = from_edge_list([], node_count=1)
    cx = build_coned_complex(g, extend_to_edges(g, [5.0]))
    raw = reduce_boundary_matrix(cx)
    assert raw.pairs.tolist() == [[cx.vertex_pos[0], cx.cone_edge_pos[0]]]
    assert extract_diagram(cx, raw).as_multiset() == [(0, "extended", 5.0, 5.0)]


@st.composite
def trees(draw, max_nodes=15):
    n = draw(st.integers(1, max_nodes))
    parents = [draw(st.integers(0, v - 1)) for v in range(1, n)]
    return from_edge_list([(p, v) for v, p in enumerate(parents, 1)], node_count=n)


@settings(max_examples=60, deadline=None)
@given(trees(), st.data())
def test_trees_have_no_extended_dim1_pairs(g, data):
    f = data.draw(st.lists(st.integers(-5, 0), min_size=g.node_count, max_size=g.node_count))
    d = extended_persistence(g, extend_to_edges(g, np.array(f, float)))
    assert not d.select(dim=1, kind="extended").any()


@settings(max_examples=60, deadline=None)
@given(trees(), st.data())
def test_trees_under_single_source_have_no_dim1_pairs(g, data):
    # superlevel sets of -distance from one node of a tree stay connected
    src = data.draw(st.integers(0, g.node_count - 1))
    tr = run(g, ContagionParams.simple(1.0, termination=InfectedFraction(1.0)), 0, seeds=[src])
    d = extended_persistence(g, trace_filtration(g, tr))
    assert not (d.dims == 1).any()


def test_tree_with_two_sources_has_relative_pair():
    g = path(3)
    d = extended_persistence(g, extend_to_edges(g, [0.0, -1.0, 0.0]))
    assert [p for p in d.pairs if p.dim == 1] == [(1, "relative", 0.0, -1.0)]


def test_constant_six_cycle():
    g = cycle(6)
    d = extended_persistence(g, extend_to_edges(g, np.full(6, -2.0)))
    assert d.select(dim=1).sum() == 1
    assert [p for p in d.pairs if p.dim == 1] == [(1, "extended", -2.0, -2.0)]


def test_eight_cycle_single_source():
    g = cycle(8)
    f = extend_to_edges(g, -np.array([0, 1, 2, 3, 4, 3, 2, 1], float))
    d = extended_persistence(g, f)
    assert [p for p in d.pairs if p.dim == 1] == [(1, "extended", 0.0, -4.0)]
    assert d.as_multiset() == oracle_extended_persistence(g, f).as_multiset()


def test_eight_cycle_two_seeds():
    assert dim1_lifetimes(seeded_cycle_diagram(8, [0, 3])) == [1.0, 2.0]
    assert dim1_lifetimes(seeded_cycle_diagram(8, [0, 3], oracle_extended_persistence)) == [1.0, 2.0]


def test_six_cycle_two_opposite_seeds():
    assert dim1_lifetimes(seeded_cycle_diagram(6, [0, 3])) == [1.0, 1.0]
    assert dim1_lifetimes(seeded_cycle_diagram(6, [0, 3], oracle_extended_persistence)) == [1.0, 1.0]


@pytest.mark.parametrize("n", range(3, 13))
def test_cycle_lifetime_is_half_length(n):
    d = seeded_cycle_diagram(n, [0])
    assert dim1_lifetimes(d) == [float(n // 2)]
    assert d.as_multiset() == seeded_cycle_diagram(n, [0], oracle_extended_persistence).as_multiset()


@pytest.mark.parametrize("reducer", REDUCERS)
@settings(max_examples=150, deadline=None)
@given(filtered_graphs(max_nodes=8))
def test_engine_matches_oracle(reducer, gf):
    g, f = gf
    filt = extend_to_edges(g, f)
    assert extended_persistence(g, filt, reducer, check=True).as_multiset() == \
        oracle_extended_persistence(g, filt).as_multiset()


@settings(max_examples=100, deadline=None)
@given(filtered_graphs(max_nodes=30, lo=-10, hi=10))
def test_pair_count_law(gf):
    g, f = gf
    d = extended_persistence(g, extend_to_edges(g, f))
    c, _ = g.component_labels()
    assert d.select(dim=1, kind="extended").sum() == cycle_rank(g)
    assert d.select(dim=0, kind="extended").sum() == c
    assert d.select(dim=1, kind="ordinary").sum() == 0
    assert d.graph_stats == (g.node_count, g.edge_count, c, cycle_rank(g))


@settings(max_examples=60, deadline=None)
@given(filtered_graphs(max_nodes=12), st.integers(-50, 50))
def test_shift_equivariance(gf, shift):
    g, f = gf
    a = extended_persistence(g, extend_to_edges(g, f))
    b = extended_persistence(g, extend_to_edges(g, f + shift))
    assert [(d, k, x + shift, y + shift) for d, k, x, y in a.as_multiset()] == b.as_multiset()


@settings(max_examples=60, deadline=None)
@given(filtered_graphs(max_nodes=12))
def test_values_are_vertex_values(gf):
    g, f = gf
    d = extended_persistence(g, extend_to_edges(g, f))
    vals = set(f.tolist())
    assert set(d.births.tolist()) <= vals and set(d.deaths.tolist()) <= vals
    assert (d.lifetimes >= 0).all()


def test_empty_graph_rejected():
    g = from_edge_list([], node_count=0)
    with pytest.raises(ValueError):
        extended_persistence(g, extend_to_edges(g, np.zeros(0)))


def test_unknown_reducer_rejected():
    g = path(3)
    with pytest.raises(KeyError):
        extended_persistence(g, extend_to_edges(g, [0, 1, 2]), reducer="magic")


def test_diagram_csv_and_from_pairs():
    d = PersistenceDiagram.from_pairs([(1, "extended", 0.0, -4.0), (0, "ordinary", -3.0, -1.0)], (8, 8, 1, 1))
    assert d.to_csv() == "dim,kind,birth,death,lifetime\n1,extended,0.0,-4.0,4.0\n0,ordinary,-3.0,-1.0,2.0\n"
    assert d.select(kind="ordinary").tolist() == [False, True]
