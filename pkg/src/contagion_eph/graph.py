"""Undirected simple graphs with dense integer node ids."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``edges`` is an ``(m, 2)`` int64 array with ``u < v`` on every row, rows sorted
    lexicographically. ``labels`` optionally maps dense ids back to the labels
    seen in the source file.
    """

    node_count: int
    edges: np.ndarray
    labels: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.node_count < 0:
            raise GraphError("node_count must be nonnegative")
        if len(e):
            if (e[:, 0] == e[:, 1]).any():
                raise GraphError("self-loops are not allowed")
            if (e[:, 0] > e[:, 1]).any():
                raise GraphError("edge rows must satisfy u < v")
            if e.min() < 0 or e.max() >= self.node_count:
                raise GraphError("edge endpoint out of range")
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if (np.diff(e, axis=0) == 0).all(axis=1).any():
                raise GraphError("duplicate edges")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> sps.csr_matrix:
        n, e = self.node_count, self.edges
        data = np.ones(2 * len(e), dtype=np.int32)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        a = sps.csr_matrix((data, (rows, cols)), shape=(n, n))
        a.sort_indices()
        return a

    def neighbors(self, v: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def component_labels(self) -> tuple[int, np.ndarray]:
        if self.node_count == 0:
            return 0, np.zeros(0, dtype=np.int64)
        return connected_components(self.adjacency, directed=False)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.node_count, self.edges.tobytes()))


def from_edge_list(pairs: Iterable[Sequence[int]], node_count: int | None = None,
                   labels: tuple | None = None) -> Graph:
    """Build a simple graph from integer pairs, merging duplicates and reversed pairs.

    ``node_count`` defaults to one more than the largest id seen; pass it
    explicitly to keep trailing isolated nodes.
    """
    e = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.int64)
    e = e.reshape(-1, 2)
    loops = np.flatnonzero(e[:, 0] == e[:, 1])
    if len(loops):
        raise GraphError(f"self-loop on node {int(e[loops[0], 0])} (pair #{int(loops[0])})")
    if len(e) and e.min() < 0:
        raise GraphError("node ids must be nonnegative")
    seen = int(e.max()) + 1 if len(e) else 0
    if node_count is None:
        node_count = seen
    elif node_count < seen:
        raise GraphError(f"node_count={node_count} but id {seen - 1} appears in the edge list")
    e = np.sort(e, axis=1)
    e = np.unique(e, axis=0) if len(e) else e
    return Graph(node_count, e, labels)


def cycle_rank(g: Graph) -> int:
    """First Betti number |E| - |V| + #components."""
    c, _ = g.component_labels()
    return g.edge_count - g.node_count + c


def induced_subgraph(g: Graph, keep: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``keep`` relabeled to dense ids.

    Returns the subgraph and ``remap`` where ``remap[new_id] = old_id``.
    """
    keep = np.unique(np.fromiter(keep, dtype=np.int64) if not isinstance(keep, np.ndarray)
                     else keep.astype(np.int64))
    if len(keep) == 0:
        raise GraphError("cannot take an induced subgraph on an empty node set")
    if keep[0] < 0 or keep[-1] >= g.node_count:
        raise GraphError("keep contains ids outside the graph")
    new_id = np.full(g.node_count, -1, dtype=np.int64)
    new_id[keep] = np.arange(len(keep))
    e = new_id[g.edges]
    e = e[(e >= 0).all(axis=1)]
    labels = tuple(g.labels[i] for i in keep) if g.labels is not None else None
    return Graph(len(keep), e, labels), keep


def sample_nodes(g: Graph, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample without replacement of round(fraction * |V|) nodes, at least one.

    Halves round up. Returns sorted ids.
    """
    if not 0 < fraction <= 1:
        raise GraphError(f"fraction must lie in (0, 1], got {fraction}")
    size = max(1, int(np.floor(fraction * g.node_count + 0.5)))
    size = min(size, g.node_count)
    return np.sort(rng.choice(g.node_count, size=size, replace=False))
