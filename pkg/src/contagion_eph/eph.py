"""Extended persistent homology of vertex-filtered graphs via coning.

The graph's simplices are remapped into [-2, -1] in ascending order, a cone
vertex is added at -3, and every simplex is coned off with its coned copy
placed in [1, 2] in descending order of the original value. Ordinary
persistence of that single filtration yields the ordinary, extended and
relative parts of the extended diagram. Reported values are always in the
units of the input filtration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .filtration import SimplexFiltration
from .graph import Graph

ORDINARY = "ordinary"
RELATIVE = "relative"
EXTENDED = "extended"
KINDS = (ORDINARY, RELATIVE, EXTENDED)

# simplex roles inside the coned complex
CONE_VERTEX, VERTEX, EDGE, CONE_EDGE, CONE_TRIANGLE = range(5)


class PersistencePair(NamedTuple):
    dim: int
    kind: str
    birth: float
    death: float

    @property
    def lifetime(self) -> float:
        return abs(self.death - self.birth)


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Column-oriented extended diagram.

    ``graph_stats`` is ``(|V|, |E|, components, cycle_rank)``.
    """

    dims: np.ndarray
    kinds: np.ndarray  # index into KINDS
    births: np.ndarray
    deaths: np.ndarray
    graph_stats: tuple[int, int, int, int]

    @property
    def lifetimes(self) -> np.ndarray:
        return np.abs(self.deaths - self.births)

    @property
    def pairs(self) -> list[PersistencePair]:
        return [PersistencePair(int(d), KINDS[k], b, x) for d, k, b, x in
                zip(self.dims.tolist(), self.kinds.tolist(), self.births.tolist(), self.deaths.tolist())]

    def select(self, dim: int | None = None, kind: str | None = None) -> np.ndarray:
        m = np.ones(len(self.dims), dtype=bool)
        if dim is not None:
            m &= self.dims == dim
        if kind is not None:
            m &= self.kinds == KINDS.index(kind)
        return m

    def __len__(self):
        return len(self.dims)

    def as_multiset(self) -> list[tuple]:
        return sorted((p.dim, p.kind, p.birth, p.death) for p in self.pairs)

    def to_csv(self) -> str:
        rows = ["dim,kind,birth,death,lifetime"]
        for p in self.pairs:
            rows.append(f"{p.dim},{p.kind},{p.birth!r},{p.death!r},{p.lifetime!r}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_pairs(cls, pairs, graph_stats) -> "PersistenceDiagram":
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs], dtype=np.int64),
                   np.array([KINDS.index(p[1]) for p in pairs], dtype=np.int64),
                   np.array([p[2] for p in pairs], dtype=float),
                   np.array([p[3] for p in pairs], dtype=float),
                   tuple(graph_stats))


@dataclass(frozen=True)
class Remap:
    """Affine maps sending original values to [-2, -1] (ascending) and [1, 2] (descending)."""

    lo: float
    hi: float

    def ascending(self, x):
        x = np.asarray(x, dtype=float)
        if self.hi == self.lo:
            return np.full_like(x, -1.5)
        return -2.0 + (x - self.lo) / (self.hi - self.lo)

    def descending(self, x):
        x = np.asarray(x, dtype=float)
        if self.hi == self.lo:
            return np.full_like(x, 1.5)
        return 1.0 + (self.hi - x) / (self.hi - self.lo)

    def invert(self, y):
        """Original value of a remapped value from either half."""
        y = np.asarray(y, dtype=float)
        if self.hi == self.lo:
            return np.full_like(y, self.lo)
        span = self.hi - self.lo
        return np.where(y < 0, self.lo + (y + 2.0) * span, self.hi - (y - 1.0) * span)


@dataclass(frozen=True, eq=False)
class ConedComplex:
    """Coned complex in filtration order.

    Per-simplex arrays are indexed by filtration position. ``orig_value`` is the
    simplex value in input units: ``f(sigma)`` for original simplices and the
    minimum vertex value of ``sigma`` for the coned copy of ``sigma``.
    The ``*_pos`` arrays give the filtration position of vertex ``v``, edge ``i``,
    cone edge ``w*v`` and cone triangle ``w*e_i``.
    """

    node_count: int
    edges: np.ndarray
    role: np.ndarray
    ref: np.ndarray
    dims: np.ndarray
    values: np.ndarray
    orig_value: np.ndarray
    cone_pos: int
    vertex_pos: np.ndarray
    edge_pos: np.ndarray
    cone_edge_pos: np.ndarray
    cone_triangle_pos: np.ndarray
    remap: Remap

    def __len__(self):
        return len(self.role)

    @cached_property
    def boundary(self) -> list[tuple[int, ...]]:
        """Sorted facet positions of every simplex, indexed by position."""
        e = self.edges
        vp = self.vertex_pos
        bnd: list[tuple[int, ...]] = [()] * len(self.role)
        ends = np.sort(vp[e], axis=1) if len(e) else np.zeros((0, 2), np.int64)
        for p, ab in zip(self.edge_pos.tolist(), ends.tolist()):
            bnd[p] = tuple(ab)
        for p, v in zip(self.cone_edge_pos.tolist(), vp.tolist()):
            bnd[p] = (self.cone_pos, v)
        cp = self.cone_edge_pos
        tri = np.sort(np.column_stack([self.edge_pos, cp[e[:, 0]], cp[e[:, 1]]]), axis=1) \
            if len(e) else np.zeros((0, 3), np.int64)
        for p, faces in zip(self.cone_triangle_pos.tolist(), tri.tolist()):
            bnd[p] = tuple(faces)
        return bnd


def build_coned_complex(g: Graph, filt: SimplexFiltration) -> ConedComplex:
    n, m = g.node_count, g.edge_count
    if n == 0:
        raise ValueError("cannot cone an empty graph")
    fv = np.asarray(filt.vertex_value)
    fe = np.asarray(filt.edge_value)
    if fv.shape != (n,) or fe.shape != (m,):
        raise ValueError("filtration does not match the graph")
    e = g.edges
    remap = Remap(float(fv.min()), float(fv.max()))
    # coned copy of sigma enters the superlevel side at min over its vertices
    fe_low = np.minimum(fv[e[:, 0]], fv[e[:, 1]]) if m else fv[:0]

    role = np.concatenate([[CONE_VERTEX], np.full(n, VERTEX), np.full(m, EDGE),
                           np.full(n, CONE_EDGE), np.full(m, CONE_TRIANGLE)])
    ref = np.concatenate([[0], np.arange(n), np.arange(m), np.arange(n), np.arange(m)])
    dims = np.concatenate([[0], np.zeros(n, int), np.ones(m, int), np.ones(n, int), np.full(m, 2)])
    orig = np.concatenate([[np.nan], fv, fe, fv, fe_low]).astype(float)
    values = np.concatenate([[-3.0], remap.ascending(fv), remap.ascending(fe),
                             remap.descending(fv), remap.descending(fe_low)])
    segment = np.concatenate([[0], np.ones(n + m, int), np.full(n + m, 2)])
    # exact sort key: ascending half by f, descending half by -f (no float ties)
    key = np.where(segment == 2, -orig, np.nan_to_num(orig, nan=0.0))
    simplex_index = np.concatenate([[-1], np.arange(n), n + np.arange(m), np.arange(n), n + np.arange(m)])
    cone_flag = (segment == 2).astype(int)
    order = np.lexsort((cone_flag, simplex_index, dims, key, segment))

    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    return ConedComplex(n, e, role[order], ref[order], dims[order], values[order], orig[order],
                        int(pos[0]), pos[1:1 + n], pos[1 + n:1 + n + m],
                        pos[1 + n + m:1 + 2 * n + m], pos[1 + 2 * n + m:], remap)


@dataclass(frozen=True, eq=False)
class RawPairing:
    """Positions ``(birth, death)`` of every finite pair plus unpaired positions."""

    pairs: np.ndarray  # shape (k, 2)
    essential: np.ndarray


def check_filtration_order(cx: ConedComplex) -> None:
    if len(cx.values) and (np.diff(cx.values) < 0).any():
        raise ValueError("simplices are not sorted by filtration value")
    for j, b in enumerate(cx.boundary):
        if b and b[-1] >= j:
            raise ValueError(f"simplex at position {j} precedes one of its faces")


def standard_reduction(boundary: list[tuple[int, ...]]) -> RawPairing:
    """Left-to-right column reduction over GF(2).

    Columns are Python ints used as bitsets; bit ``i`` is row ``i``.
    """
    low_owner: dict[int, int] = {}
    reduced: dict[int, int] = {}
    pairs = []
    for j, faces in enumerate(boundary):
        if not faces:
            continue
        col = 0
        for i in faces:
            col ^= 1 << i
        while col:
            low = col.bit_length() - 1
            k = low_owner.get(low)
            if k is None:
                low_owner[low] = j
                reduced[j] = col
                pairs.append((low, j))
                break
            col ^= reduced[k]
    killed = set(low_owner)
    paired_deaths = set(low_owner.values())
    essential = [j for j in range(len(boundary)) if j not in killed and j not in paired_deaths]
    return RawPairing(np.array(pairs, dtype=np.int64).reshape(-1, 2), np.array(essential, dtype=np.int64))


def twist_reduction(boundary: list[tuple[int, ...]]) -> RawPairing:
    """Same pairing as :func:`standard_reduction`, with clearing.

    Columns are reduced from the top dimension down; a column known to be a
    pivot row of a higher-dimensional column is skipped since it reduces to zero.
    """
    dims = [0] * len(boundary)
    # dimension of a simplex is one less than the size of its boundary, except vertices
    for j, b in enumerate(boundary):
        dims[j] = len(b) - 1 if b else 0
    low_owner: dict[int, int] = {}
    reduced: dict[int, int] = {}
    cleared: set[int] = set()
    for d in sorted(set(dims), reverse=True):
        if d == 0:
            continue
        for j, faces in enumerate(boundary):
            if dims[j] != d or j in cleared:
                continue
            col = 0
            for i in faces:
                col ^= 1 << i
            while col:
                low = col.bit_length() - 1
                k = low_owner.get(low)
                if k is None:
                    low_owner[low] = j
                    reduced[j] = col
                    cleared.add(low)
                    break
                col ^= reduced[k]
    pairs = sorted((low, j) for low, j in low_owner.items())
    paired = set(low_owner) | set(low_owner.values())
    essential = [j for j in range(len(boundary)) if j not in paired]
    return RawPairing(np.array(pairs, dtype=np.int64).reshape(-1, 2), np.array(essential, dtype=np.int64))


def _pairing(pairs, size) -> RawPairing:
    pairs = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    paired = np.zeros(size, dtype=bool)
    paired[pairs.ravel()] = True
    return RawPairing(pairs, np.flatnonzero(~paired))


def cone_reduction(cx: ConedComplex) -> RawPairing:
    """Standard-algorithm pairing of a coned graph, computed with its structure.

    Edge and cone-edge columns only ever reduce against vertex rows, which is
    union-find with the elder rule. A cone triangle ``w*uv`` first reduces in its
    cone-edge rows, again union-find, this time over the superlevel graph. When
    those rows cancel, what is left is the cycle ``uv`` + (superlevel spanning
    forest path from ``v`` to ``u``), which is then reduced against earlier cycles
    on the original-edge rows using int bitsets.
    """
    n, e = cx.node_count, cx.edges
    m = len(e)
    pairs: list[tuple[int, int]] = []

    # dimension 0 columns; node n stands for the cone vertex
    parent = list(range(n + 1))
    birth = cx.vertex_pos.tolist() + [cx.cone_pos]

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    ends = np.concatenate([e, np.column_stack([np.full(n, n), np.arange(n)])]) if m \
        else np.column_stack([np.full(n, n), np.arange(n)])
    where = np.concatenate([cx.edge_pos, cx.cone_edge_pos])
    for k in np.argsort(where).tolist():
        a, b = find(int(ends[k, 0])), find(int(ends[k, 1]))
        if a == b:
            continue
        young, old = (a, b) if birth[a] > birth[b] else (b, a)
        pairs.append((birth[young], int(where[k])))
        parent[young] = old

    # dimension 1 columns (cone triangles)
    edge_rank = np.empty(m, dtype=np.int64)
    by_pos = np.argsort(cx.edge_pos)
    edge_rank[by_pos] = np.arange(m)
    pos_of_rank = cx.edge_pos[by_pos].tolist()
    cone_birth = cx.cone_edge_pos.tolist()
    tree = list(range(n))           # component id per vertex
    members = [[v] for v in range(n)]
    oldest = list(cone_birth)       # earliest cone-edge position per component
    path = [0] * n                  # forest path to the component anchor, as edge-rank bitset
    pivots: dict[int, int] = {}
    eu, ev, er = e[:, 0].tolist(), e[:, 1].tolist(), edge_rank.tolist()
    tpos = cx.cone_triangle_pos.tolist()
    for i in np.argsort(cx.cone_triangle_pos).tolist():
        u, v, bit = eu[i], ev[i], 1 << er[i]
        tu, tv = tree[u], tree[v]
        if tu != tv:
            if oldest[tu] > oldest[tv]:
                pairs.append((oldest[tu], tpos[i]))
            else:
                pairs.append((oldest[tv], tpos[i]))
            if len(members[tu]) < len(members[tv]):
                u, v, tu, tv = v, u, tv, tu
            delta = path[v] ^ bit ^ path[u]
            for y in members[tv]:
                path[y] ^= delta
                tree[y] = tu
            members[tu] += members[tv]
            members[tv] = []
            oldest[tu] = min(oldest[tu], oldest[tv])
            continue
        col = path[u] ^ path[v] ^ bit
        while True:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                pairs.append((pos_of_rank[low], tpos[i]))
                break
            col ^= other
    return _pairing(pairs, len(cx))


REDUCERS = {
    "cone": cone_reduction,
    "standard": lambda cx: standard_reduction(cx.boundary),
    "twist": lambda cx: twist_reduction(cx.boundary),
}


def reduce_boundary_matrix(cx: ConedComplex, reducer: str | Callable = "cone",
                           check: bool = True) -> RawPairing:
    """Persistence pairing of the coned complex.

    ``reducer`` is a name from :data:`REDUCERS` or a callable taking the complex.
    All reducers return the same pairing.
    """
    if check:
        check_filtration_order(cx)
    fn = REDUCERS[reducer] if isinstance(reducer, str) else reducer
    return fn(cx)


def extract_diagram(cx: ConedComplex, raw: RawPairing) -> PersistenceDiagram:
    """Classify raw pairs and map their endpoints back to input units.

    Ordinary and relative pairs with equal birth and death values are dropped;
    extended pairs are always kept. The cone vertex's never-dying class carries
    no information about the graph and is not reported.
    """
    b, d = raw.pairs[:, 0], raw.pairs[:, 1]
    b_asc = cx.values[b] < 0
    d_asc = cx.values[d] < 0
    kind = np.where(b_asc & d_asc, 0, np.where(b_asc, 2, 1))
    births = cx.orig_value[b]
    deaths = cx.orig_value[d]
    keep = (kind == 2) | (births != deaths)
    # a cone vertex birth can only belong to the global essential class
    keep &= cx.role[b] != CONE_VERTEX
    n, m = cx.node_count, len(cx.edges)
    g = Graph(n, cx.edges)
    c, _ = g.component_labels()
    return PersistenceDiagram(cx.dims[b][keep], kind[keep], births[keep], deaths[keep],
                              (n, m, c, m - n + c))


def extended_persistence(g: Graph, filt: SimplexFiltration, reducer: str | Callable = "cone",
                         check: bool = False) -> PersistenceDiagram:
    cx = build_coned_complex(g, filt)
    return extract_diagram(cx, reduce_boundary_matrix(cx, reducer, check=check))
