"""Brute-force extended persistence for small graphs.

Builds the extended sequence

    H(X_{v1}) -> ... -> H(X_{vk}) = H(X) -> H(X, X^{vk}) -> ... -> H(X, X^{v1}) = 0

at every distinct vertex value ``v1 < ... < vk`` and reads off interval
multiplicities from the ranks of all composite maps by inclusion-exclusion.
``X_a`` holds the simplices with value <= a; ``X^a`` is the subcomplex spanned
by vertices with value >= a. Relative groups are computed on relative chains,
i.e. as reduced homology of the quotient ``X / X^a``.

Shares no code with the coning engine; it is meant for tests only.
"""

from __future__ import annotations

import numpy as np

from .eph import EXTENDED, ORDINARY, RELATIVE, PersistenceDiagram
from .filtration import SimplexFiltration
from .graph import Graph

MAX_ORACLE_NODES = 64


def gf2_rank(vectors: list[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                rank += 1
                break
            v ^= pivots[top]
    return rank


def gf2_kernel(columns: list[int]) -> list[int]:
    """Basis of {x : sum_j x_j columns[j] = 0}, each as a bitset over column indices."""
    pivots: dict[int, tuple[int, int]] = {}
    basis = []
    for j, c in enumerate(columns):
        combo = 1 << j
        while c:
            top = c.bit_length() - 1
            if top not in pivots:
                pivots[top] = (c, combo)
                break
            pc, pcombo = pivots[top]
            c ^= pc
            combo ^= pcombo
        if not c:
            basis.append(combo)
    return basis


class _Space:
    """A pair (K, A) of subcomplexes given by simplex masks over a global index.

    Global index: vertex v -> v, edge i -> n + i.
    """

    def __init__(self, n, edges, k_vert, k_edge, a_vert, a_edge):
        self.n = n
        self.edges = edges
        self.vert = [v for v in range(n) if k_vert[v] and not a_vert[v]]
        self.edge = [i for i in range(len(edges)) if k_edge[i] and not a_edge[i]]
        self.mask = 0
        for v in self.vert:
            self.mask |= 1 << v
        for i in self.edge:
            self.mask |= 1 << (n + i)

    def boundary(self, i) -> int:
        u, v = self.edges[i]
        return ((1 << u) | (1 << v)) & self.mask

    def cycles(self, dim) -> list[int]:
        if dim == 0:
            return [1 << v for v in self.vert]
        cols = [self.boundary(i) for i in self.edge]
        out = []
        for combo in gf2_kernel(cols):
            chain = 0
            for j, i in enumerate(self.edge):
                if combo >> j & 1:
                    chain |= 1 << (self.n + i)
            out.append(chain)
        return out

    def boundaries(self, dim) -> list[int]:
        if dim == 0:
            return [self.boundary(i) for i in self.edge]
        return []  # no 2-cells in a graph


def oracle_extended_persistence(g: Graph, filt: SimplexFiltration,
                                max_nodes: int = MAX_ORACLE_NODES) -> PersistenceDiagram:
    n, m = g.node_count, g.edge_count
    if n > max_nodes:
        raise ValueError(f"oracle limited to {max_nodes} nodes, graph has {n}")
    if n == 0:
        raise ValueError("empty graph")
    fv = np.asarray(filt.vertex_value, dtype=float)
    edges = [tuple(e) for e in g.edges.tolist()]
    fe = np.array([max(fv[u], fv[v]) for u, v in edges], dtype=float)
    fe_min = np.array([min(fv[u], fv[v]) for u, v in edges], dtype=float)
    vals = np.unique(fv)
    k = len(vals)
    everything_v = np.ones(n, bool)
    everything_e = np.ones(m, bool)
    nothing_v = np.zeros(n, bool)
    nothing_e = np.zeros(m, bool)

    # sequence positions 1..2k-1; position 2k is the zero group H(X, X)
    spaces = {}
    for i in range(1, k + 1):
        a = vals[i - 1]
        spaces[i] = _Space(n, edges, fv <= a, fe <= a, nothing_v, nothing_e)
    for j in range(1, k):
        a = vals[k - j]
        spaces[k + j] = _Space(n, edges, everything_v, everything_e, fv >= a, fe_min >= a)
    last = 2 * k - 1

    def value_at(pos):
        return vals[pos - 1] if pos <= k else vals[2 * k - pos]

    pairs = []
    for dim in (0, 1):
        cyc = {p: spaces[p].cycles(dim) for p in spaces}
        bnd = {p: spaces[p].boundaries(dim) for p in spaces}
        bnd_rank = {p: gf2_rank(bnd[p]) for p in spaces}
        cache = {}

        def rank(s, t):
            if s < 1 or t > last:
                return 0
            if (s, t) not in cache:
                mask = spaces[t].mask
                images = [z & mask for z in cyc[s]]
                cache[s, t] = gf2_rank(images + bnd[t]) - bnd_rank[t]
            return cache[s, t]

        for s in range(1, last + 1):
            for t in range(s, last + 1):
                mult = rank(s, t) - rank(s - 1, t) - rank(s, t + 1) + rank(s - 1, t + 1)
                if mult < 0:
                    raise AssertionError("negative interval multiplicity")
                if not mult:
                    continue
                death_pos = t + 1
                if death_pos <= k:
                    kind = ORDINARY
                elif s <= k:
                    kind = EXTENDED
                else:
                    kind = RELATIVE
                pairs += [(dim, kind, float(value_at(s)), float(value_at(death_pos)))] * mult
    c, _ = g.component_labels()
    return PersistenceDiagram.from_pairs(pairs, (n, m, c, m - n + c))
