"""Vertex/edge filtrations built from contagion traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contagion import ContagionTrace, assign_T
from .graph import Graph


@dataclass(frozen=True, eq=False)
class SimplexFiltration:
    """Filtration values on vertices and edges (edge value = max of its endpoints)."""

    vertex_value: np.ndarray
    edge_value: np.ndarray


def reversed_infection_filtration(trace: ContagionTrace) -> np.ndarray:
    """``-T(v)``: seeds sit at 0, later infections further down, uninfected lowest."""
    return -assign_T(trace)


def extend_to_edges(g: Graph, f) -> SimplexFiltration:
    f = np.asarray(f)
    if f.shape != (g.node_count,):
        raise ValueError(f"need one value per node ({g.node_count}), got shape {f.shape}")
    if f.dtype.kind == "f" and np.isnan(f).any():
        raise ValueError("filtration has missing (NaN) vertex values")
    e = g.edges
    edge_value = np.maximum(f[e[:, 0]], f[e[:, 1]]) if len(e) else f[:0].copy()
    return SimplexFiltration(f.copy(), edge_value)


def trace_filtration(g: Graph, trace: ContagionTrace) -> SimplexFiltration:
    return extend_to_edges(g, reversed_infection_filtration(trace))


def format_filtration(g: Graph, filt: SimplexFiltration) -> str:
    """Text dump: ``node value`` lines followed by ``u v value`` lines."""
    out = [f"{v} {x}" for v, x in enumerate(filt.vertex_value.tolist())]
    out += [f"{u} {v} {x}" for (u, v), x in zip(g.edges.tolist(), filt.edge_value.tolist())]
    return "\n".join(out) + "\n"
