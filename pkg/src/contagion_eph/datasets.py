"""Loading empirical contact networks from disk.

Two layouts are supported: plain edge lists (``u v`` per line) and temporal
contact streams (``t i j`` per line) that are collapsed into a static graph.
Node labels are remapped to dense ids in sorted label order; self-loops and
repeated contacts are dropped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, from_edge_list


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    expected_nodes: int
    expected_edges: int
    format: str  # "edge-list" or "temporal"
    filename: str = ""


EMAIL = DatasetDescriptor("email", 1005, 16706, "edge-list", "email-Eu-core.txt")
CONFERENCE = DatasetDescriptor("conference", 403, 9565, "temporal", "tij_SFHH.dat_")
SCHOOL = DatasetDescriptor("school", 591, 37873, "temporal", "utah_school.txt")
CANONICAL = {d.name: d for d in (EMAIL, CONFERENCE, SCHOOL)}

DATA_ENV = "CONTAGION_EPH_DATA"


@dataclass(frozen=True)
class ValidationReport:
    dataset: str
    passed: bool
    expected_nodes: int
    actual_nodes: int
    expected_edges: int
    actual_edges: int

    def __str__(self):
        status = "ok" if self.passed else "MISMATCH"
        return (f"{self.dataset}: {status} nodes {self.actual_nodes}/{self.expected_nodes} "
                f"edges {self.actual_edges}/{self.expected_edges}")


def _parse_label(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def _build(pairs: list[tuple], extra_labels: set = frozenset()) -> Graph:
    labels = {a for p in pairs for a in p} | set(extra_labels)
    # ints sort numerically, strings after them lexicographically
    ordered = sorted(labels, key=lambda x: (isinstance(x, str), x))
    index = {lab: i for i, lab in enumerate(ordered)}
    ids = [(index[a], index[b]) for a, b in pairs if a != b]
    return from_edge_list(np.asarray(ids, dtype=np.int64).reshape(-1, 2),
                          node_count=len(ordered), labels=tuple(ordered))


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("%"):
                continue
            yield lineno, line.replace(",", " ").split()


def load_edge_list(path: str | os.PathLike) -> Graph:
    """Read whitespace-separated ``u v`` pairs; extra columns (weights) are ignored."""
    pairs = []
    for lineno, toks in _lines(path):
        if len(toks) < 2:
            raise DatasetFormatError(f"{path}:{lineno}: expected two node labels, got {' '.join(toks)!r}")
        pairs.append((_parse_label(toks[0]), _parse_label(toks[1])))
    return _build(pairs, {a for p in pairs for a in p})


def load_temporal_contacts(path: str | os.PathLike) -> Graph:
    """Collapse ``t i j`` contact rows into the static union of contact pairs."""
    pairs = set()
    for lineno, toks in _lines(path):
        if len(toks) < 3:
            raise DatasetFormatError(f"{path}:{lineno}: expected 't i j', got {' '.join(toks)!r}")
        try:
            float(toks[0])
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: timestamp {toks[0]!r} is not numeric") from None
        pairs.add((_parse_label(toks[1]), _parse_label(toks[2])))
    return _build(sorted(pairs, key=lambda p: tuple((isinstance(x, str), x) for x in p)))


def load_graph(path: str | os.PathLike, format: str = "edge-list") -> Graph:
    if format in ("edge-list", "edge_list"):
        return load_edge_list(path)
    if format == "temporal":
        return load_temporal_contacts(path)
    raise ValueError(f"unknown dataset format {format!r}")


def validate_dataset(g: Graph, d: DatasetDescriptor) -> ValidationReport:
    passed = (g.node_count == d.expected_nodes and g.edge_count == d.expected_edges
              and g.node_count > 0)
    return ValidationReport(d.name, passed, d.expected_nodes, g.node_count,
                            d.expected_edges, g.edge_count)


def find_canonical(name: str, data_dir: str | os.PathLike | None = None) -> Path | None:
    """Locate a canonical dataset file under ``data_dir`` or ``$CONTAGION_EPH_DATA``."""
    d = CANONICAL[name]
    root = data_dir or os.environ.get(DATA_ENV)
    if not root:
        return None
    p = Path(root) / d.filename
    return p if p.exists() else None
