"""Scalar features of a (graph, trace) pair."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .contagion import ContagionTrace
from .eph import PersistenceDiagram, extended_persistence
from .filtration import trace_filtration
from .graph import Graph, induced_subgraph

CSV_COLUMNS = ("model", "q", "theta", "seed", "steps_run", "infected_fraction",
               "eph", "eph_pair_count", "baseline_corr")


@dataclass(frozen=True)
class FeatureRow:
    model: str
    q: float
    theta: float
    seed: int | None
    steps_run: int
    infected_fraction: float
    eph: float
    eph_pair_count: int
    baseline_corr: float

    def as_csv_fields(self) -> list[str]:
        d = asdict(self)
        return [_fmt(d[c]) for c in CSV_COLUMNS]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return str(x)


def eph_feature(diagram: PersistenceDiagram) -> tuple[float, int]:
    """Mean lifetime of the dimension-1 pairs (extended and relative pooled) and their count."""
    life = diagram.lifetimes[diagram.dims == 1]
    if len(life) == 0:
        return 0.0, 0
    return float(life.mean()), int(len(life))


def baseline_degree_correlation(g: Graph, trace: ContagionTrace) -> float:
    """Pearson correlation of infection step against degree over infected nodes.

    Returns 0 when either variable is constant.
    """
    inf = trace.infection_step >= 0
    if inf.sum() < 2:
        raise ValueError("need at least two infected nodes")
    x = trace.infection_step[inf].astype(float)
    y = g.degrees[inf].astype(float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def project_trace(g: Graph, trace: ContagionTrace,
                  observed: Sequence[int] | np.ndarray) -> tuple[Graph, ContagionTrace]:
    """Restrict a trace to the subgraph induced by the observed nodes."""
    sub, remap = induced_subgraph(g, observed)
    steps = trace.infection_step[remap]
    seeds = np.flatnonzero(steps == 0)
    frac = float((steps >= 0).mean())
    return sub, ContagionTrace(steps, seeds, trace.steps_run, frac, trace.params, trace.rng_seed)


def featurize(g: Graph, trace: ContagionTrace) -> FeatureRow:
    diagram = extended_persistence(g, trace_filtration(g, trace))
    eph, count = eph_feature(diagram)
    try:
        corr = baseline_degree_correlation(g, trace)
    except ValueError:
        corr = 0.0
    p = trace.params
    return FeatureRow(p.model, p.q, float(p.theta), trace.rng_seed, trace.steps_run,
                      trace.final_infected_fraction, eph, count, corr)


def featurize_batch(g: Graph, traces: Iterable[ContagionTrace],
                    observation: Sequence[int] | np.ndarray | None = None) -> list[FeatureRow]:
    rows = []
    for tr in traces:
        if observation is not None:
            sub, ptr = project_trace(g, tr, observation)
            rows.append(featurize(sub, ptr))
        else:
            rows.append(featurize(g, tr))
    return rows
