"""Discrete-time SI simulation of simple and noisy-threshold contagion.

All updates are synchronous: the infection probability of every susceptible
node at step ``t`` depends only on the infected set after step ``t - 1``.

Simple contagion (recorded as ``theta = inf``) infects a node with ``k`` infected
neighbours with probability ``1 - (1 - q)**k``. Noisy-threshold contagion
infects with certainty once ``k >= theta``; below the threshold (``k >= 1``)
it infects with probability ``1 - (1 - q)**k`` (``per_edge``) or ``q``
(``per_node``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .graph import Graph

SIMPLE = "simple"
THRESHOLD = "threshold"
PER_EDGE = "per_edge"
PER_NODE = "per_node"


@dataclass(frozen=True)
class InfectedFraction:
    fraction: float = 0.85

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError(f"infected fraction must lie in (0, 1], got {self.fraction}")


@dataclass(frozen=True)
class StepCap:
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"step cap must be positive, got {self.steps}")


Termination = Union[InfectedFraction, StepCap]


@dataclass(frozen=True)
class ContagionParams:
    model: str = SIMPLE
    q: float = 0.02
    theta: float = math.inf
    seed_count: int | None = None  # None: ceil(1% of nodes)
    termination: Termination = field(default_factory=InfectedFraction)
    sub_threshold: str = PER_EDGE

    def __post_init__(self):
        if self.model not in (SIMPLE, THRESHOLD):
            raise ValueError(f"unknown contagion model {self.model!r}")
        if not 0 <= self.q <= 1:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if self.model == SIMPLE:
            object.__setattr__(self, "theta", math.inf)
        elif not (self.theta >= 2 and float(self.theta).is_integer()):
            raise ValueError(f"threshold contagion needs an integer theta >= 2, got {self.theta}")
        else:
            object.__setattr__(self, "theta", int(self.theta))
        if self.seed_count is not None and self.seed_count < 1:
            raise ValueError("seed_count must be positive")
        if self.sub_threshold not in (PER_EDGE, PER_NODE):
            raise ValueError(f"unknown sub-threshold semantics {self.sub_threshold!r}")

    @classmethod
    def simple(cls, q: float, **kw) -> "ContagionParams":
        return cls(model=SIMPLE, q=q, **kw)

    @classmethod
    def threshold(cls, theta: int, q: float = 0.02, **kw) -> "ContagionParams":
        return cls(model=THRESHOLD, q=q, theta=theta, **kw)

    def with_termination(self, termination: Termination) -> "ContagionParams":
        return replace(self, termination=termination)


@dataclass(frozen=True, eq=False)
class ContagionTrace:
    infection_step: np.ndarray  # -1 for never infected
    seeds: np.ndarray
    steps_run: int
    final_infected_fraction: float
    params: ContagionParams
    rng_seed: int | None = None

    @property
    def infected(self) -> np.ndarray:
        return self.infection_step >= 0


def default_seed_count(node_count: int) -> int:
    return max(1, math.ceil(0.01 * node_count))


def select_seeds(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    if not 1 <= count <= g.node_count:
        raise ValueError(f"seed count {count} outside [1, {g.node_count}]")
    return np.sort(rng.choice(g.node_count, size=count, replace=False))


def infection_probability(k: np.ndarray, params: ContagionParams) -> np.ndarray:
    """Per-node infection probability given ``k`` infected neighbours."""
    k = np.asarray(k)
    p = np.where(k > 0, 1.0 - (1.0 - params.q) ** k, 0.0)
    if params.model == THRESHOLD:
        if params.sub_threshold == PER_NODE:
            p = np.where(k > 0, params.q, 0.0)
        p = np.where(k >= params.theta, 1.0, p)
    return p


def _exposure(g: Graph, infected: np.ndarray) -> np.ndarray:
    return g.adjacency @ infected.astype(np.int32)


def step(g: Graph, infected: np.ndarray, params: ContagionParams,
         rng: np.random.Generator) -> np.ndarray:
    """One synchronous update; returns the ids of newly infected nodes.

    ``infected`` is a boolean mask (an id array is also accepted).
    """
    mask = np.zeros(g.node_count, dtype=bool)
    if infected.dtype == bool:
        mask[:] = infected
    else:
        mask[infected] = True
    k = _exposure(g, mask)
    candidates = np.flatnonzero(~mask & (k > 0))
    if len(candidates) == 0:
        return candidates
    p = infection_probability(k[candidates], params)
    hit = rng.random(len(candidates)) < p
    return candidates[hit]


def run(g: Graph, params: ContagionParams, rng: np.random.Generator | int,
        seeds: np.ndarray | None = None) -> ContagionTrace:
    """Simulate until the termination rule fires, the graph saturates, or spread stalls.

    ``rng`` may be an integer seed, in which case it is recorded on the trace.
    """
    rng_seed = None
    if not isinstance(rng, np.random.Generator):
        rng_seed = int(rng)
        rng = np.random.default_rng(rng_seed)
    n = g.node_count
    if seeds is None:
        count = params.seed_count if params.seed_count is not None else default_seed_count(n)
        seeds = select_seeds(g, count, rng)
    seeds = np.asarray(seeds, dtype=np.int64)

    step_of = np.full(n, -1, dtype=np.int64)
    step_of[seeds] = 0
    mask = step_of >= 0
    n_inf = int(mask.sum())
    term = params.termination
    t = 0
    while n_inf < n:
        if isinstance(term, InfectedFraction) and n_inf >= term.fraction * n:
            break
        if isinstance(term, StepCap) and t >= term.steps:
            break
        k = _exposure(g, mask)
        candidates = np.flatnonzero(~mask & (k > 0))
        p = infection_probability(k[candidates], params)
        if not (p > 0).any():
            break  # stalled: nothing can ever be infected again
        t += 1
        new = candidates[rng.random(len(candidates)) < p]
        step_of[new] = t
        mask[new] = True
        n_inf += len(new)
    return ContagionTrace(step_of, np.sort(seeds), t, n_inf / n if n else 0.0, params, rng_seed)


def assign_T(trace: ContagionTrace) -> np.ndarray:
    """Infection step per node; never-infected nodes get the last infection step plus one."""
    s = trace.infection_step
    if not (s >= 0).any():
        raise ValueError("trace has no infected nodes")
    return np.where(s >= 0, s, s.max() + 1)
