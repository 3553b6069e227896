"""Contagion simulation on networks and extended persistent homology features."""

from .contagion import ContagionParams, ContagionTrace, InfectedFraction, StepCap, assign_T, run
from .eph import PersistenceDiagram, extended_persistence
from .experiments import ExperimentConfig, run_scenario
from .features import FeatureRow, eph_feature, featurize, featurize_batch
from .filtration import SimplexFiltration, extend_to_edges, trace_filtration
from .graph import Graph, cycle_rank, from_edge_list, induced_subgraph
from .oracle import oracle_extended_persistence

__all__ = [
    "ContagionParams", "ContagionTrace", "InfectedFraction", "StepCap", "assign_T", "run",
    "PersistenceDiagram", "extended_persistence", "ExperimentConfig", "run_scenario",
    "FeatureRow", "eph_feature", "featurize", "featurize_batch",
    "SimplexFiltration", "extend_to_edges", "trace_filtration",
    "Graph", "cycle_rank", "from_edge_list", "induced_subgraph", "oracle_extended_persistence",
]
