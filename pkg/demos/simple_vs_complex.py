"""EPH of simple and threshold contagion on a clustered synthetic network.

Run with a real edge list instead by passing its path: python simple_vs_complex.py edges.txt
"""

import sys

import networkx as nx
import numpy as np

from contagion_eph import ContagionParams, featurize_batch, run
from contagion_eph.datasets import load_edge_list
from contagion_eph.graph import from_edge_list

if len(sys.argv) > 1:
    g = load_edge_list(sys.argv[1])
else:
    g = from_edge_list(nx.powerlaw_cluster_graph(500, 8, 0.3, seed=1).edges())
print(f"{g.node_count} nodes, {g.edge_count} edges")

runs = 50
settings = [ContagionParams.simple(q) for q in (0.02, 0.03, 0.04, 0.05)]
settings += [ContagionParams.threshold(theta, 0.02) for theta in range(2, 8)]

for params in settings:
    traces = [run(g, params, seed) for seed in range(runs)]
    rows = featurize_batch(g, traces)
    eph = np.array([r.eph for r in rows])
    steps = np.mean([r.steps_run for r in rows])
    label = f"simple q={params.q}" if params.model == "simple" else f"threshold theta={params.theta}"
    print(f"{label:<22} mean EPH {eph.mean():.3f} +- {eph.std():.3f}   mean steps {steps:.1f}")
