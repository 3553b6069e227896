"""Train the simple-vs-complex tree and the threshold regression on fresh simulations."""

import networkx as nx
import numpy as np

from contagion_eph import ContagionParams, featurize_batch, run
from contagion_eph.graph import from_edge_list
from contagion_eph.learn import accuracy_with_ci, fit_poly, fit_tree, predict_theta, split_indices

g = from_edge_list(nx.powerlaw_cluster_graph(400, 8, 0.3, seed=2).edges())
rng = np.random.default_rng(0)

# simple contagion with q drawn per run, threshold contagion at theta=3
simple = [run(g, ContagionParams.simple(float(rng.choice([0.02, 0.03, 0.04, 0.05]))), s) for s in range(150)]
complex_ = [run(g, ContagionParams.threshold(3, 0.02), 1000 + s) for s in range(150)]
rows = featurize_batch(g, simple + complex_)
x = np.array([r.eph for r in rows])
y = np.array(["simple"] * 150 + ["complex"] * 150)

train, test = split_indices(len(y), 0.8, rng, y)
tree = fit_tree(x[train], y[train])
print("tree:", tree.dumps().strip())
print("accuracy and 95%% Wilson interval: %.3f [%.3f, %.3f]" % accuracy_with_ci(tree.predict(x[test]), y[test]))

# threshold regression over theta = 2..7
traces = [run(g, ContagionParams.threshold(t, 0.02), 5000 + 100 * t + s) for t in range(2, 8) for s in range(60)]
rows = featurize_batch(g, traces)
x = np.array([r.eph for r in rows])
y = np.array([int(r.theta) for r in rows])
train, test = split_indices(len(y), 0.8, rng, y)
model = fit_poly(x[train], y[train], 2)
pred = predict_theta(model, x[test])
err = np.abs(pred - y[test])
print("theta polynomial:", model.dumps().strip())
print(f"exact {np.mean(err == 0):.2f}, within one {np.mean(err <= 1):.2f}")
