"""Small learners for single-feature contagion inference.

A CART classifier (gini, axis-aligned splits), a bagged forest of such trees,
least-squares polynomial regression, and the evaluation metrics used by the
experiment scenarios.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

Z_95 = 1.959963984540054


# -- splitting ---------------------------------------------------------------

def train_test_split(records: Sequence, fraction: float, rng: np.random.Generator,
                     labels: Sequence | None = None) -> tuple[list, list]:
    """Shuffle and split; stratified by ``labels`` when given."""
    tr, te = split_indices(len(records), fraction, rng, labels)
    return [records[i] for i in tr], [records[i] for i in te]


def split_indices(n: int, fraction: float, rng: np.random.Generator,
                  labels: Sequence | None = None) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < fraction < 1:
        raise ValueError(f"train fraction must lie in (0, 1), got {fraction}")
    if labels is None:
        perm = rng.permutation(n)
        cut = int(round(fraction * n))
        return np.sort(perm[:cut]), np.sort(perm[cut:])
    labels = np.asarray(labels)
    if len(labels) != n:
        raise ValueError("labels length does not match records")
    classes, counts = np.unique(labels, return_counts=True)
    # largest-remainder allocation keeps every class within one record of its share
    quota = fraction * counts
    take = np.floor(quota).astype(int)
    short = int(round(fraction * n)) - int(take.sum())
    if short > 0:
        take[np.argsort(-(quota - take), kind="stable")[:short]] += 1
    train, test = [], []
    for c, k in zip(classes, take):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


# -- decision tree -----------------------------------------------------------

@dataclass
class Node:
    label: object = None
    counts: dict = field(default_factory=dict)
    feature: int = -1
    threshold: float = math.nan
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def _gini_from_counts(counts: np.ndarray, total: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / total[..., None]
    return 1.0 - np.nansum(p * p, axis=-1)


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int):
    """Best (gain, feature, threshold) over all features; threshold is a data value."""
    n = len(y)
    parent = np.bincount(y, minlength=n_classes)
    parent_gini = 1.0 - ((parent / n) ** 2).sum()
    best = (0.0, -1, math.nan)
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs, ys = x[order, f], y[order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1
        left = np.cumsum(onehot, axis=0)[:-1]
        right = parent - left
        nl = np.arange(1, n, dtype=float)
        nr = n - nl
        valid = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        impurity = (nl * _gini_from_counts(left, nl) + nr * _gini_from_counts(right, nr)) / n
        gain = np.where(valid, parent_gini - impurity, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best[0] + 1e-12:
            best = (float(gain[i]), f, float(xs[i]))
    return best


@dataclass
class TreeModel:
    root: Node
    classes: tuple
    max_depth: int = 5
    min_leaf: int = 5

    def predict(self, x) -> np.ndarray:
        x = _as_matrix(x)
        out = []
        for row in x:
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out.append(node.label)
        return np.array(out, dtype=object if isinstance(self.classes[0], str) else None)

    @property
    def depth(self) -> int:
        def d(node):
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))
        return d(self.root)

    def dumps(self) -> str:
        def enc(node):
            if node.is_leaf:
                return f"(leaf,{node.label})"
            return f"({node.feature},{node.threshold!r},{enc(node.left)},{enc(node.right)})"
        return enc(self.root) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TreeModel":
        tokens = re.findall(r"\(|\)|,|[^(),\s]+", text)
        pos = 0

        def parse():
            nonlocal pos
            assert tokens[pos] == "("
            pos += 1
            head = tokens[pos]
            pos += 1
            if head == "leaf":
                pos += 1  # comma
                label = tokens[pos]
                pos += 2
                return Node(label=label)
            feature = int(head)
            pos += 1
            threshold = float(tokens[pos])
            pos += 2
            left = parse()
            pos += 1
            right = parse()
            pos += 1
            return Node(feature=feature, threshold=threshold, left=left, right=right)

        root = parse()
        labels = []

        def collect(node):
            if node.is_leaf:
                labels.append(node.label)
            else:
                collect(node.left)
                collect(node.right)
        collect(root)
        return cls(root, tuple(sorted(set(labels))))


def fit_tree(x, y, max_depth: int = 5, min_leaf: int = 5) -> TreeModel:
    """Greedy CART with gini gain. Leaves predict the majority class (ties: first class)."""
    x = _as_matrix(x)
    y = np.asarray(y)
    classes, yi = np.unique(y, return_inverse=True)
    if len(classes) < 2:
        raise ValueError("need at least two classes to fit a classifier")
    k = len(classes)
    labels = tuple(classes.tolist())

    def grow(idx, depth):
        counts = np.bincount(yi[idx], minlength=k)
        node = Node(label=labels[int(np.argmax(counts))],
                    counts={labels[c]: int(counts[c]) for c in range(k) if counts[c]})
        if depth >= max_depth or (counts > 0).sum() == 1 or len(idx) < 2 * min_leaf:
            return node
        gain, f, thr = _best_split(x[idx], yi[idx], k, min_leaf)
        if f < 0:
            return node
        go_left = x[idx, f] <= thr
        node.feature, node.threshold = f, thr
        node.left = grow(idx[go_left], depth + 1)
        node.right = grow(idx[~go_left], depth + 1)
        return node

    return TreeModel(grow(np.arange(len(yi)), 0), labels, max_depth, min_leaf)


@dataclass
class ForestModel:
    trees: list[TreeModel]
    classes: tuple

    def predict(self, x) -> np.ndarray:
        votes = np.array([t.predict(x) for t in self.trees], dtype=object)
        out = []
        for col in votes.T:
            vals, counts = np.unique(col.astype(str), return_counts=True)
            winner = vals[int(np.argmax(counts))]
            out.append(next(c for c in self.classes if str(c) == winner))
        return np.array(out, dtype=object)


def fit_forest(x, y, rng: np.random.Generator, n_trees: int = 100,
               max_depth: int = 5, min_leaf: int = 5) -> ForestModel:
    """Bootstrap-aggregated CART trees with majority vote."""
    x = _as_matrix(x)
    y = np.asarray(y)
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, len(y), size=len(y))
        if len(np.unique(y[idx])) < 2:
            continue
        trees.append(fit_tree(x[idx], y[idx], max_depth, min_leaf))
    if not trees:
        raise ValueError("every bootstrap sample was single-class")
    return ForestModel(trees, tuple(np.unique(y).tolist()))


# -- polynomial regression ---------------------------------------------------

@dataclass(frozen=True)
class PolyModel:
    """``y = sum_i coefficients[i] * x**i``; prediction goes through the standardized form."""

    degree: int
    coefficients: np.ndarray
    x_mean: float = 0.0
    x_scale: float = 1.0
    z_coefficients: np.ndarray | None = None

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.z_coefficients is None:
            return Polynomial(self.coefficients)(x)
        return Polynomial(self.z_coefficients)((x - self.x_mean) / self.x_scale)

    def dumps(self) -> str:
        return " ".join([str(self.degree)] + [repr(float(c)) for c in self.coefficients]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PolyModel":
        parts = text.split()
        degree = int(parts[0])
        coef = np.array([float(c) for c in parts[1:]])
        if len(coef) != degree + 1:
            raise ValueError("coefficient count does not match degree")
        return cls(degree, coef)


def fit_poly(x, y, degree: int) -> PolyModel:
    """Least squares via normal equations on the standardized feature."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < degree + 1:
        raise ValueError(f"degree {degree} needs at least {degree + 1} distinct x values")
    mu = float(x.mean())
    sd = float(x.std()) or 1.0
    z = (x - mu) / sd
    design = np.vander(z, degree + 1, increasing=True)
    gram = design.T @ design
    if np.linalg.cond(gram) > 1e12:
        raise ValueError("design matrix is numerically rank deficient")
    cz = np.linalg.solve(gram, design.T @ y)
    coef = Polynomial(cz)(Polynomial([-mu / sd, 1.0 / sd])).coef
    coef = np.pad(coef, (0, degree + 1 - len(coef)))
    return PolyModel(degree, coef, mu, sd, cz)


def predict_theta(model: PolyModel, eph, lo: int = 2, hi: int = 7):
    """Round the raw regression output to the nearest threshold in ``[lo, hi]``."""
    raw = model.predict(eph)
    out = np.clip(np.floor(raw + 0.5), lo, hi).astype(int)
    return int(out) if out.ndim == 0 else out


# -- metrics -----------------------------------------------------------------

def wilson_interval(successes: int, n: int, z: float = Z_95) -> tuple[float, float]:
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


def accuracy_with_ci(preds, truths) -> tuple[float, float, float]:
    preds = np.asarray(preds, dtype=object)
    truths = np.asarray(truths, dtype=object)
    if len(preds) != len(truths):
        raise ValueError("predictions and truths differ in length")
    if len(preds) == 0:
        raise ValueError("no predictions")
    hits = int(sum(a == b for a, b in zip(preds.tolist(), truths.tolist())))
    lo, hi = wilson_interval(hits, len(preds))
    return hits / len(preds), lo, hi


def r2_score(preds, truths) -> float:
    preds = np.asarray(preds, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if len(truths) < 2 or len(preds) != len(truths):
        raise ValueError("need at least two paired samples")
    ss_tot = float(((truths - truths.mean()) ** 2).sum())
    if ss_tot == 0:
        raise ValueError("R^2 is undefined for constant truths")
    return 1.0 - float(((truths - preds) ** 2).sum()) / ss_tot
