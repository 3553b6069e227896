import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contagion_eph.learn import (PolyModel, TreeModel, accuracy_with_ci, fit_forest, fit_poly, fit_tree,
                                 predict_theta, r2_score, split_indices, train_test_split, wilson_interval)

# statsmodels.stats.proportion.proportion_confint(..., method="wilson")
WILSON_10_OF_10 = (0.7224672001371106, 1.0)
WILSON_0_OF_10 = (0.0, 0.27753279986288926)
WILSON_160_OF_200 = (0.7391448134346212, 0.8495479907390189)


def test_split_balanced_1600():
    labels = ["simple"] * 800 + ["complex"] * 800
    tr, te = split_indices(1600, 0.8, np.random.default_rng(0), labels)
    assert (len(tr), len(te)) == (1280, 320)
    assert sum(labels[i] == "simple" for i in te) == 160
    assert not set(tr) & set(te)


def test_split_two_records():
    train, test = train_test_split(["a", "b"], 0.5, np.random.default_rng(0), labels=["a", "b"])
    assert len(train) == len(test) == 1


def test_split_is_deterministic():
    a = split_indices(100, 0.8, np.random.default_rng(3), [i % 3 for i in range(100)])
    b = split_indices(100, 0.8, np.random.default_rng(3), [i % 3 for i in range(100)])
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@settings(max_examples=50)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=200), st.floats(0.05, 0.95))
def test_split_partitions_with_balance(labels, fraction):
    tr, te = split_indices(len(labels), fraction, np.random.default_rng(0), labels)
    assert sorted(np.concatenate([tr, te]).tolist()) == list(range(len(labels)))
    lab = np.array(labels)
    for c in set(labels):
        assert abs((lab[tr] == c).sum() - fraction * (lab == c).sum()) <= 1


def test_separable_tree_is_a_stump():
    x = np.r_[np.linspace(0, 1, 20), np.linspace(2, 3, 20)]
    y = ["complex"] * 20 + ["simple"] * 20
    t = fit_tree(x, y)
    assert t.depth == 1 and (t.predict(x) == np.array(y)).all()


def test_constant_feature_gives_majority_leaf():
    t = fit_tree(np.zeros(30), ["a"] * 12 + ["b"] * 18)
    assert t.depth == 0 and set(t.predict([0.0, 5.0])) == {"b"}


def test_single_class_rejected():
    with pytest.raises(ValueError):
        fit_tree([1.0, 2.0], ["a", "a"])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=12, max_size=60), st.integers(0, 1000))
def test_tree_invariant_under_monotone_transform(xs, seed):
    # integer inputs keep the transform injective in floating point
    x = np.array(xs, dtype=float)
    y = np.random.default_rng(seed).choice(["a", "b"], size=len(x))
    if len(set(y)) < 2:
        return
    a = fit_tree(x, y).predict(x)
    b = fit_tree(np.exp(x), y).predict(np.exp(x))
    assert (a == b).all()


def test_tree_respects_depth_and_leaf_size():
    rng = np.random.default_rng(1)
    x = rng.random(400)
    y = np.where(rng.random(400) < x, "a", "b")
    t = fit_tree(x, y, max_depth=5, min_leaf=5)
    assert t.depth <= 5

    def leaves(node):
        return [sum(node.counts.values())] if node.is_leaf else leaves(node.left) + leaves(node.right)
    assert min(leaves(t.root)) >= 5


def test_tree_dump_round_trip():
    rng = np.random.default_rng(2)
    x = rng.random(200)
    y = np.where(x + 0.2 * rng.random(200) > 0.6, "simple", "complex")
    t = fit_tree(x, y)
    back = TreeModel.loads(t.dumps())
    assert back.dumps() == t.dumps()
    assert (back.predict(x) == t.predict(x)).all()


def test_forest_is_seeded_and_accurate():
    rng = np.random.default_rng(5)
    x = np.r_[rng.normal(0, 1, 100), rng.normal(4, 1, 100)]
    y = np.array(["a"] * 100 + ["b"] * 100)
    f1 = fit_forest(x, y, np.random.default_rng(9), n_trees=20)
    f2 = fit_forest(x, y, np.random.default_rng(9), n_trees=20)
    assert len(f1.trees) == 20
    assert (f1.predict(x) == f2.predict(x)).all()
    assert (f1.predict(x) == y).mean() > 0.95


def test_poly_exact_quadratic():
    x = np.linspace(-3, 5, 30)
    m = fit_poly(x, x ** 2, 2)
    assert np.allclose(m.coefficients, [0, 0, 1], atol=1e-9)


def test_poly_constant_target():
    m = fit_poly(np.arange(10.0), np.full(10, 4.0), 3)
    assert np.allclose(m.coefficients, [4, 0, 0, 0], atol=1e-9)


def test_poly_dump_round_trip():
    x = np.linspace(0.5, 3, 40)
    m = fit_poly(x, 1 / x, 3)
    back = PolyModel.loads(m.dumps())
    assert np.allclose(back.predict(x), m.predict(x), rtol=1e-9)
    assert m.dumps().split()[0] == "3" and len(m.dumps().split()) == 5


def test_poly_needs_distinct_points():
    with pytest.raises(ValueError):
        fit_poly([1.0, 1.0, 2.0], [0.0, 1.0, 2.0], 2)


def test_predict_theta_rounds_and_clamps():
    for raw, want in [(2.4, 2), (2.5, 3), (9.3, 7), (-1.0, 2)]:
        assert predict_theta(PolyModel(0, np.array([raw])), 0.0) == want


def test_wilson_closed_form():
    acc, lo, hi = accuracy_with_ci(["a"] * 10, ["a"] * 10)
    assert acc == 1.0 and (lo, hi) == pytest.approx(WILSON_10_OF_10, abs=1e-12)
    acc, lo, hi = accuracy_with_ci(["a"] * 10, ["b"] * 10)
    assert acc == 0.0 and (lo, hi) == pytest.approx(WILSON_0_OF_10, abs=1e-12)
    assert wilson_interval(160, 200) == pytest.approx(WILSON_160_OF_200, abs=1e-12)


@given(st.integers(1, 500), st.data())
def test_wilson_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1
    assert wilson_interval(n - k, n) == pytest.approx((1 - hi, 1 - lo), abs=1e-12)


def test_r2_cases():
    t = np.array([-1.0, 0.0, 1.0])
    assert r2_score(t, t) == 1.0
    assert r2_score(np.zeros(3), t) == 0.0
    assert r2_score(-t, t) == pytest.approx(-3.0)
    with pytest.raises(ValueError):
        r2_score([1.0, 2.0], [3.0, 3.0])
