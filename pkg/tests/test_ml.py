import numpy as np
import pytest

from gargaml.graph import build_graph
from gargaml.metrics import auc_roc
from gargaml.ml import (FEATURE_NAMES, FeatureRow, TreeModel, build_features, feature_matrix,
                        log_loss, neighbour_stats, predict, raw_margin, stratified_split,
                        train_decision_tree, train_gradient_boost)
from gargaml.ml.trees import _best_split
from gargaml.scoring import score_all


def rows_from(X, y):
    return [FeatureRow(i, float(x[0]), 0, (0.0,) * 4, (0.0,) * 4, bool(t))
            for i, (x, t) in enumerate(zip(X, y))]


def leaf_counts(model, X):
    out = []
    for t in model.trees:
        hit = np.bincount(t.apply(X), minlength=len(t.feature))
        out += [hit[i] for i in t.leaves()]
    return out


def test_isolated_node_features():
    g = build_graph([(0, 1)], node_count=3)
    rows = build_features(g, [0.1, 0.2, 0.3], [False, False, True])
    r = rows[2]
    assert r.own_score == 0.3 and r.own_degree == 0
    assert r.neigh_degree_stats == (0.0,) * 4 and r.neigh_score_stats == (0.0,) * 4


def test_neighbour_score_stats():
    g = build_graph([(0, 1), (2, 0)], node_count=3)
    r = build_features(g, [0.0, 0.2, 0.4], [False] * 3)[0]
    assert r.neigh_score_stats == pytest.approx((0.2, 0.3, 0.4, 0.1))
    assert r.own_degree == 2


def test_toy_node_23_features(toy):
    scores = score_all(toy, "undirected")
    r = build_features(toy, scores, np.zeros(24, bool))[23]
    nb = np.array([scores[v].score for v in (20, 21, 22)])
    assert r.neigh_score_stats == pytest.approx((nb.min(), nb.mean(), nb.max(), nb.std()))
    assert len(r.vector()) == len(FEATURE_NAMES)


def test_neighbour_stats_oracle(rng):
    counts = rng.integers(0, 5, 30)
    indptr = np.r_[0, np.cumsum(counts)]
    vals = rng.random(indptr[-1])
    out = neighbour_stats(indptr, vals)
    for i in range(30):
        seg = vals[indptr[i]:indptr[i + 1]]
        want = (seg.min(), seg.mean(), seg.max(), seg.std()) if seg.size else (0, 0, 0, 0)
        np.testing.assert_allclose(out[i], want, atol=1e-12)


@pytest.mark.parametrize("pos, neg, want", [(10, 90, 7), (33, 67, 23)])
def test_stratified_split(pos, neg, want):
    rows = rows_from(np.zeros((pos + neg, 1)), [True] * pos + [False] * neg)
    train, test = stratified_split(rows, 0.7, seed=1)
    n_pos = sum(r.label for r in train)
    assert abs(n_pos - want) <= 1
    assert abs((len(train) - n_pos) - 0.7 * neg) <= 1
    assert len(train) + len(test) == pos + neg
    assert {r.node for r in train}.isdisjoint({r.node for r in test})


def test_stratified_split_degenerate():
    with pytest.raises(ValueError):
        stratified_split(rows_from(np.zeros((10, 1)), [False] * 10))
    with pytest.raises(ValueError):
        stratified_split(rows_from(np.zeros((10, 1)), [True] + [False] * 9))
    with pytest.raises(ValueError):
        stratified_split(rows_from(np.zeros((10, 1)), [True, True] + [False] * 8), 1.0)


def test_tree_separable():
    X = np.linspace(0, 1, 20)[:, None]
    y = X[:, 0] > 0.5
    model = train_decision_tree((X, y))
    assert model.trees[0].depth == 1
    assert np.array_equal(predict(model, X), y.astype(float))


def test_tree_too_small_single_leaf():
    X = np.ones((15, 2))
    y = np.array([1] * 5 + [0] * 10, bool)
    model = train_decision_tree((X, y))
    assert len(model.trees[0].feature) == 1
    assert predict(model, X) == pytest.approx(np.full(15, 1 / 3))


def xor_quadrants():
    """40 rows, 10 per quadrant, label = (x0 > 0.5) xor (x1 > 0.5).

    Quadrants occupy separate x0 bands so greedy Gini splits can peel them off
    one at a time; a balanced random XOR sample has no useful first split.
    """
    bands = {(0, 1): (0.0, 0.2), (0, 0): (0.3, 0.45), (1, 0): (0.55, 0.7), (1, 1): (0.8, 1.0)}
    X, y = [], []
    for (qx, qy), (lo, hi) in bands.items():
        X.append(np.column_stack([np.linspace(lo, hi, 10), qy * 0.55 + np.linspace(0, 0.45, 10)]))
        y += [bool(qx) ^ bool(qy)] * 10
    return np.vstack(X), np.array(y)


def test_tree_xor():
    X, y = xor_quadrants()
    assert np.array_equal(y, (X[:, 0] > 0.5) ^ (X[:, 1] > 0.5))
    model = train_decision_tree((X, y))
    acc = np.mean((predict(model, X) >= 0.5) == y)
    assert acc >= 0.9 and model.trees[0].depth >= 2
    assert min(leaf_counts(model, X)) >= 10


def test_root_split_is_brute_force_best():
    rng = np.random.default_rng(2)
    X = rng.random((40, 2))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(float)

    def gini(t):
        p = t.mean()
        return 2 * p * (1 - p)

    best = (-1, 0.0, 0.0)
    for f in range(2):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            if left.sum() < 10 or (~left).sum() < 10:
                continue
            gain = gini(y) - (left.mean() * gini(y[left]) + (~left).mean() * gini(y[~left]))
            if gain > best[2] + 1e-12:
                best = (f, thr, gain)
    f, thr, gain = _best_split(X, y, np.arange(40), 10, "gini")
    assert (f, thr) == (best[0], pytest.approx(best[1]))
    assert gain == pytest.approx(best[2])


def test_split_tie_prefers_lower_feature():
    X = np.column_stack([np.arange(20.0), np.arange(20.0)])
    y = (np.arange(20) >= 10).astype(float)
    assert _best_split(X, y, np.arange(20), 10, "gini")[0] == 0


def test_boost_shapes_and_leaf_sizes(rng):
    X = rng.normal(size=(300, 3))
    y = X[:, 0] + 0.5 * rng.normal(size=300) > 0
    model = train_gradient_boost((X, y))
    assert model.kind == "gradient_boost" and len(model.trees) == 100
    assert all(t.depth <= 3 for t in model.trees)
    assert min(leaf_counts(model, X)) >= 10
    assert model.base_score == pytest.approx(np.log(y.mean() / (1 - y.mean())))


def test_boost_loss_decreasing_on_separable():
    X = np.linspace(-1, 1, 100)[:, None]
    y = X[:, 0] > 0
    model = train_gradient_boost((X, y))
    loss = model.train_loss
    assert all(b < a for a, b in zip(loss[:10], loss[1:11]))
    assert loss[-1] == pytest.approx(log_loss(y, raw_margin(model, X)))


def test_boost_constant_features_predicts_prior():
    X = np.ones((50, 4))
    y = np.array([1] * 10 + [0] * 40, bool)
    p = predict(train_gradient_boost((X, y)), X)
    assert np.all(np.abs(p - 0.2) <= 1e-6)


def test_boost_blob_auc():
    rng = np.random.default_rng(7)
    X = np.vstack([rng.normal(0, 1, (100, 2)), rng.normal(2.5, 1, (100, 2))])
    y = np.r_[np.zeros(100, bool), np.ones(100, bool)]
    idx = rng.permutation(200)
    tr, te = idx[:140], idx[140:]
    model = train_gradient_boost((X[tr], y[tr]))
    assert auc_roc(predict(model, X[te]), y[te]) > 0.9


def test_boost_needs_both_classes():
    with pytest.raises(ValueError):
        train_gradient_boost((np.zeros((20, 1)), np.zeros(20, bool)))


def test_predictions_row_order_invariant(rng):
    X = rng.normal(size=(120, 3))
    y = X[:, 1] > 0.2
    for model in (train_decision_tree((X, y)), train_gradient_boost((X, y), n_stages=20)):
        perm = rng.permutation(120)
        assert np.array_equal(predict(model, X)[perm], predict(model, X[perm]))
        p = predict(model, X)
        assert np.all((p >= 0) & (p <= 1))


def test_model_json_roundtrip(rng):
    X = rng.normal(size=(80, 2))
    y = X[:, 0] > 0
    model = train_gradient_boost((X, y), n_stages=5)
    back = TreeModel.from_json(model.to_json())
    assert np.array_equal(predict(back, X), predict(model, X))


def test_feature_rows_accepted(toy):
    scores = score_all(toy, "undirected")
    labels = np.zeros(24, bool)
    labels[[19, 20, 21, 22, 23]] = True
    rows = build_features(toy, scores, labels)
    X, y = feature_matrix(rows)
    assert X.shape == (24, 10) and y.sum() == 5
    model = train_decision_tree(rows)
    assert np.array_equal(predict(model, rows), predict(model, X))
