import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gargaml.metrics import auc_pr, auc_roc, compute_metrics
from oracles import pairwise_auc


def test_hand_example():
    m = compute_metrics([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
    assert m.auc_roc == 0.75
    assert m.auc_pr == pytest.approx((1 + 2 / 3) / 2, abs=1e-12)
    assert m.precision == 0.5 and m.recall == 1.0


def test_perfect_separation():
    m = compute_metrics([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert (m.auc_roc, m.auc_pr, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0, 1.0)


def test_constant_scores_baseline():
    y = np.array([1, 0, 0, 1, 0, 0, 0])
    m = compute_metrics(np.full(7, 0.3), y)
    assert m.auc_roc == 0.5
    assert abs(m.auc_pr - y.mean()) <= 1e-12


def test_no_positive_predictions_flagged():
    m = compute_metrics([0.1, 0.2, 0.3], [1, 0, 1])
    assert m.no_positive_predictions
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)


def test_threshold_inclusive():
    m = compute_metrics([0.5, 0.4], [1, 0])
    assert m.precision == 1.0 and m.recall == 1.0


def test_single_class_marks_auc_undefined():
    m = compute_metrics([0.9, 0.1], [0, 0])
    assert math.isnan(m.auc_roc) and math.isnan(m.auc_pr)
    assert not m.auc_defined
    assert m.precision == 0.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        compute_metrics([0.1], [1, 0])


def test_agrees_with_sklearn_average_precision():
    sk = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(1)
    for _ in range(20):
        y = rng.integers(0, 2, 40)
        if y.min() == y.max():
            continue
        s = rng.integers(0, 6, 40) / 5
        assert auc_pr(s, y) == pytest.approx(sk.average_precision_score(y, s), abs=1e-12)
        assert auc_roc(s, y) == pytest.approx(sk.roc_auc_score(y, s), abs=1e-12)


labelled = st.integers(2, 50).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 10).map(lambda x: x / 10), min_size=n, max_size=n),
    st.lists(st.booleans(), min_size=n, max_size=n)).filter(lambda t: 0 < sum(t[1]) < n))


@settings(max_examples=100, deadline=None)
@given(labelled)
def test_auc_equals_pairwise(data):
    s, y = data
    assert auc_roc(s, y) == pairwise_auc(s, y)


@settings(max_examples=100, deadline=None)
@given(labelled)
def test_auc_negation_symmetry(data):
    s, y = data
    assert auc_roc(s, y) + auc_roc([-x for x in s], y) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(labelled, st.floats(0.0, 1.0))
def test_metric_ranges_and_f1(data, thr):
    s, y = data
    m = compute_metrics(s, y, thr)
    for v in (m.precision, m.recall, m.f1, m.auc_roc, m.auc_pr):
        assert 0.0 <= v <= 1.0
    if m.precision == 0 or m.recall == 0:
        assert m.f1 == 0
    else:
        assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall))
