import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import friedmanchisquare, studentized_range

from gargaml.stats import Q_ALPHA_005, critical_difference, rank_methods, rank_rows


def test_hand_case_q_is_four():
    rep = rank_methods(np.array([[0.9, 0.8, 0.7], [0.6, 0.5, 0.4]]), ["a", "b", "c"])
    assert rep.method_ranks == {"a": 1.0, "b": 2.0, "c": 3.0}
    assert rep.friedman_q == 4.0
    assert rep.q_degrees_freedom == 2


def test_all_tied_q_zero():
    rep = rank_methods(np.full((5, 4), 0.7))
    assert all(r == 2.5 for r in rep.method_ranks.values())
    assert rep.friedman_q == 0.0


def test_cd_k8_n66():
    cd = critical_difference(8, 66)
    assert abs(cd - 3.031 * math.sqrt(72 / 396)) <= 1e-9
    assert rank_methods(np.random.default_rng(0).random((66, 8))).nemenyi_cd == cd


def test_q_table_matches_studentized_range():
    for k, q in Q_ALPHA_005.items():
        ref = studentized_range.ppf(0.95, k, np.inf) / math.sqrt(2)
        assert q == pytest.approx(ref, abs=1e-3)  # table printed to 3 decimals


def test_cd_undefined_beyond_table():
    rep = rank_methods(np.random.default_rng(0).random((3, 11)))
    assert math.isnan(rep.nemenyi_cd)
    assert rep.to_dict()["nemenyi_cd"] is None


def test_mapping_input():
    rep = rank_methods({"d1": {"x": 0.2, "y": 0.9}, "d2": {"x": 0.3, "y": 0.1}})
    assert rep.method_ranks == {"x": 1.5, "y": 1.5}
    assert rep.N == 2 and rep.k == 2


@pytest.mark.parametrize("table", [np.zeros((3, 1)), np.zeros((0, 3)),
                                   np.array([[0.1, np.nan]])])
def test_errors(table):
    with pytest.raises(ValueError):
        rank_methods(table)


tables = st.tuples(st.integers(1, 8), st.integers(2, 10)).flatmap(
    lambda s: st.lists(st.lists(st.integers(0, 4).map(lambda x: x / 4), min_size=s[1],
                                max_size=s[1]), min_size=s[0], max_size=s[0]))


@settings(max_examples=100, deadline=None)
@given(tables)
def test_rank_invariants(rows):
    arr = np.array(rows)
    n, k = arr.shape
    ranks = rank_rows(arr)
    np.testing.assert_allclose(ranks.sum(axis=1), k * (k + 1) / 2)
    rep = rank_methods(arr)
    assert np.mean(list(rep.method_ranks.values())) == pytest.approx((k + 1) / 2)
    assert rep.friedman_q >= -1e-9


def test_friedman_matches_scipy_without_ties():
    rng = np.random.default_rng(5)
    arr = rng.random((12, 5))
    rep = rank_methods(arr)
    ref = friedmanchisquare(*arr.T)
    assert rep.friedman_q == pytest.approx(ref.statistic)
    assert rep.p_value == pytest.approx(ref.pvalue)
