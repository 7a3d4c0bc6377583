"""Threshold and ranking metrics for imbalanced binary labels."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class MetricSet:
    precision: float
    recall: float
    f1: float
    auc_roc: float  # nan when only one class is present
    auc_pr: float
    threshold: float = DEFAULT_THRESHOLD
    no_positive_predictions: bool = False

    @property
    def auc_defined(self) -> bool:
        return not math.isnan(self.auc_roc)

    def to_dict(self) -> dict:
        return asdict(self)


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=bool).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    return s, y


def auc_roc(scores, labels) -> float:
    """Mann-Whitney estimate; tied scores count one half."""
    s, y = _check(scores, labels)
    pos = int(y.sum())
    neg = y.size - pos
    if pos == 0 or neg == 0:
        return math.nan
    ranks = rankdata(s, method="average")
    u = ranks[y].sum() - pos * (pos + 1) / 2.0
    return float(u / (pos * neg))


def auc_pr(scores, labels) -> float:
    """Step-wise area under the precision-recall curve (average precision).

    Each distinct score is one threshold; recall increments are weighted by
    the precision reached at that threshold, without interpolation.
    """
    s, y = _check(scores, labels)
    pos = int(y.sum())
    if pos == 0 or pos == y.size:
        return math.nan
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    tp = np.cumsum(y)[last]
    predicted = last + 1
    precision = tp / predicted
    recall = tp / pos
    steps = np.diff(np.r_[0.0, recall])
    return float(np.sum(steps * precision))


def compute_metrics(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> MetricSet:
    """Precision/recall/F1 at ``score >= threshold`` plus both AUCs."""
    s, y = _check(scores, labels)
    pred = s >= threshold
    tp = int(np.count_nonzero(pred & y))
    n_pred = int(pred.sum())
    n_pos = int(y.sum())
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_pos if n_pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision > 0 and recall > 0 else 0.0
    return MetricSet(precision, recall, f1, auc_roc(s, y), auc_pr(s, y), threshold, n_pred == 0)
