"""Friedman test and Nemenyi critical difference over a datasets x methods table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import chi2, rankdata

# two-tailed Nemenyi critical values at alpha = 0.05 (studentized range / sqrt 2)
Q_ALPHA_005 = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850,
               7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}


@dataclass(frozen=True)
class RankReport:
    methods: tuple[str, ...]
    datasets: tuple[str, ...]
    ranks: np.ndarray  # datasets x methods, 1 = best
    method_ranks: dict[str, float]
    friedman_q: float
    q_degrees_freedom: int
    p_value: float
    nemenyi_cd: float  # nan when k is outside the q table
    q_alpha: float
    k: int
    N: int

    def to_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "datasets": list(self.datasets),
            "method_ranks": self.method_ranks,
            "friedman_q": self.friedman_q,
            "q_degrees_freedom": self.q_degrees_freedom,
            "p_value": self.p_value,
            "nemenyi_cd": None if math.isnan(self.nemenyi_cd) else self.nemenyi_cd,
            "q_alpha": None if math.isnan(self.q_alpha) else self.q_alpha,
            "alpha": 0.05,
            "k": self.k,
            "N": self.N,
        }


def rank_rows(table: np.ndarray) -> np.ndarray:
    """Rank each row so the highest value gets rank 1; ties share the average rank."""
    return np.vstack([rankdata(-row, method="average") for row in table])


def friedman_q(avg_ranks: np.ndarray, n_datasets: int) -> float:
    k = avg_ranks.size
    return float(12.0 * n_datasets / (k * (k + 1))
                 * (np.sum(avg_ranks ** 2) - k * (k + 1) ** 2 / 4.0))


def critical_difference(k: int, n_datasets: int, q_alpha: float | None = None) -> float:
    if q_alpha is None:
        q_alpha = Q_ALPHA_005.get(k, math.nan)
    return q_alpha * math.sqrt(k * (k + 1) / (6.0 * n_datasets))


def rank_methods(table, methods: Sequence[str] | None = None,
                 datasets: Sequence[str] | None = None) -> RankReport:
    """Average ranks, Friedman statistic and Nemenyi CD.

    ``table`` is either an array (datasets x methods) or a mapping
    ``dataset -> {method: value}``. Higher values rank better.
    """
    if isinstance(table, Mapping):
        datasets = list(table)
        methods = list(methods) if methods is not None else sorted(
            {m for row in table.values() for m in row})
        arr = np.array([[float(table[d][m]) for m in methods] for d in datasets])
    else:
        arr = np.asarray(table, dtype=float)
        if arr.ndim != 2:
            raise ValueError("metric table must be two-dimensional")
    n, k = arr.shape
    if k < 2:
        raise ValueError("need at least two methods")
    if n < 1:
        raise ValueError("need at least one dataset")
    if np.isnan(arr).any():
        raise ValueError("metric table has missing entries; fill them first")
    methods = tuple(methods) if methods is not None else tuple(f"m{j}" for j in range(k))
    datasets = tuple(datasets) if datasets is not None else tuple(f"d{i}" for i in range(n))
    ranks = rank_rows(arr)
    avg = ranks.mean(axis=0)
    q = friedman_q(avg, n)
    q_alpha = Q_ALPHA_005.get(k, math.nan)
    return RankReport(
        methods=methods,
        datasets=datasets,
        ranks=ranks,
        method_ranks={m: float(r) for m, r in zip(methods, avg)},
        friedman_q=q,
        q_degrees_freedom=k - 1,
        p_value=float(chi2.sf(q, k - 1)),
        nemenyi_cd=critical_difference(k, n, q_alpha),
        q_alpha=q_alpha,
        k=k,
        N=n,
    )
