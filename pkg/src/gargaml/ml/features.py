"""Node features: own score and degree plus neighbour summary statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..graph import Graph

STATS = ("min", "mean", "max", "std")
FEATURE_NAMES = (
    ("own_score", "own_degree")
    + tuple(f"neigh_degree_{s}" for s in STATS)
    + tuple(f"neigh_score_{s}" for s in STATS)
)


@dataclass(frozen=True, slots=True)
class FeatureRow:
    node: int
    own_score: float
    own_degree: int
    neigh_degree_stats: tuple[float, float, float, float]
    neigh_score_stats: tuple[float, float, float, float]
    label: bool

    def vector(self) -> tuple[float, ...]:
        return (self.own_score, float(self.own_degree),
                *self.neigh_degree_stats, *self.neigh_score_stats)


def _as_score_array(scores, n: int) -> np.ndarray:
    if len(scores) and hasattr(scores[0], "score"):
        arr = np.zeros(n)
        for s in scores:
            arr[s.node] = s.score
        return arr
    arr = np.asarray(scores, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} scores, got {arr.shape}")
    return arr


def neighbour_stats(indptr: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-row (min, mean, max, population std) of a CSR value array; 0 for empty rows."""
    n = indptr.size - 1
    out = np.zeros((n, 4))
    counts = np.diff(indptr)
    has = counts > 0
    if not has.any():
        return out
    starts = indptr[:-1][has]
    out[has, 0] = np.minimum.reduceat(values, starts)
    out[has, 2] = np.maximum.reduceat(values, starts)
    sums = np.add.reduceat(values, starts)
    mean = sums / counts[has]
    out[has, 1] = mean
    row_mean = np.repeat(out[:, 1], counts)
    dev = (values - row_mean) ** 2
    out[has, 3] = np.sqrt(np.add.reduceat(dev, starts) / counts[has])
    return out


def build_features(g: Graph, scores, labels: Sequence[bool] | np.ndarray) -> list[FeatureRow]:
    """One row per node; neighbours are taken from the undirected view of ``g``."""
    n = g.node_count
    s = _as_score_array(scores, n)
    labels = np.asarray(labels, dtype=bool)
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got {labels.shape}")
    nbrs = g._nbrs
    deg = np.fromiter((len(t) for t in nbrs), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    flat = np.fromiter((w for t in nbrs for w in t), dtype=np.int64, count=int(indptr[-1]))
    dstats = neighbour_stats(indptr, deg[flat].astype(float))
    sstats = neighbour_stats(indptr, s[flat])
    return [
        FeatureRow(v, float(s[v]), int(deg[v]), tuple(dstats[v].tolist()),
                   tuple(sstats[v].tolist()), bool(labels[v]))
        for v in range(n)
    ]


def feature_matrix(rows: Sequence[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    if not rows:
        return np.zeros((0, len(FEATURE_NAMES))), np.zeros(0, dtype=bool)
    X = np.array([r.vector() for r in rows], dtype=float)
    y = np.array([r.label for r in rows], dtype=bool)
    return X, y


def stratified_split(rows: Sequence[FeatureRow], train_fraction: float = 0.7,
                     seed: int = 0) -> tuple[list[FeatureRow], list[FeatureRow]]:
    """Per-class random split; each class keeps ``round(fraction * size)`` rows in train."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    labels = np.array([r.label for r in rows], dtype=bool)
    rng = np.random.default_rng(seed)
    train_idx = []
    for cls in (False, True):
        idx = np.flatnonzero(labels == cls)
        if idx.size < 2:
            raise ValueError(f"class {int(cls)} has {idx.size} member(s); cannot stratify")
        k = min(max(int(round(train_fraction * idx.size)), 1), idx.size - 1)
        train_idx.append(rng.permutation(idx)[:k])
    mask = np.zeros(len(rows), dtype=bool)
    mask[np.concatenate(train_idx)] = True
    return ([r for r, m in zip(rows, mask) if m], [r for r, m in zip(rows, mask) if not m])
