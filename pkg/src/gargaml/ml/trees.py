"""Decision tree and gradient-boosted trees, written against plain numpy.

Both learners share one exhaustive split search: candidate thresholds are
midpoints between adjacent distinct sorted values, each side must keep at
least ``min_samples_leaf`` rows, and equal gains resolve to the lower feature
index and then the lower threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FEATURE_NAMES, FeatureRow, feature_matrix

MIN_SAMPLES_LEAF = 10
N_STAGES = 100
MAX_DEPTH_BOOST = 3
LEARNING_RATE = 0.1


@dataclass
class Tree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    n_samples: list[int] = field(default_factory=list)

    def _add(self, n: int) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        self.n_samples.append(n)
        return len(self.feature) - 1

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def leaves(self) -> list[int]:
        return [i for i, f in enumerate(self.feature) if f < 0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        active = feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, feature[cur]] <= threshold[cur]
            node[rows] = np.where(go_left, left[cur], right[cur])
            active = feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in
                ("feature", "threshold", "left", "right", "value", "n_samples")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(**{k: list(v) for k, v in d.items()})


@dataclass
class TreeModel:
    kind: str
    trees: list[Tree]
    learning_rate: float = 1.0
    base_score: float = 0.0
    feature_names: tuple[str, ...] = FEATURE_NAMES
    train_loss: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "learning_rate": self.learning_rate,
            "base_score": self.base_score,
            "feature_names": list(self.feature_names),
            "train_loss": self.train_loss,
            "trees": [t.to_dict() for t in self.trees],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TreeModel":
        d = json.loads(text)
        return cls(d["kind"], [Tree.from_dict(t) for t in d["trees"]], d["learning_rate"],
                   d["base_score"], tuple(d["feature_names"]), d.get("train_loss", []))


def _best_split(X: np.ndarray, target: np.ndarray, idx: np.ndarray, min_leaf: int,
                criterion: str) -> tuple[int, float, float]:
    """Return ``(feature, threshold, gain)``; feature is -1 when no valid split exists."""
    n = idx.size
    best = (-1, 0.0, 0.0)
    if n < 2 * min_leaf:
        return best
    t = target[idx]
    total = t.sum()
    if criterion == "gini":
        p = total / n
        parent = 2.0 * p * (1.0 - p)
    else:
        parent = total * total / n
    left_n = np.arange(1, n, dtype=float)
    right_n = n - left_n
    for f in range(X.shape[1]):
        x = X[idx, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        cum = np.cumsum(t[order])[:-1]
        valid = xs[1:] > xs[:-1]
        valid[:min_leaf - 1] = False
        if n - min_leaf < valid.size:
            valid[n - min_leaf:] = False
        if not valid.any():
            continue
        if criterion == "gini":
            pl = cum / left_n
            pr = (total - cum) / right_n
            child = (left_n * 2.0 * pl * (1.0 - pl) + right_n * 2.0 * pr * (1.0 - pr)) / n
            gain = parent - child
        else:
            gain = (cum * cum / left_n + (total - cum) ** 2 / right_n - parent) / n
        gain = np.where(valid, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best[2]:
            lo, hi = xs[i], xs[i + 1]
            thr = lo + (hi - lo) / 2.0
            if thr >= hi:
                thr = lo
            best = (f, float(thr), float(gain[i]))
    return best


def _grow(X: np.ndarray, target: np.ndarray, min_leaf: int, max_depth: int | None,
          criterion: str) -> tuple[Tree, list[np.ndarray]]:
    """Grow a tree greedily; returns it with the training rows of each node."""
    tree = Tree()
    members: list[np.ndarray] = []
    root = tree._add(X.shape[0])
    members.append(np.arange(X.shape[0]))
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        idx = members[node]
        t = target[idx]
        pure = criterion == "gini" and (t.min() == t.max())
        if pure or (max_depth is not None and depth >= max_depth):
            continue
        f, thr, gain = _best_split(X, target, idx, min_leaf, criterion)
        if f < 0 or gain <= 0.0:
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.left[node] = tree._add(li.size)
        members.append(li)
        tree.right[node] = tree._add(ri.size)
        members.append(ri)
        stack.append((tree.right[node], depth + 1))
        stack.append((tree.left[node], depth + 1))
    return tree, members


def _xy(rows) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(rows, tuple) and len(rows) == 2 and isinstance(rows[0], np.ndarray):
        X, y = rows
        return np.asarray(X, dtype=float), np.asarray(y, dtype=bool)
    return feature_matrix(rows)


def train_decision_tree(train: Sequence[FeatureRow] | tuple,
                        min_samples_leaf: int = MIN_SAMPLES_LEAF) -> TreeModel:
    """Gini classification tree; leaves predict the positive fraction of their rows."""
    X, y = _xy(train)
    yf = y.astype(float)
    if X.shape[0] < 2 * min_samples_leaf or yf.min(initial=0) == yf.max(initial=0):
        tree = Tree()
        tree._add(X.shape[0])
        tree.value[0] = float(yf.mean()) if yf.size else 0.0
        return TreeModel("decision_tree", [tree])
    tree, members = _grow(X, yf, min_samples_leaf, None, "gini")
    for leaf in tree.leaves():
        tree.value[leaf] = float(yf[members[leaf]].mean())
    return TreeModel("decision_tree", [tree])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def log_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean logistic loss computed from raw margins."""
    yf = y.astype(float)
    return float(np.mean(np.logaddexp(0.0, margin) - yf * margin))


def train_gradient_boost(train: Sequence[FeatureRow] | tuple, n_stages: int = N_STAGES,
                         max_depth: int = MAX_DEPTH_BOOST, learning_rate: float = LEARNING_RATE,
                         min_samples_leaf: int = MIN_SAMPLES_LEAF) -> TreeModel:
    """Logistic-loss boosting with one Newton step per leaf."""
    X, y = _xy(train)
    yf = y.astype(float)
    prior = float(yf.mean())
    if not 0.0 < prior < 1.0:
        raise ValueError("gradient boosting needs both classes in the training data")
    base = float(np.log(prior / (1.0 - prior)))
    margin = np.full(X.shape[0], base)
    trees: list[Tree] = []
    losses = [log_loss(y, margin)]
    for _ in range(n_stages):
        p = _sigmoid(margin)
        resid = yf - p
        hess = p * (1.0 - p)
        tree, members = _grow(X, resid, min_samples_leaf, max_depth, "mse")
        for leaf in tree.leaves():
            rows = members[leaf]
            den = hess[rows].sum()
            tree.value[leaf] = float(resid[rows].sum() / den) if den > 1e-150 else 0.0
        margin = margin + learning_rate * tree.predict(X)
        trees.append(tree)
        losses.append(log_loss(y, margin))
    return TreeModel("gradient_boost", trees, learning_rate, base, train_loss=losses)


def raw_margin(model: TreeModel, X: np.ndarray) -> np.ndarray:
    out = np.full(X.shape[0], model.base_score)
    for t in model.trees:
        out += model.learning_rate * t.predict(X)
    return out


def predict(model: TreeModel, rows: Sequence[FeatureRow] | np.ndarray) -> np.ndarray:
    """Positive-class probability per row."""
    X = rows if isinstance(rows, np.ndarray) else feature_matrix(rows)[0]
    if model.kind == "decision_tree":
        return model.trees[0].predict(X)
    return _sigmoid(raw_margin(model, X))
