"""Louvain community detection and inter-community edge pruning."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, undirected_view

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 10.0
MAX_LEVELS = 100
_EPS = 1e-10


@dataclass(frozen=True)
class CommunityPartition:
    assignment: np.ndarray
    community_count: int
    modularity: float

    def __post_init__(self):
        self.assignment.flags.writeable = False

    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(np.bincount(self.assignment, minlength=self.community_count))
        return np.split(order, bounds[:-1])


def _contiguous(labels) -> np.ndarray:
    """Relabel so ids appear in order of first occurrence, starting at 0."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return labels.astype(np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse]


def modularity(g: Graph, assignment, resolution: float = 1.0) -> float:
    """Resolution-weighted Newman modularity of ``assignment`` on the undirected view."""
    u = undirected_view(g)
    m = u.edge_count
    if m == 0:
        return 0.0
    comm = np.asarray(assignment)
    intra = np.count_nonzero(comm[u.src] == comm[u.dst])
    tot = np.bincount(comm, weights=u.degrees())
    return float(intra / m - resolution * np.sum((tot / (2.0 * m)) ** 2))


def _local_moving(adj, loops, resolution, two_m, rng):
    n = len(adj)
    k = [sum(nb.values()) + 2.0 * loops[i] for i, nb in enumerate(adj)]
    comm = list(range(n))
    tot = list(k)
    order = rng.permutation(n).tolist()
    moved_any = False
    while True:
        moved = 0
        for i in order:
            ci = comm[i]
            ki = k[i]
            weights: dict[int, float] = {}
            for j, w in adj[i].items():
                cj = comm[j]
                weights[cj] = weights.get(cj, 0.0) + w
            tot[ci] -= ki
            scale = resolution * ki / two_m
            own_gain = weights.get(ci, 0.0) - tot[ci] * scale
            best, best_gain = ci, own_gain
            cand, cand_gain = -1, -np.inf
            for c in sorted(weights):
                if c == ci:
                    continue
                gain = weights[c] - tot[c] * scale
                if gain > cand_gain:
                    cand, cand_gain = c, gain
            if cand >= 0 and cand_gain > own_gain + _EPS:
                best = cand
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved += 1
        if not moved:
            break
        moved_any = True
    return comm, moved_any


def _aggregate(adj, loops, comm):
    labels = _contiguous(comm).tolist()
    count = max(labels) + 1
    new_adj: list[dict[int, float]] = [dict() for _ in range(count)]
    new_loops = [0.0] * count
    for i, nb in enumerate(adj):
        ci = labels[i]
        new_loops[ci] += loops[i]
        row = new_adj[ci]
        for j, w in nb.items():
            cj = labels[j]
            if cj == ci:
                new_loops[ci] += w / 2.0
            else:
                row[cj] = row.get(cj, 0.0) + w
    return new_adj, new_loops, labels


def louvain(g: Graph, resolution: float = DEFAULT_RESOLUTION, seed: int = 0,
            max_levels: int = MAX_LEVELS) -> CommunityPartition:
    """Greedy modularity optimisation (Louvain) on the undirected view of ``g``.

    Each level shuffles the node sweep order with ``seed``; equal gains go to
    the lowest community id and a node only moves on a strictly positive gain.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    u = undirected_view(g)
    n = u.node_count
    if u.edge_count == 0:
        return CommunityPartition(np.arange(n, dtype=np.int64), n, 0.0)

    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for a, b in zip(u.src.tolist(), u.dst.tolist()):
        adj[a][b] = 1.0
        adj[b][a] = 1.0
    loops = [0.0] * n
    two_m = 2.0 * u.edge_count
    rng = np.random.default_rng(seed)
    membership = np.arange(n, dtype=np.int64)

    for level in range(max_levels):
        comm, moved = _local_moving(adj, loops, resolution, two_m, rng)
        if not moved:
            break
        adj, loops, labels = _aggregate(adj, loops, comm)
        membership = np.asarray(labels, dtype=np.int64)[membership]
        logger.debug("louvain level %d: %d communities", level, len(adj))

    assignment = _contiguous(membership)
    count = int(assignment.max()) + 1 if n else 0
    return CommunityPartition(assignment, count, modularity(u, assignment, resolution))


def prune_inter_community(g: Graph, p: CommunityPartition) -> Graph:
    """Drop every edge whose endpoints sit in different communities."""
    a = p.assignment
    if a.size < g.node_count:
        raise ValueError("partition does not cover every node")
    keep = a[g.src] == a[g.dst]
    return Graph(g.node_count, g.src[keep], g.dst[keep], directed=g.directed)
