"""Immutable transaction graph and second-order neighbourhood queries.

Edges are stored as sorted, deduplicated integer arrays. Adjacency lists are
built lazily on the first neighbourhood query, so large graphs that are only
generated and written to disk never pay for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "Neighbourhood",
    "build_graph",
    "undirected_view",
    "second_order_neighbourhood",
    "strong_second_order",
]


def _canonical_edges(n: int, src, dst, directed: bool):
    src = np.asarray(src).ravel()
    dst = np.asarray(dst).ravel()
    if src.shape != dst.shape:
        raise ValueError("src and dst must have the same length")
    if src.size == 0:
        empty = np.empty(0, dtype=np.int32)
        return empty, empty.copy()
    if min(src.min(), dst.min()) < 0:
        raise ValueError("node ids must be non-negative")
    if max(src.max(), dst.max()) >= n:
        raise ValueError("node id out of range")
    if not directed:
        src, dst = np.minimum(src, dst), np.maximum(src, dst)
    key = src.astype(np.int64)
    key *= n
    key += dst
    key = np.unique(key[src != dst])
    return (key // n).astype(np.int32), (key % n).astype(np.int32)


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, cols[order]


def _to_lists(indptr: np.ndarray, idx: np.ndarray) -> list[tuple[int, ...]]:
    flat = idx.tolist()
    bounds = indptr.tolist()
    return [tuple(flat[bounds[i]:bounds[i + 1]]) for i in range(len(bounds) - 1)]


class Graph:
    """Simple graph over nodes ``0 .. node_count - 1``.

    Self-loops are dropped and parallel edges collapse to one. Undirected
    graphs keep each edge once as ``(min, max)``.
    """

    def __init__(self, node_count: int, src, dst, directed: bool = True):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = int(node_count)
        self.directed = bool(directed)
        self.src, self.dst = _canonical_edges(self.node_count, src, dst, self.directed)
        self.src.flags.writeable = False
        self.dst.flags.writeable = False

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], directed: bool = True,
                   node_count: int | None = None) -> "Graph":
        arr = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if node_count is None:
            node_count = int(arr.max()) + 1 if arr.size else 0
        return cls(node_count, arr[:, 0], arr[:, 1], directed)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count and self.directed == other.directed
                and np.array_equal(self.src, other.src) and np.array_equal(self.dst, other.dst))

    __hash__ = None

    def __getstate__(self):
        return {"node_count": self.node_count, "directed": self.directed,
                "src": self.src, "dst": self.dst}

    def __setstate__(self, state):
        self.node_count = state["node_count"]
        self.directed = state["directed"]
        self.src = state["src"]
        self.dst = state["dst"]

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        if not self.directed and u > v:
            u, v = v, u
        return v in self._succ_sets[u] if u < self.node_count else False

    # adjacency, built on demand

    @cached_property
    def _succ(self) -> list[tuple[int, ...]]:
        if not self.directed:
            return self._nbrs
        return _to_lists(*_csr(self.node_count, self.src, self.dst))

    @cached_property
    def _pred(self) -> list[tuple[int, ...]]:
        if not self.directed:
            return self._nbrs
        return _to_lists(*_csr(self.node_count, self.dst, self.src))

    @cached_property
    def _nbrs(self) -> list[tuple[int, ...]]:
        a, b = self.src, self.dst
        if self.directed:
            a, b = _canonical_edges(self.node_count, a, b, directed=False)
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        return _to_lists(*_csr(self.node_count, rows, cols))

    @cached_property
    def _succ_sets(self) -> list[frozenset[int]]:
        return [frozenset(s) for s in self._succ]

    def successors(self, v: int) -> tuple[int, ...]:
        return self._succ[v]

    def predecessors(self, v: int) -> tuple[int, ...]:
        return self._pred[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbours of ``v`` in the undirected view."""
        return self._nbrs[v]

    def degrees(self) -> np.ndarray:
        """Undirected-view degree of every node."""
        if self.directed:
            return np.array([len(t) for t in self._nbrs], dtype=np.int64)
        return (np.bincount(self.src, minlength=self.node_count)
                + np.bincount(self.dst, minlength=self.node_count))

    def prepare(self) -> "Graph":
        """Build adjacency lists now, e.g. before forking workers."""
        self._succ, self._pred, self._nbrs  # noqa: B018
        return self


@dataclass(frozen=True)
class Neighbourhood:
    center: int
    first_order: frozenset[int]
    second_order: frozenset[int]
    induced_edges: frozenset[tuple[int, int]]

    @property
    def nodes(self) -> frozenset[int]:
        return self.first_order | self.second_order | {self.center}

    @property
    def n(self) -> int:
        return len(self.first_order)

    @property
    def m(self) -> int:
        # the centre plus its distance-2 nodes
        return len(self.second_order) + 1


def build_graph(edge_list: Sequence[tuple[int, int]], directed: bool = True,
                node_count: int | None = None) -> Graph:
    return Graph.from_edges(edge_list, directed=directed, node_count=node_count)


def undirected_view(g: Graph) -> Graph:
    if not g.directed:
        return g
    return Graph(g.node_count, g.src, g.dst, directed=False)


def _first_second(g: Graph, v: int) -> tuple[set[int], set[int]]:
    nbrs = g._nbrs
    first = set(nbrs[v])
    second: set[int] = set()
    for u in first:
        second.update(nbrs[u])
    second -= first
    second.discard(v)
    return first, second


def second_order_neighbourhood(g: Graph, v: int) -> Neighbourhood:
    """Nodes at undirected distance 1 and exactly 2 from ``v``, with induced edges."""
    first, second = _first_second(g, v)
    hood = first | second
    hood.add(v)
    succ = g._succ
    if g.directed:
        edges = {(u, w) for u in hood for w in succ[u] if w in hood}
    else:
        edges = {(u, w) for u in hood for w in succ[u] if u < w and w in hood}
    return Neighbourhood(v, frozenset(first), frozenset(second), frozenset(edges))


def strong_second_order(g: Graph, v: int) -> set[int]:
    """Distance-2 nodes reachable from ``v`` along a directed path of length two."""
    first, second = _first_second(g, v)
    succ = g._succ
    out: set[int] = set()
    for x in succ[v]:
        out.update(succ[x])
    return out & second
