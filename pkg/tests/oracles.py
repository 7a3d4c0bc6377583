"""Independent reference implementations used by the tests.

These work on dense numpy matrices and plain loops so they share no code
path with the library.
"""

import itertools

import numpy as np


def adjacency(n, edges, directed=True):
    A = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        if u != v:
            A[u, v] = 1
            if not directed:
                A[v, u] = 1
    return A


def bfs_levels(A, v, depth=2):
    """Undirected BFS truncated at ``depth``; returns {distance: set of nodes}."""
    S = (A + A.T) > 0
    seen = {v}
    frontier = {v}
    out = {}
    for d in range(1, depth + 1):
        nxt = {int(w) for u in frontier for w in np.flatnonzero(S[u])} - seen
        out[d] = nxt
        seen |= nxt
        frontier = nxt
    return out


def undirected_densities(A, v):
    """(s1, s2, s3, l1, l2, l3) from the explicit ordered matrix [v, N2, N1]."""
    S = ((A + A.T) > 0).astype(np.int64)
    lv = bfs_levels(S, v)
    n1, n2 = sorted(lv[1]), sorted(lv[2])
    order = [v] + n2 + n1
    M = S[np.ix_(order, order)]
    m, n = len(n2) + 1, len(n1)
    free = np.ones_like(M, dtype=bool)
    np.fill_diagonal(free, False)
    free[0, :m] = False
    free[:m, 0] = False
    free[0, m:] = False  # centre row into N1 is all ones by construction
    blocks = {
        "s1": (slice(0, m), slice(0, m)),
        "s2": (slice(0, m), slice(m, m + n)),
        "s3": (slice(m, m + n), slice(m, m + n)),
    }
    dens, sizes = {}, {}
    for k, (r, c) in blocks.items():
        mask = free[r, c]
        size = int(mask.sum())
        total = int(M[r, c][mask].sum())
        dens[k] = total / size if size else 0.0
        sizes[k] = size
    return dens["s1"], dens["s2"], dens["s3"], sizes["s1"], sizes["s2"], sizes["s3"]


def undirected_score(A, v):
    s1, s2, s3, l1, l2, l3 = undirected_densities(A, v)
    if l2 == 0:
        return 0.0
    if l1 + l3 == 0:
        return s2
    return s2 - (l1 * s1 + l3 * s3) / (l1 + l3)


def directed_levels(A, v):
    lv = bfs_levels(A, v)
    two = A @ A
    strong = {w for w in lv[2] if two[v, w] > 0 or two[w, v] > 0}
    return {v} | (lv[2] - strong), lv[1], strong


def directed_densities(A, v):
    """3x3 densities and free-entry sizes from the explicit level-ordered matrix."""
    l0, l1, l2 = directed_levels(A, v)
    order = [v] + sorted(l0 - {v}) + sorted(l1) + sorted(l2)
    M = A[np.ix_(order, order)]
    cuts = [0, len(l0), len(l0) + len(l1), len(order)]
    free = np.ones_like(M, dtype=bool)
    np.fill_diagonal(free, False)
    free[0, : cuts[1]] = False
    free[: cuts[1], 0] = False
    free[0, cuts[2]:] = False
    free[cuts[2]:, 0] = False
    dens = np.zeros((3, 3))
    sizes = np.zeros((3, 3), dtype=np.int64)
    for i, j in itertools.product(range(3), range(3)):
        r, c = slice(cuts[i], cuts[i + 1]), slice(cuts[j], cuts[j + 1])
        mask = free[r, c]
        sizes[i, j] = int(mask.sum())
        total = int(M[r, c][mask].sum())
        dens[i, j] = total / sizes[i, j] if sizes[i, j] else 0.0
    return dens, sizes, (len(l0), len(l1), len(l2))


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def modularity(n, edges, assignment, resolution=1.0):
    """Newman modularity of an undirected simple graph, by the double sum."""
    A = adjacency(n, edges, directed=False)
    k = A.sum(axis=1)
    two_m = k.sum()
    if two_m == 0:
        return 0.0
    q = 0.0
    for i in range(n):
        for j in range(n):
            if assignment[i] == assignment[j]:
                q += A[i, j] - resolution * k[i] * k[j] / two_m
    return q / two_m


def scatter_gather(k):
    """Sender 0, mules 1..k, receiver k+1."""
    edges = [(0, i) for i in range(1, k + 1)] + [(i, k + 1) for i in range(1, k + 1)]
    return k + 2, edges
