"""GARG-AML block densities and composite scores.

For a centre node the second-order neighbourhood is laid out as an ordered
adjacency matrix and split into blocks. Only *free* entries (those not fixed
by construction) count towards a block's density. Densities are computed
from the induced edge set; the matrix itself is never materialised.

Undirected ordering is ``[v, N2(v), N1(v)]`` and yields three blocks; the
directed variant orders nodes by level (0: v and distance-2 peers with no
directed 2-path to or from v, 1: N1(v), 2: remaining distance-2 nodes) and
yields nine.
"""

from __future__ import annotations

import hashlib
import logging
import multiprocessing as mp
import os
from dataclasses import dataclass
from typing import Literal, Sequence, Union

from .community import DEFAULT_RESOLUTION, CommunityPartition, louvain, prune_inter_community
from .graph import Graph, Neighbourhood, _first_second, second_order_neighbourhood

logger = logging.getLogger(__name__)

Variant = Literal["undirected", "directed"]
VARIANTS: tuple[str, ...] = ("undirected", "directed")

# (row level, column level) of blocks whose densities should be high
HIGH_BLOCKS = ((0, 1), (1, 2))
LOW_BLOCKS = ((0, 0), (0, 2), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2))


@dataclass(frozen=True, slots=True)
class UndirectedBlocks:
    s1: float
    s2: float
    s3: float
    l1: int
    l2: int
    l3: int
    n: int
    m: int


@dataclass(frozen=True, slots=True)
class DirectedBlocks:
    s: tuple[tuple[float, float, float], ...]
    sizes: tuple[tuple[int, int, int], ...]
    l: int  # noqa: E741
    n: int
    m: int


@dataclass(frozen=True, slots=True)
class GargAmlScore:
    node: int
    score: float
    variant: str
    blocks: Union[UndirectedBlocks, DirectedBlocks]


def _density(count: int, size: int) -> float:
    return count / size if size > 0 else 0.0


def undirected_blocks(hood: Neighbourhood) -> UndirectedBlocks:
    c = hood.center
    first = hood.first_order
    within_first = between = within_second = 0
    pairs = {(a, b) if a < b else (b, a) for a, b in hood.induced_edges}
    for a, b in pairs:
        if a == c or b == c:
            continue
        a1, b1 = a in first, b in first
        if a1 and b1:
            within_first += 1
        elif a1 or b1:
            between += 1
        else:
            within_second += 1
    n = len(first)
    m = len(hood.second_order) + 1
    l1 = m * m - 3 * m + 2
    l2 = m * n - n
    l3 = n * n - n
    # the matrix is symmetric, so each undirected edge fills two entries
    return UndirectedBlocks(
        s1=_density(2 * within_second, l1),
        s2=_density(between, l2),
        s3=_density(2 * within_first, l3),
        l1=l1, l2=l2, l3=l3, n=n, m=m,
    )


def undirected_composite(b: UndirectedBlocks) -> float:
    if b.m <= 1:
        return 0.0
    weight = b.l1 + b.l3
    if weight == 0:
        return b.s2
    return b.s2 - (b.l1 * b.s1 + b.l3 * b.s3) / weight


def score_undirected(g: Graph, v: int) -> GargAmlScore:
    blocks = undirected_blocks(second_order_neighbourhood(g, v))
    return GargAmlScore(v, undirected_composite(blocks), "undirected", blocks)


def assign_levels(g: Graph, v: int) -> tuple[set[int], set[int], set[int]]:
    """Split the neighbourhood of ``v`` into levels 0, 1 and 2."""
    if not g.directed:
        raise ValueError("level assignment needs a directed graph")
    first, second = _first_second(g, v)
    succ, pred = g._succ, g._pred
    reach: set[int] = set()
    for x in succ[v]:
        reach.update(succ[x])
    for x in pred[v]:
        reach.update(pred[x])
    level2 = second & reach
    level0 = second - level2
    level0.add(v)
    return level0, first, level2


def directed_sizes(l: int, n: int, m: int) -> tuple[tuple[int, int, int], ...]:  # noqa: E741
    """Free-entry counts of the nine blocks."""
    return (
        ((l - 1) * (l - 2), l * n, (l - 1) * m),
        (n * l, n * n - n, n * m),
        (m * (l - 1), m * n, m * m - m),
    )


def directed_blocks(g: Graph, v: int) -> DirectedBlocks:
    level0, level1, level2 = assign_levels(g, v)
    level = dict.fromkeys(level0, 0)
    level.update(dict.fromkeys(level1, 1))
    level.update(dict.fromkeys(level2, 2))
    counts = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    succ = g._succ
    for u, lu in level.items():
        row = counts[lu]
        for w in succ[u]:
            lw = level.get(w)
            if lw is not None:
                row[lw] += 1
    l, n, m = len(level0), len(level1), len(level2)  # noqa: E741
    sizes = directed_sizes(l, n, m)
    s = tuple(tuple(_density(counts[i][j], sizes[i][j]) for j in range(3)) for i in range(3))
    return DirectedBlocks(s=s, sizes=sizes, l=l, n=n, m=m)


def directed_composite(b: DirectedBlocks) -> float:
    if b.n == 0 or (b.l == 1 and b.m == 0):
        return 0.0
    high = sum(b.s[i][j] for i, j in HIGH_BLOCKS) / len(HIGH_BLOCKS)
    low = sum(b.s[i][j] for i, j in LOW_BLOCKS) / len(LOW_BLOCKS)
    return high - low


def score_directed(g: Graph, v: int) -> GargAmlScore:
    blocks = directed_blocks(g, v)
    return GargAmlScore(v, directed_composite(blocks), "directed", blocks)


_SCORERS = {"undirected": score_undirected, "directed": score_directed}

# graph shared with forked workers
_shared: Graph | None = None


def _score_range(args: tuple[str, int, int]) -> list[GargAmlScore]:
    variant, start, stop = args
    fn = _SCORERS[variant]
    return [fn(_shared, v) for v in range(start, stop)]


def default_workers() -> int:
    env = os.environ.get("GARGAML_WORKERS")
    return int(env) if env else 1


def score_all(g: Graph, variant: Variant = "undirected", workers: int | None = None,
              chunk_size: int = 2048) -> list[GargAmlScore]:
    """Score every node; output is identical for any worker count."""
    if variant not in _SCORERS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "directed" and not g.directed:
        raise ValueError("directed scores need a directed graph")
    workers = default_workers() if workers is None else workers
    n = g.node_count
    g.prepare()
    if workers <= 1 or n <= chunk_size:
        fn = _SCORERS[variant]
        return [fn(g, v) for v in range(n)]

    global _shared
    _shared = g
    tasks = [(variant, s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    try:
        with mp.get_context("fork").Pool(workers) as pool:
            out: list[GargAmlScore] = []
            for part in pool.imap(_score_range, tasks):
                out.extend(part)
    finally:
        _shared = None
    return out


@dataclass
class PipelineResult:
    partition: CommunityPartition
    pruned: Graph
    scores: dict[str, list[GargAmlScore]]


def run_garg_aml(g: Graph, variants: Sequence[str] = ("undirected",),
                 resolution: float = DEFAULT_RESOLUTION, seed: int = 0,
                 workers: int | None = None,
                 partition: CommunityPartition | None = None) -> PipelineResult:
    """Louvain, drop inter-community edges, then score every node."""
    if partition is None:
        partition = louvain(g, resolution=resolution, seed=seed)
    pruned = prune_inter_community(g, partition)
    logger.info("%d communities, %d of %d edges kept", partition.community_count,
                pruned.edge_count, g.edge_count)
    scores = {}
    for variant in variants:
        if variant == "directed" and not pruned.directed:
            raise ValueError("directed scores need a directed graph")
        scores[variant] = score_all(pruned, variant, workers)
    return PipelineResult(partition, pruned, scores)


def score_digest(scores: Sequence[GargAmlScore]) -> str:
    """SHA-256 over node ids and exact score bits; equal digests mean identical output."""
    h = hashlib.sha256()
    for s in scores:
        h.update(f"{s.node}:{s.score.hex()};".encode())
    return h.hexdigest()
