"""Synthetic transaction networks with injected scatter-gather patterns.

Base graphs come from the Barabási-Albert, Erdős-Rényi and Watts-Strogatz
models; each undirected edge is then oriented uniformly at random. Three
injection modes place smurfing patterns with different levels of
camouflage:

* ``separate``: sender, mules and receiver are all new nodes.
* ``new_mules``: new mules between two existing nodes.
* ``existing_mules``: existing nodes take every role.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Iterator

import networkx as nx
import numpy as np

from .graph import Graph
from .seeds import substream

MODELS = ("BA", "ER", "WS")
MODES = ("separate", "new_mules", "existing_mules")
NO_PATTERN = "none"
MIN_SMURFS, MAX_SMURFS = 2, 10

GRID_SIZES = (100, 10_000, 100_000)
GRID_EDGES = (1, 2, 5)
GRID_PROBS = (0.001, 0.01)
GRID_PATTERNS = (3, 5)


@dataclass(frozen=True)
class GenSpec:
    model: str
    n_nodes: int
    m_edges: int | None = None
    p_edge: float | None = None
    n_patterns: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        needs_m = self.model in ("BA", "WS")
        needs_p = self.model in ("ER", "WS")
        if needs_m != (self.m_edges is not None):
            raise ValueError(f"{self.model} {'requires' if needs_m else 'does not take'} m_edges")
        if needs_p != (self.p_edge is not None):
            raise ValueError(f"{self.model} {'requires' if needs_p else 'does not take'} p_edge")
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        if self.m_edges is not None and not 1 <= self.m_edges < self.n_nodes:
            raise ValueError("m_edges must be in [1, n_nodes)")
        if self.p_edge is not None and not 0.0 <= self.p_edge <= 1.0:
            raise ValueError("p_edge must be a probability")
        if self.n_patterns < 0:
            raise ValueError("n_patterns must be non-negative")

    @property
    def name(self) -> str:
        m = "-" if self.m_edges is None else self.m_edges
        p = "-" if self.p_edge is None else f"{self.p_edge:g}"
        return f"{self.model.lower()}_n{self.n_nodes}_m{m}_p{p}_pat{self.n_patterns}"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class InjectedPattern:
    mode: str
    sender: int
    receiver: int
    mules: tuple[int, ...]

    @property
    def participants(self) -> tuple[int, ...]:
        return (self.sender, *self.mules, self.receiver)


@dataclass
class SyntheticDataset:
    graph: Graph
    labels: np.ndarray
    pattern_tag: np.ndarray
    spec: GenSpec
    patterns: list[InjectedPattern] = field(default_factory=list)

    @property
    def label_rate(self) -> float:
        n = self.labels.size
        return float(self.labels.sum() / n) if n else 0.0


def full_grid(seed: int = 0, sizes=GRID_SIZES) -> list[GenSpec]:
    """Every parameter combination of the evaluation grid (66 for the default sizes)."""
    specs = []
    for n, m, k in itertools.product(sizes, GRID_EDGES, GRID_PATTERNS):
        specs.append(GenSpec("BA", n, m_edges=m, n_patterns=k))
    for n, p, k in itertools.product(sizes, GRID_PROBS, GRID_PATTERNS):
        specs.append(GenSpec("ER", n, p_edge=p, n_patterns=k))
    for n, m, p, k in itertools.product(sizes, GRID_EDGES, GRID_PROBS, GRID_PATTERNS):
        specs.append(GenSpec("WS", n, m_edges=m, p_edge=p, n_patterns=k))
    return [_with_seed(s, substream(seed, s.name)) for s in specs]


def _with_seed(spec: GenSpec, seed: int) -> GenSpec:
    return GenSpec(spec.model, spec.n_nodes, spec.m_edges, spec.p_edge, spec.n_patterns, seed)


def _gnp_edges(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform G(n, p) as an (E, 2) array of unordered pairs ``u < v``."""
    total = n * (n - 1) // 2
    if total == 0 or p <= 0:
        return np.empty((0, 2), dtype=np.int32)
    target = int(rng.binomial(total, p))
    keys = np.empty(0, dtype=np.int64)
    while keys.size < target:
        draw = int((target - keys.size) * 1.05) + 16
        u = rng.integers(0, n, draw, dtype=np.int32)
        v = rng.integers(0, n, draw, dtype=np.int32)
        new = np.minimum(u, v).astype(np.int64)
        new *= n
        new += np.maximum(u, v)
        new = new[u != v]
        del u, v
        keys = np.unique(new) if keys.size == 0 else np.union1d(keys, new)
        del new
    if keys.size > target:
        keys = np.sort(rng.choice(keys, target, replace=False))
    out = np.empty((keys.size, 2), dtype=np.int32)
    out[:, 0] = keys // n
    out[:, 1] = keys % n
    return out


def _nx_edges(h: nx.Graph) -> np.ndarray:
    if h.number_of_edges() == 0:
        return np.empty((0, 2), dtype=np.int32)
    return np.array(sorted((min(a, b), max(a, b)) for a, b in h.edges()), dtype=np.int32)


def base_edges(spec: GenSpec, rng: np.random.Generator) -> np.ndarray:
    """Undirected edges of the base model, as sorted ``u < v`` pairs."""
    nx_seed = int(rng.integers(2**31 - 1))
    if spec.model == "BA":
        return _nx_edges(nx.barabasi_albert_graph(spec.n_nodes, spec.m_edges, seed=nx_seed))
    if spec.model == "WS":
        k = 2 * spec.m_edges
        if k >= spec.n_nodes:
            raise ValueError("Watts-Strogatz needs 2 * m_edges < n_nodes")
        return _nx_edges(nx.watts_strogatz_graph(spec.n_nodes, k, spec.p_edge, seed=nx_seed))
    return _gnp_edges(spec.n_nodes, spec.p_edge, rng)


def _orient(edges: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    flip = rng.random(edges.shape[0]) < 0.5
    edges[flip] = edges[flip][:, ::-1]
    return edges


def generate_base(spec: GenSpec) -> Graph:
    rng = np.random.default_rng(spec.seed)
    e = _orient(base_edges(spec, rng), rng)
    return Graph(spec.n_nodes, e[:, 0], e[:, 1], directed=True)


class _Injector:
    """Accumulates injected nodes and edges on top of a base graph."""

    def __init__(self, node_count: int, rng: np.random.Generator):
        self.node_count = node_count
        self.rng = rng
        self.extra: list[tuple[int, int]] = []
        self.patterns: list[InjectedPattern] = []

    def _new_nodes(self, count: int) -> list[int]:
        start = self.node_count
        self.node_count += count
        return list(range(start, self.node_count))

    def _sample_existing(self, count: int) -> list[int]:
        if self.node_count < count:
            raise ValueError(f"need {count} existing nodes, graph has {self.node_count}")
        return self.rng.choice(self.node_count, count, replace=False).tolist()

    def inject(self, mode: str, smurfs: int) -> InjectedPattern:
        if not MIN_SMURFS <= smurfs <= MAX_SMURFS:
            raise ValueError(f"smurf count must be in [{MIN_SMURFS}, {MAX_SMURFS}]")
        if mode == "separate":
            nodes = self._new_nodes(smurfs + 2)
            sender, receiver, mules = nodes[0], nodes[-1], nodes[1:-1]
        elif mode == "new_mules":
            sender, receiver = self._sample_existing(2)
            mules = self._new_nodes(smurfs)
        elif mode == "existing_mules":
            picked = self._sample_existing(smurfs + 2)
            sender, receiver, mules = picked[0], picked[1], picked[2:]
        else:
            raise ValueError(f"unknown injection mode {mode!r}")
        for mule in mules:
            self.extra.append((sender, mule))
            self.extra.append((mule, receiver))
        pattern = InjectedPattern(mode, int(sender), int(receiver), tuple(int(x) for x in mules))
        self.patterns.append(pattern)
        return pattern

    def graph(self, src: np.ndarray, dst: np.ndarray) -> Graph:
        if self.extra:
            add = np.array(self.extra, dtype=src.dtype)
            src = np.concatenate([src, add[:, 0]])
            dst = np.concatenate([dst, add[:, 1]])
        return Graph(self.node_count, src, dst, directed=True)


def inject_pattern(g: Graph, mode: str, smurf_count: int, seed: int = 0) -> tuple[Graph, set[int]]:
    """Add one scatter-gather pattern to ``g`` and return the participants."""
    inj = _Injector(g.node_count, np.random.default_rng(seed))
    pattern = inj.inject(mode, smurf_count)
    return inj.graph(g.src, g.dst), set(pattern.participants)


def generate_dataset(spec: GenSpec) -> SyntheticDataset:
    """Base graph plus ``n_patterns`` injections of every mode, in mode order."""
    rng = np.random.default_rng(spec.seed)
    e = _orient(base_edges(spec, rng), rng)
    inj = _Injector(spec.n_nodes, rng)
    for mode in MODES:
        for _ in range(spec.n_patterns):
            inj.inject(mode, int(rng.integers(MIN_SMURFS, MAX_SMURFS + 1)))
    g = inj.graph(e[:, 0], e[:, 1])
    del e

    labels = np.zeros(g.node_count, dtype=bool)
    tags = np.full(g.node_count, NO_PATTERN, dtype=object)
    for p in inj.patterns:
        for v in p.participants:
            if not labels[v]:
                labels[v] = True
                tags[v] = p.mode
    return SyntheticDataset(g, labels, tags, spec, inj.patterns)


def iter_datasets(specs) -> Iterator[SyntheticDataset]:
    for spec in specs:
        yield generate_dataset(spec)
