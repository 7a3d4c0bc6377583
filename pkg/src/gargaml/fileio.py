"""Delimited-text and JSON file formats shared by the CLI commands.

Dataset directory layout::

    edges.csv       src,dst           one directed edge per line
    labels.csv      node_id,label,pattern_tag
    metadata.json   generation spec, counts, injected patterns

Score files carry ``node_id,variant,score`` followed by the block densities
and block sizes; see ``SCORE_COLUMNS``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph
from .scoring import DirectedBlocks, GargAmlScore, UndirectedBlocks
from .synthgen import NO_PATTERN, GenSpec, InjectedPattern, SyntheticDataset

EDGES_FILE = "edges.csv"
LABELS_FILE = "labels.csv"
METADATA_FILE = "metadata.json"

_BLOCK_IDS = [f"{i}{j}" for i in range(3) for j in range(3)]
SCORE_COLUMNS = {
    "undirected": ["node_id", "variant", "score", "s1", "s2", "s3", "l1", "l2", "l3", "n", "m"],
    "directed": (["node_id", "variant", "score"] + [f"s{b}" for b in _BLOCK_IDS]
                 + [f"size{b}" for b in _BLOCK_IDS] + ["l", "n", "m"]),
}

_CHUNK = 1_000_000


class ParseError(ValueError):
    """A delimited input file could not be parsed."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def write_edges(path, src: np.ndarray, dst: np.ndarray, header: bool = True) -> None:
    with open(path, "w") as f:
        if header:
            f.write("src,dst\n")
        for s in range(0, len(src), _CHUNK):
            a = src[s:s + _CHUNK].tolist()
            b = dst[s:s + _CHUNK].tolist()
            f.write("\n".join(map("{},{}".format, a, b)))
            f.write("\n")


def _scan_edges(path, delimiter: str):
    """Slow path: locate the first malformed row."""
    with open(path) as f:
        seen_data = False
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(delimiter)]
            try:
                a, b = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                if not seen_data:
                    seen_data = True  # header
                    continue
                raise ParseError(path, lineno, f"expected two integer node ids, got {text!r}")
            seen_data = True
            if a < 0 or b < 0:
                raise ParseError(path, lineno, "negative node id")


def read_edge_array(path, delimiter: str = ",") -> np.ndarray:
    """Read ``src,dst`` rows (optional header, ``#`` comments) as an (E, 2) array."""
    path = Path(path)
    skip = 0
    with open(path) as f:
        for line in f:
            text = line.strip()
            if not text or text.startswith("#"):
                skip += 1
                continue
            first = text.split(delimiter)[0].strip()
            if not first.lstrip("-").isdigit():
                skip += 1
            break
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", "loadtxt: input contained no data")
            arr = np.loadtxt(path, delimiter=delimiter, comments="#", skiprows=skip,
                             dtype=np.int64, usecols=(0, 1), ndmin=2)
    except ValueError:
        _scan_edges(path, delimiter)
        raise
    if arr.size and arr.min() < 0:
        _scan_edges(path, delimiter)
    return arr.reshape(-1, 2)


def read_graph(path, directed: bool = True, node_count: int | None = None,
               delimiter: str = ",") -> Graph:
    arr = read_edge_array(path, delimiter)
    if node_count is None:
        node_count = int(arr.max()) + 1 if arr.size else 0
    return Graph(node_count, arr[:, 0], arr[:, 1], directed=directed)


def write_dataset(directory, ds: SyntheticDataset) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_edges(d / EDGES_FILE, ds.graph.src, ds.graph.dst)
    with open(d / LABELS_FILE, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node_id", "label", "pattern_tag"])
        for v, (lab, tag) in enumerate(zip(ds.labels.tolist(), ds.pattern_tag.tolist())):
            w.writerow([v, int(lab), tag])
    meta = {
        "name": ds.spec.name,
        "spec": ds.spec.to_dict(),
        "node_count": ds.graph.node_count,
        "edge_count": ds.graph.edge_count,
        "label_count": int(ds.labels.sum()),
        "label_rate": ds.label_rate,
        "patterns": [asdict(p) for p in ds.patterns],
    }
    (d / METADATA_FILE).write_text(json.dumps(meta, indent=2) + "\n")
    return d


def read_labels(path) -> tuple[np.ndarray, np.ndarray]:
    ids, labels, tags = [], [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            ids.append(int(row["node_id"]))
            labels.append(row["label"].strip() in ("1", "true", "True"))
            tags.append(row.get("pattern_tag") or NO_PATTERN)
    n = max(ids) + 1 if ids else 0
    lab = np.zeros(n, dtype=bool)
    tag = np.full(n, NO_PATTERN, dtype=object)
    lab[ids] = labels
    tag[ids] = tags
    return lab, tag


def read_metadata(directory) -> dict:
    return json.loads((Path(directory) / METADATA_FILE).read_text())


def read_dataset(directory) -> SyntheticDataset:
    d = Path(directory)
    meta = read_metadata(d)
    g = read_graph(d / EDGES_FILE, directed=True, node_count=meta["node_count"])
    labels, tags = read_labels(d / LABELS_FILE)
    if labels.size < g.node_count:
        labels = np.concatenate([labels, np.zeros(g.node_count - labels.size, dtype=bool)])
        tags = np.concatenate([tags, np.full(g.node_count - tags.size, NO_PATTERN, dtype=object)])
    spec = GenSpec(**meta["spec"])
    patterns = [InjectedPattern(p["mode"], p["sender"], p["receiver"], tuple(p["mules"]))
                for p in meta.get("patterns", [])]
    return SyntheticDataset(g, labels, tags, spec, patterns)


def _fmt(x: float) -> str:
    return repr(float(x))


def score_row(s: GargAmlScore) -> list:
    b = s.blocks
    row = [s.node, s.variant, _fmt(s.score)]
    if isinstance(b, UndirectedBlocks):
        row += [_fmt(b.s1), _fmt(b.s2), _fmt(b.s3), b.l1, b.l2, b.l3, b.n, b.m]
    else:
        row += [_fmt(x) for r in b.s for x in r]
        row += [x for r in b.sizes for x in r]
        row += [b.l, b.n, b.m]
    return row


def write_scores(path, scores: Sequence[GargAmlScore], variant: str, delimiter: str = ",") -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, delimiter=delimiter, lineterminator="\n")
        w.writerow(SCORE_COLUMNS[variant])
        for s in scores:
            w.writerow(score_row(s))


def read_scores(path, delimiter: str = ",") -> list[GargAmlScore]:
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f, delimiter=delimiter):
            variant = row["variant"]
            if variant == "undirected":
                blocks = UndirectedBlocks(float(row["s1"]), float(row["s2"]), float(row["s3"]),
                                          int(row["l1"]), int(row["l2"]), int(row["l3"]),
                                          int(row["n"]), int(row["m"]))
            else:
                s = tuple(tuple(float(row[f"s{i}{j}"]) for j in range(3)) for i in range(3))
                z = tuple(tuple(int(row[f"size{i}{j}"]) for j in range(3)) for i in range(3))
                blocks = DirectedBlocks(s, z, int(row["l"]), int(row["n"]), int(row["m"]))
            out.append(GargAmlScore(int(row["node_id"]), float(row["score"]), variant, blocks))
    return out


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",") -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["NA" if isinstance(x, float) and math.isnan(x) else x for x in row])


def _no_nan(o):
    if isinstance(o, float) and math.isnan(o):
        return None
    if isinstance(o, np.floating) and np.isnan(o):
        return None
    if isinstance(o, dict):
        return {k: _no_nan(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_no_nan(v) for v in o]
    return o


def write_json(path, obj) -> None:
    """Pretty, key-sorted JSON; NaN becomes null."""
    text = json.dumps(_no_nan(obj), indent=2, sort_keys=True, default=_json_default)
    Path(path).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
