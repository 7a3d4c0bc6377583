"""Load AMLSim-style transaction files and turn edge labels into node labels.

A node's propensity is the share of its transactions (sent and received)
that are flagged as laundering. A node is positive at cut-off ``c`` when its
propensity is strictly greater than ``c``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Graph

logger = logging.getLogger(__name__)

PATTERNS = ("fan-out", "fan-in", "gather-scatter", "scatter-gather", "cycle",
            "random", "bipartite", "stack", "not-classified")
DEFAULT_CUTOFFS = (0.1, 0.2, 0.3, 0.5, 0.9)

# IBM AML transaction CSV: Timestamp, From Bank, Account, To Bank, Account,
# Amount Received, Receiving Currency, Amount Paid, Payment Currency,
# Payment Format, Is Laundering
IBM_COLUMNS = {"src_account": (1, 2), "dst_account": (3, 4), "is_laundering": 10}

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    src_account: str
    dst_account: str
    is_laundering: bool
    pattern: str | None = None


class AccountIndex:
    """Bijection between account strings and dense node ids."""

    def __init__(self, accounts: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        for a in accounts:
            self.id(a)

    def id(self, account: str) -> int:
        i = self._ids.get(account)
        if i is None:
            i = self._ids[account] = len(self._names)
            self._names.append(account)
        return i

    def __getitem__(self, account: str) -> int:
        return self._ids[account]

    def __contains__(self, account: str) -> bool:
        return account in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def name(self, node: int) -> str:
        return self._names[node]

    def save(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["account", "node_id"])
            w.writerows((a, i) for i, a in enumerate(self._names))

    @classmethod
    def load(cls, path) -> "AccountIndex":
        with open(path, newline="") as f:
            rows = sorted(csv.DictReader(f), key=lambda r: int(r["node_id"]))
        return cls(r["account"] for r in rows)


@dataclass
class LoadResult:
    records: list[TransactionRecord]
    index: AccountIndex
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return len(self.index)

    def graph(self) -> Graph:
        src = np.fromiter((self.index[r.src_account] for r in self.records), dtype=np.int64,
                          count=len(self.records))
        dst = np.fromiter((self.index[r.dst_account] for r in self.records), dtype=np.int64,
                          count=len(self.records))
        return Graph(self.node_count, src, dst, directed=True)


def normalise_pattern(name: str) -> str:
    key = name.strip().lower().replace("_", "-").replace(" ", "-")
    if key.startswith("not"):
        return "not-classified"
    if key in PATTERNS:
        return key
    raise ValueError(f"unknown laundering pattern {name!r}")


def _columns(spec) -> tuple[int, ...]:
    return (spec,) if isinstance(spec, int) else tuple(spec)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_transactions(path, column_map: Mapping[str, int | Sequence[int]] = IBM_COLUMNS,
                      delimiter: str = ",", header: bool = True,
                      patterns: Mapping[tuple, str] | None = None,
                      index: AccountIndex | None = None) -> LoadResult:
    """Parse a delimited transaction file.

    ``column_map`` maps ``src_account``, ``dst_account`` and ``is_laundering``
    (and optionally ``pattern``) to zero-based column indices. An account
    spread over several columns (bank + account number) is joined with ``:``.
    ``patterns`` maps a full stripped row tuple to its pattern name, as built by
    ``load_pattern_file``. Malformed rows are skipped and reported.
    """
    for key in ("src_account", "dst_account", "is_laundering"):
        if key not in column_map:
            raise KeyError(f"column_map is missing {key!r}")
    src_cols = _columns(column_map["src_account"])
    dst_cols = _columns(column_map["dst_account"])
    lab_col = column_map["is_laundering"]
    pat_col = column_map.get("pattern")
    need = max(src_cols + dst_cols + (lab_col,) + ((pat_col,) if pat_col is not None else ()))

    index = index if index is not None else AccountIndex()
    records: list[TransactionRecord] = []
    skipped: list[tuple[int, str]] = []
    with open(path, newline="") as f:
        reader = csv.reader(f, delimiter=delimiter)
        for lineno, row in enumerate(reader, 1):
            if header and lineno == 1:
                if len(row) <= need:
                    raise KeyError(f"{path}: header has {len(row)} columns, mapping needs {need + 1}")
                continue
            if not row:
                continue
            try:
                if len(row) <= need:
                    raise ValueError(f"expected at least {need + 1} columns, got {len(row)}")
                src = ":".join(row[c].strip() for c in src_cols)
                dst = ":".join(row[c].strip() for c in dst_cols)
                flag = _parse_bool(row[lab_col])
                pattern = None
                if flag:
                    if pat_col is not None and row[pat_col].strip():
                        pattern = normalise_pattern(row[pat_col])
                    elif patterns is not None:
                        pattern = patterns.get(tuple(c.strip() for c in row), "not-classified")
                    else:
                        pattern = "not-classified"
            except ValueError as exc:
                skipped.append((lineno, str(exc)))
                continue
            index.id(src)
            index.id(dst)
            records.append(TransactionRecord(src, dst, flag, pattern))
    if skipped:
        logger.warning("%s: skipped %d malformed rows (first at line %d: %s)",
                       path, len(skipped), skipped[0][0], skipped[0][1])
    return LoadResult(records, index, skipped)


def load_pattern_file(path, delimiter: str = ",") -> dict[tuple, str]:
    """Read an AMLSim ``*_Patterns.txt`` file into a row -> pattern lookup.

    Attempts are delimited by ``BEGIN LAUNDERING ATTEMPT - <TYPE>[: detail]``
    and ``END LAUNDERING ATTEMPT`` lines; the rows in between use the same
    layout as the transaction file.
    """
    lookup: dict[tuple, str] = {}
    current = None
    with open(path, newline="") as f:
        for line in f:
            text = line.strip()
            if not text:
                continue
            upper = text.upper()
            if upper.startswith("BEGIN LAUNDERING ATTEMPT"):
                kind = text.split("-", 1)[1] if "-" in text else ""
                current = normalise_pattern(kind.split(":", 1)[0])
            elif upper.startswith("END LAUNDERING ATTEMPT"):
                current = None
            elif current is not None:
                row = next(csv.reader([text], delimiter=delimiter))
                lookup[tuple(c.strip() for c in row)] = current
    return lookup


@dataclass
class NodeLabelSet:
    propensity: np.ndarray
    binary: dict[float, np.ndarray]
    pattern_propensity: dict[str, np.ndarray]
    per_pattern_binary: dict[tuple[str, float], np.ndarray]
    cutoffs: tuple[float, ...]

    def positive_rate(self, cutoff: float, pattern: str | None = None) -> float:
        arr = self.binary[cutoff] if pattern is None else self.per_pattern_binary[(pattern, cutoff)]
        return float(arr.mean()) if arr.size else 0.0


def aggregate_labels(records: Sequence[TransactionRecord], cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
                     index: AccountIndex | None = None) -> NodeLabelSet:
    cutoffs = tuple(float(c) for c in cutoffs)
    if any(not 0.0 < c <= 1.0 for c in cutoffs):
        raise ValueError("cut-offs must lie in (0, 1]")
    if index is None:
        index = AccountIndex()
        for r in records:
            index.id(r.src_account)
            index.id(r.dst_account)
    n = len(index)
    total = np.zeros(n, dtype=np.int64)
    flagged = np.zeros(n, dtype=np.int64)
    by_pattern = {p: np.zeros(n, dtype=np.int64) for p in PATTERNS}
    for r in records:
        a, b = index[r.src_account], index[r.dst_account]
        nodes = (a,) if a == b else (a, b)
        for v in nodes:
            total[v] += 1
            if r.is_laundering:
                flagged[v] += 1
                by_pattern[r.pattern or "not-classified"][v] += 1
    denom = np.maximum(total, 1)
    propensity = flagged / denom
    pattern_prop = {p: c / denom for p, c in by_pattern.items()}
    binary = {c: propensity > c for c in cutoffs}
    per_pattern = {(p, c): pattern_prop[p] > c for p in PATTERNS for c in cutoffs}
    return NodeLabelSet(propensity, binary, pattern_prop, per_pattern, cutoffs)


def write_node_labels(path, labels: NodeLabelSet) -> None:
    header = ["node_id", "propensity"] + [f"label_{c:g}" for c in labels.cutoffs]
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        cols = [labels.binary[c] for c in labels.cutoffs]
        for v, p in enumerate(labels.propensity.tolist()):
            w.writerow([v, repr(p)] + [int(col[v]) for col in cols])


def find_ibm_file(name: str, search: Sequence[Path | str] = ()) -> Path | None:
    for base in search:
        p = Path(base) / name
        if p.exists():
            return p
    return None
