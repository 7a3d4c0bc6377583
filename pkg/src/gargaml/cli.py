"""Command-line entry point: generate, score, train-eval, benchmark, ingest.

Every command writes ``run_config.json`` (the fully resolved settings) next
to its outputs. Settings resolve as: command-line flag, then the JSON file
given with ``--config``, then the built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import multiprocessing as mp
import sys
import time
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fileio
from .bench import FAILED, METHODS, OK, benchmark
from .community import DEFAULT_RESOLUTION
from .graph import Graph
from .ingest import (DEFAULT_CUTOFFS, IBM_COLUMNS, PATTERNS, aggregate_labels, load_pattern_file,
                     load_transactions, write_node_labels)
from .metrics import DEFAULT_THRESHOLD, compute_metrics
from .ml import build_features, feature_matrix, predict, stratified_split
from .ml import train_decision_tree, train_gradient_boost
from .scoring import VARIANTS, default_workers, run_garg_aml
from .seeds import substream
from .stats import rank_methods
from .synthgen import MODES, GenSpec, full_grid, generate_dataset

logger = logging.getLogger("gargaml")

DEFAULTS = {
    "resolution": DEFAULT_RESOLUTION,
    "threshold": DEFAULT_THRESHOLD,
    "train_fraction": 0.7,
    "budget": None,
    "seed": 0,
    "jobs": 1,
    "variant": "both",
    "patterns": list(MODES),
    "methods": None,
    "workers_sweep": None,
    "repeats": 1,
    "cutoffs": list(DEFAULT_CUTOFFS),
    "delimiter": ",",
    "format": "ibm",
    "columns": None,
    "sizes": None,
    "save_models": False,
}

INTERNAL_METHODS = ("garg_undirected", "garg_directed", "dt_undirected", "gb_undirected",
                    "dt_directed", "gb_directed")
EXTERNAL_DIR = "external_scores"
RANK_METRICS = ("auc_roc", "auc_pr")
METRIC_COLUMNS = ("dataset", "pattern", "method", "status", "precision", "recall", "f1",
                  "auc_roc", "auc_pr", "n_test", "n_test_pos", "message")

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 2, 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- config

def resolve(args: argparse.Namespace, keys: Sequence[str]) -> dict:
    """Flags beat the config file, which beats DEFAULTS."""
    config = {}
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text())
        if not isinstance(config, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        unknown = set(config) - set(DEFAULTS) - {"workers"}
        if unknown:
            logger.warning("ignoring unknown config keys: %s", ", ".join(sorted(unknown)))
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in config:
            out[key] = config[key]
        elif key == "workers":
            out[key] = default_workers()
        else:
            out[key] = DEFAULTS[key]
    return out


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _write_config(out_dir: Path, command: str, cfg: dict) -> None:
    fileio.write_json(out_dir / "run_config.json", {"command": command, **cfg})


# --------------------------------------------------------------------------- generate

def _generate_one(spec: GenSpec, out_dir: Path) -> list:
    ds = generate_dataset(spec)
    fileio.write_dataset(out_dir / spec.name, ds)
    return [spec.name, spec.model, ds.graph.node_count, ds.graph.edge_count, int(ds.labels.sum()),
            repr(ds.label_rate)]


def cmd_generate(args) -> int:
    cfg = resolve(args, ["seed", "jobs", "sizes"])
    if args.grid:
        sizes = cfg["sizes"] or None
        specs = full_grid(cfg["seed"]) if sizes is None else full_grid(cfg["seed"], tuple(sizes))
    else:
        if args.model is None or args.nodes is None:
            raise UsageError("give --grid full or at least --model and --nodes")
        base = GenSpec(args.model.upper(), args.nodes, args.m, args.p, args.patterns, 0)
        specs = [GenSpec(base.model, base.n_nodes, base.m_edges, base.p_edge, base.n_patterns,
                         substream(cfg["seed"], base.name))]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, "generate", {**cfg, "grid": args.grid,
                                    "specs": [s.to_dict() | {"name": s.name} for s in specs]})
    work = partial(_generate_one, out_dir=out)
    if cfg["jobs"] > 1 and len(specs) > 1:
        with mp.get_context("fork").Pool(cfg["jobs"]) as pool:
            rows = pool.map(work, specs, chunksize=1)
    else:
        rows = []
        for spec in specs:
            logger.info("generating %s", spec.name)
            rows.append(work(spec))
    fileio.write_table(out / "datasets.csv",
                       ["name", "model", "nodes", "edges", "laundering_nodes", "label_rate"], rows)
    print(f"wrote {len(rows)} dataset(s) to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- score

def _load_graph(path: Path) -> Graph:
    if path.is_dir():
        meta = fileio.read_metadata(path)
        return fileio.read_graph(path / fileio.EDGES_FILE, node_count=meta["node_count"])
    return fileio.read_graph(path)


def _variants(choice: str) -> tuple[str, ...]:
    return VARIANTS if choice == "both" else (choice,)


def cmd_score(args) -> int:
    cfg = resolve(args, ["variant", "resolution", "workers", "seed"])
    src = Path(args.graph)
    out = Path(args.out) if args.out else (src if src.is_dir() else src.parent)
    out.mkdir(parents=True, exist_ok=True)
    try:
        g = _load_graph(src)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_config(out, "score", {**cfg, "graph": str(src)})
    variants = _variants(cfg["variant"])
    if g.node_count == 0:
        logger.warning("%s holds no edges; writing empty score files", src)
    t0 = time.perf_counter()
    res = run_garg_aml(g, variants, resolution=cfg["resolution"],
                       seed=substream(cfg["seed"], "louvain"), workers=cfg["workers"])
    elapsed = time.perf_counter() - t0
    for variant in variants:
        fileio.write_scores(out / f"scores_{variant}.csv", res.scores[variant], variant)
    fileio.write_table(out / "communities.csv", ["node_id", "community"],
                       enumerate(res.partition.assignment.tolist()))
    print(f"scored {g.node_count} nodes, {g.edge_count} edges "
          f"({res.partition.community_count} communities, {res.pruned.edge_count} edges kept) "
          f"in {elapsed:.3f}s with {cfg['workers']} worker(s) -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- train-eval

def _dataset_dirs(paths: Sequence[str]) -> list[Path]:
    dirs = []
    for p in map(Path, paths):
        if (p / fileio.METADATA_FILE).exists():
            dirs.append(p)
        elif p.is_dir():
            dirs.extend(sorted(d.parent for d in p.glob(f"*/{fileio.METADATA_FILE}")))
        else:
            raise UsageError(f"{p}: not a dataset directory")
    if not dirs:
        raise UsageError("no dataset directories found")
    return dirs


def _external_scores(d: Path, n: int) -> dict[str, np.ndarray]:
    out = {}
    for f in sorted((d / EXTERNAL_DIR).glob("*.csv")):
        arr = np.zeros(n)
        data = np.loadtxt(f, delimiter=",", skiprows=1, ndmin=2)
        if data.size:
            arr[data[:, 0].astype(np.int64)] = data[:, 1]
        out[f.stem] = arr
    return out


def _row(name, pattern, method, status, m=None, n_test=0, n_pos=0, msg=""):
    nan = math.nan
    vals = (m.precision, m.recall, m.f1, m.auc_roc, m.auc_pr) if m else (nan,) * 5
    return [name, pattern, method, status, *vals, n_test, n_pos, msg]


def evaluate_dataset(d: Path, cfg: dict) -> list[list]:
    """All (pattern, method) metric rows for one dataset directory."""
    ds = fileio.read_dataset(d)
    name = d.name
    g = ds.graph
    res = run_garg_aml(g, VARIANTS, resolution=cfg["resolution"],
                       seed=substream(cfg["seed"], f"louvain/{name}"), workers=cfg["workers"])
    raw = {v: np.array([s.score for s in res.scores[v]]) for v in VARIANTS}
    no_labels = np.zeros(g.node_count, dtype=bool)
    X = {v: feature_matrix(build_features(res.pruned, raw[v], no_labels))[0] for v in VARIANTS}
    external = _external_scores(d, g.node_count)
    methods = cfg["methods"] or list(INTERNAL_METHODS) + sorted(external)
    rows = []
    for pattern in cfg["patterns"]:
        labels = ds.labels if pattern == "all" else ds.pattern_tag == pattern
        labels = np.asarray(labels, dtype=bool)
        try:
            train_rows, test_rows = stratified_split(
                build_features(res.pruned, raw["undirected"], labels), cfg["train_fraction"],
                substream(cfg["seed"], f"split/{name}/{pattern}"))
        except ValueError as exc:
            rows += [_row(name, pattern, m, "degenerate", msg=str(exc)) for m in methods]
            continue
        train_nodes = np.array([r.node for r in train_rows])
        test_nodes = np.array([r.node for r in test_rows])
        y_test = labels[test_nodes]
        n_pos = int(y_test.sum())
        for method in methods:
            try:
                scores = _method_scores(method, X, labels, raw, external, train_nodes,
                                        test_nodes, cfg, d, pattern)
            except (ValueError, KeyError) as exc:
                rows.append(_row(name, pattern, method, FAILED, msg=str(exc),
                                 n_test=len(test_nodes), n_pos=n_pos))
                continue
            m = compute_metrics(scores, y_test, cfg["threshold"])
            status = OK if m.auc_defined else "undefined"
            rows.append(_row(name, pattern, method, status, m, len(test_nodes), n_pos))
    return rows


def _method_scores(method, X, labels, raw, external, train_nodes, test_nodes, cfg, d, pattern):
    if method in external:
        return external[method][test_nodes]
    kind, _, variant = method.partition("_")
    if variant not in VARIANTS:
        raise KeyError(f"unknown method {method!r}")
    if kind == "garg":
        return raw[variant][test_nodes]
    train = (X[variant][train_nodes], labels[train_nodes])
    if kind == "dt":
        model = train_decision_tree(train)
    elif kind == "gb":
        model = train_gradient_boost(train)
    else:
        raise KeyError(f"unknown method {method!r}")
    if cfg["save_models"]:
        mdir = Path(cfg["out"]) / "models" / d.name / pattern
        mdir.mkdir(parents=True, exist_ok=True)
        (mdir / f"{method}.json").write_text(model.to_json() + "\n")
    return predict(model, X[variant][test_nodes])


def _safe_evaluate(d: Path, cfg: dict) -> tuple[str, list[list] | None, str]:
    try:
        return d.name, evaluate_dataset(d, cfg), ""
    except Exception as exc:  # noqa: BLE001 - one bad dataset must not sink the batch
        logger.exception("dataset %s failed", d)
        return d.name, None, f"{type(exc).__name__}: {exc}"


def rank_reports(rows: list[list], methods: Sequence[str]) -> dict:
    """Friedman/Nemenyi per pattern and metric; undefined entries count as 0."""
    reports = {}
    idx = {c: i for i, c in enumerate(METRIC_COLUMNS)}
    for pattern in sorted({r[idx["pattern"]] for r in rows}):
        sub = [r for r in rows if r[idx["pattern"]] == pattern]
        datasets = sorted({r[idx["dataset"]] for r in sub})
        if len(methods) < 2 or len(datasets) < 2:
            continue
        for metric in RANK_METRICS:
            table = {ds: {m: 0.0 for m in methods} for ds in datasets}
            for r in sub:
                v = r[idx[metric]]
                if r[idx["method"]] in methods and not math.isnan(v):
                    table[r[idx["dataset"]]][r[idx["method"]]] = v
            reports[f"{pattern}/{metric}"] = rank_methods(table, methods)
    return reports


def cmd_train_eval(args) -> int:
    from .plotting import metric_figure

    cfg = resolve(args, ["resolution", "workers", "seed", "threshold", "train_fraction",
                         "patterns", "methods", "jobs", "save_models"])
    dirs = _dataset_dirs(args.datasets)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg["out"] = str(out)
    _write_config(out, "train-eval", {**cfg, "datasets": [str(d) for d in dirs]})
    if cfg["jobs"] > 1 and len(dirs) > 1:
        # datasets run in parallel, so per-dataset scoring stays serial
        inner = {**cfg, "workers": 1}
        with mp.get_context("fork").Pool(cfg["jobs"]) as pool:
            results = pool.map(partial(_safe_evaluate, cfg=inner), dirs, chunksize=1)
    else:
        results = []
        for d in dirs:
            logger.info("evaluating %s", d.name)
            results.append(_safe_evaluate(d, cfg))

    rows, failed = [], []
    for name, ds_rows, err in results:
        if ds_rows is None:
            failed.append(name)
            rows.append(_row(name, "-", "-", FAILED, msg=err))
        else:
            rows.extend(ds_rows)
    fileio.write_table(out / "metrics.csv", METRIC_COLUMNS, rows)

    evaluated = [r for r in rows if r[2] != "-"]
    methods = sorted({r[2] for r in evaluated}, key=lambda m: (m not in INTERNAL_METHODS, m))
    if cfg["methods"]:
        methods = list(cfg["methods"])
    reports = rank_reports(evaluated, methods)
    rank_rows = []
    for key, rep in reports.items():
        pattern, metric = key.split("/")
        for m in rep.methods:
            rank_rows.append([pattern, metric, m, repr(rep.method_ranks[m]), repr(rep.friedman_q),
                              repr(rep.nemenyi_cd), rep.k, rep.N])
    if rank_rows:
        fileio.write_table(out / "ranks.csv", ["pattern", "metric", "method", "avg_rank",
                                               "friedman_q", "nemenyi_cd", "k", "N"], rank_rows)
    fileio.write_json(out / "report.json", {
        "datasets": len(dirs),
        "failed_datasets": failed,
        "methods": methods,
        "rank_reports": {k: r.to_dict() for k, r in reports.items()},
    })
    for metric in RANK_METRICS:
        col = METRIC_COLUMNS.index(metric)
        for pattern in cfg["patterns"]:
            vals: dict[str, list[float]] = {}
            for r in evaluated:
                if r[1] == pattern:
                    vals.setdefault(r[2], []).append(r[col])
            metric_figure(vals, metric, out / f"{metric}_{pattern}.png")

    statuses = {}
    for r in rows:
        statuses[r[3]] = statuses.get(r[3], 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(statuses.items()))
    print(f"evaluated {len(dirs)} dataset(s), {len(methods)} method(s): {summary}")
    for key, rep in reports.items():
        print(f"  {key}: Q={rep.friedman_q:.3f} CD={rep.nemenyi_cd:.3f} "
              + " ".join(f"{m}={r:.2f}" for m, r in rep.method_ranks.items()))
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------- benchmark

def cmd_benchmark(args) -> int:
    from .plotting import timing_figure

    cfg = resolve(args, ["methods", "budget", "workers_sweep", "resolution", "seed", "repeats"])
    methods = cfg["methods"] or sorted(METHODS)
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown benchmark method {m!r}; choose from {sorted(METHODS)}")
    sweep = cfg["workers_sweep"] or [default_workers()]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, "benchmark", {**cfg, "graphs": list(args.graphs), "workers_sweep": sweep})
    records = []
    for path in map(Path, args.graphs):
        name = path.name if path.is_dir() else path.stem
        try:
            g = _load_graph(path).prepare()
        except (OSError, ValueError, KeyError) as exc:
            logger.error("%s: %s", path, exc)
            records.append(_failed_record(name, methods, str(exc)))
            continue
        for method in methods:
            for w in sweep:
                fn = partial(METHODS[method], workers=w, resolution=cfg["resolution"],
                             seed=substream(cfg["seed"], "louvain"))
                for _ in range(cfg["repeats"]):
                    rec = benchmark(fn, g, cfg["budget"], method, name, w)
                    logger.info("%s %s workers=%d: %s %.3fs", method, name, w, rec.status,
                                rec.wall_clock)
                    records.append([rec])
    flat = [r for group in records for r in group]
    fields = list(flat[0].to_dict()) if flat else ["method", "dataset", "status"]
    fileio.write_table(out / "timings.csv", fields, [list(r.to_dict().values()) for r in flat])
    timing_figure(flat, out / "runtime.png")

    mismatched = []
    for key in {(r.method, r.dataset) for r in flat}:
        digests = {r.digest for r in flat if (r.method, r.dataset) == key and r.status == OK}
        if len(digests) > 1:
            mismatched.append(key)
    for key in mismatched:
        logger.error("scores differ across worker counts for %s on %s", *key)
    bad = [r for r in flat if r.status == FAILED]
    print(f"{len(flat)} timing record(s) -> {out / 'timings.csv'}")
    for r in flat:
        print(f"  {r.method:<16} {r.dataset:<28} workers={r.workers:<3} {r.status:<13} "
              f"{r.wall_clock:10.3f}s")
    return EXIT_PARTIAL if bad or mismatched else EXIT_OK


def _failed_record(name, methods, msg):
    from .bench import TimingRecord
    return [TimingRecord(m, name, 0.0, None, FAILED, message=msg) for m in methods]


# --------------------------------------------------------------------------- ingest

def _parse_columns(text: str | dict | None, fmt: str) -> dict:
    if text is None:
        if fmt != "ibm":
            raise UsageError("--columns is required unless --format ibm")
        return dict(IBM_COLUMNS)
    if isinstance(text, dict):
        return text
    cols = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        idx = [int(x) for x in val.split(":")]
        cols[key.strip()] = idx[0] if len(idx) == 1 else idx
    return cols


def cmd_ingest(args) -> int:
    cfg = resolve(args, ["format", "columns", "delimiter", "cutoffs"])
    columns = _parse_columns(cfg["columns"], cfg["format"])
    patterns = load_pattern_file(args.patterns, cfg["delimiter"]) if args.patterns else None
    res = load_transactions(args.transactions, columns, delimiter=cfg["delimiter"],
                            header=not args.no_header, patterns=patterns)
    labels = aggregate_labels(res.records, cfg["cutoffs"], res.index)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, "ingest", {**cfg, "columns": columns, "transactions": args.transactions,
                                  "patterns": args.patterns})
    g = res.graph()
    fileio.write_edges(out / fileio.EDGES_FILE, g.src, g.dst)
    write_node_labels(out / "node_labels.csv", labels)
    res.index.save(out / "accounts.csv")
    pattern_rows = [[p, c, repr(labels.positive_rate(c, p))]
                    for p in PATTERNS for c in labels.cutoffs]
    fileio.write_table(out / "pattern_rates.csv", ["pattern", "cutoff", "positive_rate"],
                       pattern_rows)
    fileio.write_table(out / "skipped_rows.csv", ["line", "reason"], res.skipped)
    print(f"{len(res.records)} transactions, {res.node_count} accounts, "
          f"{g.edge_count} distinct edges; {len(res.skipped)} malformed rows skipped")
    for c in labels.cutoffs:
        print(f"  cut-off {c:g}: positive rate {labels.positive_rate(c):.5%}")
    return EXIT_OK


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gargaml", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", help="JSON file of default settings")
        if seed:
            sp.add_argument("--seed", type=int, help="master seed (default 0)")

    g = sub.add_parser("generate", help="synthetic graphs with injected smurfing patterns")
    common(g)
    g.add_argument("--out", required=True)
    g.add_argument("--grid", choices=["full"])
    g.add_argument("--sizes", type=_csv_list(int), help="node counts for --grid, e.g. 100,10000")
    g.add_argument("--model", choices=["ba", "er", "ws", "BA", "ER", "WS"])
    g.add_argument("--nodes", type=int)
    g.add_argument("--m", type=int, help="edges per node (BA) or lattice degree (WS)")
    g.add_argument("--p", type=float, help="edge (ER) or rewiring (WS) probability")
    g.add_argument("--patterns", type=int, default=3, help="injections per mode")
    g.add_argument("--jobs", type=int, help="datasets generated in parallel")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("score", help="GARG-AML scores for one graph")
    common(s)
    s.add_argument("graph", help="edge-list file or dataset directory")
    s.add_argument("--variant", choices=["undirected", "directed", "both"])
    s.add_argument("--resolution", type=float)
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="output directory (default: beside the input)")
    s.set_defaults(func=cmd_score)

    t = sub.add_parser("train-eval", help="score, train tree models and evaluate")
    common(t)
    t.add_argument("datasets", nargs="+", help="dataset directories or a parent of several")
    t.add_argument("--out", required=True)
    t.add_argument("--methods", type=_csv_list(str))
    t.add_argument("--patterns", type=_csv_list(str),
                   help="pattern tags to evaluate separately, or 'all'")
    t.add_argument("--resolution", type=float)
    t.add_argument("--threshold", type=float)
    t.add_argument("--train-fraction", type=float)
    t.add_argument("--workers", type=int)
    t.add_argument("--jobs", type=int, help="datasets evaluated in parallel")
    t.add_argument("--save-models", action="store_true", default=None)
    t.set_defaults(func=cmd_train_eval)

    b = sub.add_parser("benchmark", help="time scoring methods under a budget")
    common(b)
    b.add_argument("graphs", nargs="+", help="edge-list files or dataset directories")
    b.add_argument("--out", required=True)
    b.add_argument("--methods", type=_csv_list(str))
    b.add_argument("--budget", type=float, help="seconds per run (default unlimited)")
    b.add_argument("--workers-sweep", type=_csv_list(int))
    b.add_argument("--resolution", type=float)
    b.add_argument("--repeats", type=int)
    b.set_defaults(func=cmd_benchmark)

    i = sub.add_parser("ingest", help="labels and edge list from a transaction file")
    common(i, seed=False)
    i.add_argument("transactions")
    i.add_argument("--out", required=True)
    i.add_argument("--patterns", help="pattern file with laundering-attempt blocks")
    i.add_argument("--format", choices=["ibm", "custom"])
    i.add_argument("--columns", help="e.g. src_account=1:2,dst_account=3:4,is_laundering=10")
    i.add_argument("--delimiter")
    i.add_argument("--no-header", action="store_true")
    i.add_argument("--cutoffs", type=_csv_list(float))
    i.set_defaults(func=cmd_ingest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except fileio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
