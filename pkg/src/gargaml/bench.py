"""Wall-clock and peak-memory benchmarking of scoring methods under a time budget.

Each run executes in a forked child so an exceeded budget can be enforced by
terminating it, and so peak RSS reflects the run alone.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import resource
import time
import traceback
from dataclasses import asdict, dataclass
from functools import partial
from typing import Any, Callable

from .community import DEFAULT_RESOLUTION
from .graph import Graph
from .scoring import run_garg_aml, score_digest

logger = logging.getLogger(__name__)

OK, OUT_OF_TIME, OUT_OF_MEMORY, FAILED = "ok", "out_of_time", "out_of_memory", "failed"


@dataclass
class TimingRecord:
    method: str
    dataset: str
    wall_clock: float
    peak_memory: int | None  # bytes; None when unavailable
    status: str
    workers: int = 1
    nodes: int = 0
    edges: int = 0
    budget: float | None = None
    digest: str = ""  # score digest, comparable across worker counts
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _garg(g: Graph, variant: str, workers: int = 1, resolution: float = DEFAULT_RESOLUTION,
          seed: int = 0):
    return run_garg_aml(g, (variant,), resolution=resolution, seed=seed, workers=workers)


METHODS: dict[str, Callable[..., Any]] = {
    "garg_undirected": partial(_garg, variant="undirected"),
    "garg_directed": partial(_garg, variant="directed"),
}


def _child(conn, method, g):
    try:
        t0 = time.perf_counter()
        result = method(g)
        elapsed = time.perf_counter() - t0
        digest = ""
        if hasattr(result, "scores"):
            digest = score_digest([s for v in sorted(result.scores) for s in result.scores[v]])
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
        children = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss * 1024
        conn.send((OK, elapsed, max(peak, children), digest))
    except MemoryError:
        conn.send((OUT_OF_MEMORY, 0.0, None, "MemoryError"))
    except Exception:  # noqa: BLE001 - reported through the status field
        conn.send((FAILED, 0.0, None, traceback.format_exc(limit=3)))
    finally:
        conn.close()


def benchmark(method: Callable[[Graph], Any], g: Graph, time_budget: float | None = None,
              method_name: str = "method", dataset: str = "graph", workers: int = 1) -> TimingRecord:
    """Time one full run of ``method(g)``.

    Past the budget the run is killed and recorded as ``out_of_time`` with
    ``wall_clock`` equal to the budget.
    """
    if time_budget is not None and time_budget <= 0:
        raise ValueError("time budget must be positive")
    record = partial(TimingRecord, method_name, dataset, workers=workers, nodes=g.node_count,
                     edges=g.edge_count, budget=time_budget)
    ctx = mp.get_context("fork")
    parent, child = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(child, method, g))
    t0 = time.perf_counter()
    proc.start()
    child.close()
    result = None
    if parent.poll(time_budget):
        try:
            result = parent.recv()
        except EOFError:
            result = None
    wall = time.perf_counter() - t0
    if result is None and proc.is_alive() and time_budget is not None and wall >= time_budget:
        proc.terminate()
        proc.join()
        parent.close()
        return record(float(time_budget), None, OUT_OF_TIME)
    proc.join()
    parent.close()
    if result is None:
        # killed without reporting back, typically by the OOM killer
        return record(wall, None, OUT_OF_MEMORY, message=f"exit code {proc.exitcode}")
    status, elapsed, peak, payload = result
    if status == OK:
        return record(elapsed, peak, status, digest=payload)
    return record(elapsed, peak, status, message=payload)
