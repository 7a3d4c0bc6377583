"""Report figures: runtime per network size and metric spread per method."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import OUT_OF_TIME, TimingRecord  # noqa: E402


def timing_figure(records: Sequence[TimingRecord], path) -> Path | None:
    """Log-scale boxplots of wall-clock time per (method, node count).

    Out-of-time runs enter at the budget value, like the timing table.
    """
    groups: dict[tuple[str, int], list[float]] = defaultdict(list)
    for r in records:
        if r.status == "ok" or r.status == OUT_OF_TIME:
            groups[(r.method, r.nodes)].append(max(r.wall_clock, 1e-6))
    if not groups:
        return None
    methods = sorted({m for m, _ in groups})
    sizes = sorted({n for _, n in groups})
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(sizes) * len(methods)), 4.0))
    width = 0.8 / len(methods)
    for j, method in enumerate(methods):
        data, pos = [], []
        for i, n in enumerate(sizes):
            if (method, n) in groups:
                data.append(groups[(method, n)])
                pos.append(i + (j - (len(methods) - 1) / 2) * width)
        bp = ax.boxplot(data, positions=pos, widths=width * 0.9, patch_artist=True)
        color = f"C{j}"
        for box in bp["boxes"]:
            box.set_facecolor(color)
            box.set_alpha(0.6)
        ax.plot([], [], color=color, lw=6, alpha=0.6, label=method)
    ax.set_yscale("log")
    ax.set_xticks(range(len(sizes)))
    ax.set_xticklabels([f"{n:,}" for n in sizes])
    ax.set_xlabel("nodes")
    ax.set_ylabel("wall clock (s)")
    ax.legend(fontsize="small")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def metric_figure(values: Mapping[str, Sequence[float]], metric: str, path) -> Path | None:
    """One boxplot per method; NaN values are left out."""
    data = {m: [v for v in vals if v == v] for m, vals in values.items()}
    data = {m: v for m, v in data.items() if v}
    if not data:
        return None
    methods = sorted(data)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(methods)), 4.0))
    ax.boxplot([data[m] for m in methods])
    ax.set_xticks(range(1, len(methods) + 1))
    ax.set_xticklabels(methods, rotation=30, ha="right", fontsize="small")
    ax.set_ylabel(metric)
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
