"""Figures for bench reports.  Uses the non-interactive Agg backend."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_bits_per_edge(rows, path, title: str | None = None) -> None:
    """Grouped bars of bits/edge, one group per dataset, one bar per method."""
    datasets = list(dict.fromkeys(r.dataset for r in rows))
    methods = list(dict.fromkeys(r.method for r in rows))
    value = {(r.dataset, r.method): r.bits_per_edge for r in rows}
    width = 0.8 / max(len(methods), 1)
    x = np.arange(len(datasets))
    fig, ax = plt.subplots(figsize=(max(5.0, 1.2 * len(datasets) * len(methods) * 0.4 + 2), 3.6))
    for i, m in enumerate(methods):
        ys = [value.get((d, m), np.nan) for d in datasets]
        ax.bar(x + (i - (len(methods) - 1) / 2) * width, ys, width, label=m)
    ax.set_xticks(x)
    ax.set_xticklabels(datasets)
    ax.set_ylabel("bits per edge")
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small", ncol=min(len(methods), 4))
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_objectives(rows, path) -> None:
    """Scatter of the log-gap objective against bits/edge per method."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for r in rows:
        ax.scatter(r.bim_log_gap / max(r.m, 1), r.bits_per_edge, s=18)
        ax.annotate(r.method, (r.bim_log_gap / max(r.m, 1), r.bits_per_edge), fontsize=7,
                    xytext=(3, 2), textcoords="offset points")
    ax.set_xlabel("log-gap objective per edge")
    ax.set_ylabel("bits per edge")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
