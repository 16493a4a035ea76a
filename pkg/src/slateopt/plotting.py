"""Figure rendering for experiment reports.

Figures are written to files next to the delimited reports; nothing here
affects the numeric outputs.  The Agg backend keeps rendering headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["save_heatmap_figure", "save_chart_figure", "save_convergence_figure"]


def _squash_gamma(gamma: float) -> float:
    # map [0, inf] onto [0, 1] for colouring; 0.5 corresponds to gamma = 1
    if math.isnan(gamma):
        return math.nan
    if math.isinf(gamma):
        return 1.0
    return gamma / (1.0 + gamma)


def save_heatmap_figure(rows: list[dict], path: str) -> str:
    cells: list[tuple[str, float]] = []
    for row in rows:
        key = (row["dist"], row["param"])
        if key not in cells:
            cells.append(key)
    ks = sorted({int(row["k"]) for row in rows})
    img = np.full((len(cells), len(ks)), np.nan)
    for row in rows:
        i = cells.index((row["dist"], row["param"]))
        j = ks.index(int(row["k"]))
        img[i, j] = _squash_gamma(float(row["gamma_fit"]))
    fig, ax = plt.subplots(figsize=(9, 0.45 * len(cells) + 2))
    mesh = ax.imshow(img, aspect="auto", origin="lower", cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(0, len(ks), max(1, len(ks) // 15)))
    ax.set_xticklabels([str(ks[i]) for i in range(0, len(ks), max(1, len(ks) // 15))])
    ax.set_yticks(range(len(cells)))
    ax.set_yticklabels([f"{d} {v:g}" for d, v in cells])
    ax.set_xlabel("consumption cap k")
    ax.set_ylabel("value distribution")
    bar = fig.colorbar(mesh, ax=ax)
    bar.set_label("gamma / (1 + gamma)   [0 = equal, 0.5 = proportional, 1 = one-hot]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_chart_figure(rows: list[dict], path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    pairs: list[tuple[float, float]] = []
    for row in rows:
        key = (row["p1"], row["p2"])
        if key not in pairs:
            pairs.append(key)
    for p1, p2 in pairs:
        pts = [(r["n"], r["r1"]) for r in rows if (r["p1"], r["p2"]) == (p1, p2)]
        ns, r1s = zip(*sorted(pts))
        ax.plot(ns, r1s, marker="o", label=f"p = ({p1:g}, {p2:g})")
    ax.axhline(0.5, color="grey", linestyle="--", linewidth=1)
    ax.set_xscale("log")
    ax.set_xlabel("slate size n")
    ax.set_ylabel("share of type 1")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_convergence_figure(rows: list[dict], path: str) -> str:
    ns = [row["n"] for row in rows]
    gaps = [row["gap"] for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(ns, gaps, marker="o")
    ax.set_xscale("log")
    if all(g > 0 for g in gaps):
        ax.set_yscale("log")
    ax.set_xlabel("slate size n")
    ax.set_ylabel("largest representation gap")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
