"""Figure and CSV rendering for batch runs.

Figures are written with fixed size, dpi and metadata so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_PNG_METADATA = {"Software": "iconix"}
_FIGSIZE = (6.0, 4.5)
_DPI = 100


def write_candidates_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "label", "gloss", "interpretation",
                         "concreteness", "familiarity", "imageability",
                         "meaningfulness", "aggregate"])
        for row in rows:
            scores = row["scores"]
            writer.writerow([row["rank"], row["label"], row["gloss"],
                             row["interpretation"], scores["c"], scores["f"],
                             scores["i"], scores["m"], f"{row['aggregate']:.6f}"])


def write_checkpoints_csv(path: Path, checkpoints_by_view: dict[str, list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["view", "step", "distance"])
        for view in sorted(checkpoints_by_view):
            for step, distance in checkpoints_by_view[view]:
                writer.writerow([view, step, f"{distance:.9f}"])


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def render_scatter_figure(path: Path, scatter: dict, title: str) -> None:
    """Cluster scatter in projection space with centroid crosses."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = [p["x"] for p in scatter["points"]]
    ys = [p["y"] for p in scatter["points"]]
    clusters = [p["cluster"] for p in scatter["points"]]
    ax.scatter(xs, ys, c=clusters, cmap="tab10", s=28, vmin=0, vmax=9)
    ax.scatter([c["x"] for c in scatter["centroids"]],
               [c["y"] for c in scatter["centroids"]],
               marker="x", color="red", s=90, linewidths=2.0)
    for point in scatter["points"]:
        ax.annotate(str(point["step"]), (point["x"], point["y"]),
                    fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def render_distance_figure(path: Path, checkpoints_by_view: dict[str, list],
                           epsilon: float) -> None:
    """Checkpoint distances per view with the plateau threshold marked."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for view in sorted(checkpoints_by_view):
        points = checkpoints_by_view[view]
        ax.plot([s for s, _ in points], [d for _, d in points],
                marker="o", markersize=3, label=view)
    ax.axhline(epsilon, color="gray", linestyle="--", linewidth=1,
               label="plateau threshold")
    ax.set_xlabel("simplification step")
    ax.set_ylabel("checkpoint distance")
    ax.set_title("distance between checkpoints")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
