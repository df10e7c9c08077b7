"""Representative-frame selection: seeded k-means over per-frame features,
nearest-centroid picks, and the 2-D scatter export for diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backends.base import FeatureVector
from .errors import AlignmentMismatch, DimensionMismatch, InvalidK
from .simplification import SimplificationSequence

DEFAULT_K = 9
DEFAULT_SEED = 42
DEFAULT_RESTARTS = 10


@dataclass
class KMeansRun:
    assignments: np.ndarray          # (n,) int cluster ids
    centroids: np.ndarray            # (k, d)
    inertia: float
    inertia_history: list[float]     # one entry per Lloyd iteration (best restart)
    n_iter: int


@dataclass
class ClusteringResult:
    k: int
    assignments: tuple[int, ...]
    centroids: tuple[FeatureVector, ...]
    inertia: float
    representatives: tuple[int, ...]  # frame indices, ascending by step


def _as_matrix(points: Sequence[FeatureVector] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        matrix = np.asarray(points, dtype=np.float64)
        if matrix.ndim != 2:
            raise DimensionMismatch("points array must be 2-D")
        return matrix
    lengths = {p.length for p in points}
    if len(lengths) > 1:
        raise DimensionMismatch(f"mixed feature lengths {sorted(lengths)}")
    return np.array([p.values for p in points], dtype=np.float64)


def _plus_plus_init(matrix: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = matrix.shape[0]
    centers = np.empty((k, matrix.shape[1]))
    centers[0] = matrix[int(rng.integers(n))]
    closest_sq = ((matrix - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            # all remaining points coincide with a chosen center
            index = int(rng.integers(n))
        else:
            index = int(rng.choice(n, p=closest_sq / total))
        centers[i] = matrix[index]
        closest_sq = np.minimum(closest_sq, ((matrix - centers[i]) ** 2).sum(axis=1))
    return centers


def _assign(matrix: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    distances = ((matrix[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = distances.argmin(axis=1)
    return labels, distances


def _lloyd(matrix: np.ndarray, centers: np.ndarray, max_iter: int
           ) -> tuple[np.ndarray, np.ndarray, float, list[float], int]:
    k = centers.shape[0]
    labels = np.full(matrix.shape[0], -1)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        new_labels, distances = _assign(matrix, centers)
        # Repair empty clusters with the point farthest from its centroid,
        # never stealing from a cluster that would become empty itself.
        point_cost = distances[np.arange(matrix.shape[0]), new_labels].copy()
        counts = np.bincount(new_labels, minlength=k)
        for cluster in range(k):
            if counts[cluster] == 0:
                eligible = counts[new_labels] >= 2
                candidates = np.where(eligible, point_cost, -np.inf)
                farthest = int(candidates.argmax())
                counts[new_labels[farthest]] -= 1
                counts[cluster] += 1
                new_labels[farthest] = cluster
                point_cost[farthest] = 0.0
        for cluster in range(k):
            centers[cluster] = matrix[new_labels == cluster].mean(axis=0)
        _, distances = _assign(matrix, centers)
        inertia = float(distances[np.arange(matrix.shape[0]), new_labels].sum())
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centers, history[-1], history, iterations


def kmeans(points: Sequence[FeatureVector] | np.ndarray, k: int, seed: int = DEFAULT_SEED,
           max_iter: int = 100, restarts: int = DEFAULT_RESTARTS) -> KMeansRun:
    """Seeded k-means++ with Lloyd iterations, deterministic for fixed inputs.

    Runs `restarts` independent seeded initializations and keeps the run
    with the lowest inertia (ties: earliest restart).
    """
    matrix = _as_matrix(points)
    n = matrix.shape[0]
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside 1..{n}")
    best: KMeansRun | None = None
    for restart in range(restarts):
        rng = np.random.default_rng((seed, restart))
        centers = _plus_plus_init(matrix, k, rng)
        labels, centers, inertia, history, iterations = _lloyd(
            matrix, centers.copy(), max_iter)
        if best is None or inertia < best.inertia - 1e-12:
            best = KMeansRun(assignments=labels, centroids=centers,
                             inertia=inertia, inertia_history=history,
                             n_iter=iterations)
    assert best is not None
    return best


def select_representatives(seq: SimplificationSequence,
                           features: Sequence[FeatureVector],
                           k: int = DEFAULT_K,
                           seed: int = DEFAULT_SEED) -> ClusteringResult:
    """Cluster frame features and pick each cluster's nearest frame.

    Effective k is min(k, frame count). Ties on distance go to the earlier
    step. Representatives come back ascending by step index.
    """
    if len(features) != len(seq.frames):
        raise AlignmentMismatch(
            f"{len(features)} feature vectors for {len(seq.frames)} frames")
    effective_k = min(k, len(seq.frames))
    run = kmeans(features, effective_k, seed=seed)
    matrix = _as_matrix(features)
    representatives = []
    for cluster in range(effective_k):
        members = np.flatnonzero(run.assignments == cluster)
        spreads = ((matrix[members] - run.centroids[cluster]) ** 2).sum(axis=1)
        # argmin returns the first minimum: the smallest frame index, which
        # is also the smallest step since frames are stored in step order.
        representatives.append(int(members[int(spreads.argmin())]))
    representatives.sort()
    return ClusteringResult(
        k=effective_k,
        assignments=tuple(int(a) for a in run.assignments),
        centroids=tuple(FeatureVector.from_array(c) for c in run.centroids),
        inertia=run.inertia,
        representatives=tuple(representatives),
    )


@dataclass
class ScatterExport:
    points: list[dict]               # {x, y, cluster, step}
    centroids: list[dict]            # {x, y}
    degenerate: bool = False

    def to_json(self) -> dict:
        return {"points": self.points, "centroids": self.centroids,
                "degenerate": self.degenerate}


def export_scatter(result: ClusteringResult,
                   features: Sequence[FeatureVector],
                   steps: Sequence[int] | None = None) -> ScatterExport:
    """Project features and centroids onto the top-2 principal components.

    Components are covariance eigenvectors of the mean-centered features,
    sign-fixed so each component's largest-magnitude loading is positive.
    Identical points cannot be projected; they export as zeros with the
    degenerate flag set.
    """
    matrix = _as_matrix(features)
    n, dims = matrix.shape
    if n < 2:
        raise ValueError("scatter export needs at least 2 points")
    if steps is None:
        steps = list(range(n))
    if len(steps) != n:
        raise AlignmentMismatch(f"{len(steps)} steps for {n} points")
    center_matrix = np.array([c.values for c in result.centroids], dtype=np.float64)
    if np.allclose(matrix, matrix[0]):
        zero_points = [{"x": 0.0, "y": 0.0, "cluster": int(c), "step": int(s)}
                       for c, s in zip(result.assignments, steps)]
        zero_centroids = [{"x": 0.0, "y": 0.0}] * center_matrix.shape[0]
        return ScatterExport(points=zero_points, centroids=zero_centroids,
                             degenerate=True)
    mean = matrix.mean(axis=0)
    centered = matrix - mean
    covariance = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    components = eigenvectors[:, order[:2]].T
    if components.shape[0] < 2:
        components = np.vstack([components, np.zeros((2 - components.shape[0], dims))])
    for i in range(2):
        loading = components[i]
        largest = int(np.abs(loading).argmax())
        if loading[largest] < 0:
            components[i] = -loading
    projected = centered @ components.T
    centroid_projected = (center_matrix - mean) @ components.T
    points = [
        {"x": float(x), "y": float(y), "cluster": int(c), "step": int(s)}
        for (x, y), c, s in zip(projected, result.assignments, steps)
    ]
    centroids = [{"x": float(x), "y": float(y)} for x, y in centroid_projected]
    return ScatterExport(points=points, centroids=centroids)
