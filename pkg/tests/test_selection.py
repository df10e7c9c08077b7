import numpy as np
import pytest

from iconix.backends.base import FeatureVector
from iconix.errors import AlignmentMismatch, InvalidK
from iconix.imaging import Raster
from iconix.selection import (
    ClusteringResult,
    export_scatter,
    kmeans,
    select_representatives,
)
from iconix.simplification import SimplificationSequence, Termination


def vectors(rows):
    return [FeatureVector(values=tuple(float(v) for v in row)) for row in rows]


def brute_force_optimal_inertia(points: np.ndarray, k: int) -> float:
    """Exact minimum within-cluster sum of squares over all partitions
    into at most k non-empty blocks (restricted growth enumeration with
    branch-and-bound: WCSS never decreases as points are added).

    Points are shifted to their global mean first: WCSS is translation
    invariant and the shift avoids cancellation in the sum-of-squares
    identity."""
    points = points - points.mean(axis=0)
    n = len(points)
    sq_norms = (points ** 2).sum(axis=1)
    best = [np.inf]
    counts = [0] * k
    sums = [np.zeros(points.shape[1]) for _ in range(k)]
    sumsq = [0.0] * k
    costs = [0.0] * k

    def recurse(i, used, total):
        if i == n:
            best[0] = min(best[0], total)
            return
        for c in range(min(used + 1, k)):
            old_cost = costs[c]
            counts[c] += 1
            sums[c] += points[i]
            sumsq[c] += sq_norms[i]
            new_cost = sumsq[c] - (sums[c] @ sums[c]) / counts[c]
            new_total = total - old_cost + new_cost
            if new_total < best[0]:
                costs[c] = new_cost
                recurse(i + 1, max(used, c + 1), new_total)
                costs[c] = old_cost
            counts[c] -= 1
            sums[c] -= points[i]
            sumsq[c] -= sq_norms[i]

    recurse(0, 0, 0.0)
    return float(best[0])


class TestKMeans:
    def test_k_one_centroid_is_mean(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(8, 3))
        run = kmeans(pts, 1, seed=1)
        assert np.allclose(run.centroids[0], pts.mean(axis=0))

    def test_k_equals_n_gives_zero_inertia(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(6, 2))
        run = kmeans(pts, 6, seed=1)
        assert run.inertia == pytest.approx(0.0, abs=1e-12)
        assert sorted(run.assignments.tolist()) == list(range(6))

    def test_three_separated_1d_clusters(self):
        rng = np.random.default_rng(2)
        pts = np.concatenate([
            rng.uniform(-0.1, 0.1, size=5),
            10 + rng.uniform(-0.1, 0.1, size=5),
            20 + rng.uniform(-0.1, 0.1, size=5),
        ]).reshape(-1, 1)
        run = kmeans(pts, 3, seed=3)
        centers = sorted(float(c[0]) for c in run.centroids)
        for center, target in zip(centers, (0.0, 10.0, 20.0)):
            assert abs(center - target) < 0.2
        groups = [set(np.flatnonzero(run.assignments == c)) for c in range(3)]
        assert sorted(map(tuple, (sorted(g) for g in groups))) == [
            tuple(range(0, 5)), tuple(range(5, 10)), tuple(range(10, 15))]
        assert run.inertia == pytest.approx(
            brute_force_optimal_inertia(pts, 3), rel=1e-7)

    def test_invalid_k(self):
        pts = np.zeros((4, 2))
        with pytest.raises(InvalidK):
            kmeans(pts, 0, seed=1)
        with pytest.raises(InvalidK):
            kmeans(pts, 5, seed=1)

    def test_inertia_history_non_increasing(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(30, 4))
        run = kmeans(pts, 5, seed=5)
        history = run.inertia_history
        assert all(a >= b - 1e-9 for a, b in zip(history, history[1:]))

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(20, 3))
        first = kmeans(pts, 4, seed=7)
        second = kmeans(pts, 4, seed=7)
        assert first.assignments.tobytes() == second.assignments.tobytes()
        assert first.centroids.tobytes() == second.centroids.tobytes()
        assert first.inertia == second.inertia

    def test_local_optimum_no_single_reassignment_improves(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(24, 2))
        run = kmeans(pts, 3, seed=9)
        for i in range(len(pts)):
            current = ((pts[i] - run.centroids[run.assignments[i]]) ** 2).sum()
            for c in range(3):
                alternative = ((pts[i] - run.centroids[c]) ** 2).sum()
                assert alternative >= current - 1e-9

    def test_duplicate_points_handled(self):
        pts = np.array([[1.0, 1.0]] * 5 + [[2.0, 2.0]] * 3)
        run = kmeans(pts, 2, seed=10)
        assert run.inertia == pytest.approx(0.0, abs=1e-12)

    def test_near_optimal_on_random_fixtures(self):
        rng = np.random.default_rng(11)
        for trial in range(10):
            n = int(rng.integers(5, 11))
            dims = int(rng.integers(1, 4))
            k = int(rng.integers(1, min(4, n) + 1))
            pts = rng.normal(size=(n, dims))
            run = kmeans(pts, k, seed=trial)
            optimal = brute_force_optimal_inertia(pts, k)
            assert run.inertia <= optimal * 1.05 + 1e-9


def make_sequence(n_frames):
    frames = [Raster.from_array(np.full((4, 4), min(255, i), dtype=np.uint8))
              for i in range(n_frames)]
    seq = SimplificationSequence(
        source=frames[0],
        frames=[(i * 3, frame) for i, frame in enumerate(frames)],
        checkpoints=[(5, 0.0)],
        terminated_by=Termination.MAX_STEPS,
    )
    # frames[0] must be (0, source); rebuild with the source at step 0
    seq.frames[0] = (0, frames[0])
    return seq


class TestSelectRepresentatives:
    def test_k_equals_frame_count_keeps_every_frame(self):
        seq = make_sequence(9)
        feats = vectors([[float(i), 0.0] for i in range(9)])
        result = select_representatives(seq, feats, k=9, seed=1)
        assert result.k == 9
        assert result.representatives == tuple(range(9))

    def test_effective_k_shrinks_to_frame_count(self):
        seq = make_sequence(4)
        feats = vectors([[float(i)] for i in range(4)])
        result = select_representatives(seq, feats, k=9, seed=1)
        assert result.k == 4

    def test_planted_blobs_pick_argmin_to_mean(self):
        rng = np.random.default_rng(12)
        centers = rng.uniform(-50, 50, size=(9, 4))
        frame_features = []
        owners = []
        for i in range(30):
            blob = i % 9
            owners.append(blob)
            frame_features.append(centers[blob] + rng.normal(scale=0.05, size=4))
        seq = make_sequence(30)
        feats = vectors(frame_features)
        result = select_representatives(seq, feats, k=9, seed=13)
        matrix = np.array(frame_features)
        expected = []
        for blob in range(9):
            members = [i for i in range(30) if owners[i] == blob]
            mean = matrix[members].mean(axis=0)
            expected.append(min(members,
                                key=lambda i: float(((matrix[i] - mean) ** 2).sum())))
        assert sorted(expected) == list(result.representatives)

    def test_representative_assignment_matches_own_cluster(self):
        seq = make_sequence(12)
        rng = np.random.default_rng(14)
        feats = vectors(rng.normal(size=(12, 3)))
        result = select_representatives(seq, feats, k=4, seed=15)
        for rep in result.representatives:
            cluster = result.assignments[rep]
            members = [i for i, a in enumerate(result.assignments) if a == cluster]
            assert rep in members

    def test_alignment_mismatch(self):
        seq = make_sequence(5)
        with pytest.raises(AlignmentMismatch):
            select_representatives(seq, vectors([[0.0]] * 4), k=2, seed=1)

    def test_inertia_recomputable(self):
        seq = make_sequence(10)
        rng = np.random.default_rng(16)
        raw = rng.normal(size=(10, 2))
        result = select_representatives(seq, vectors(raw), k=3, seed=17)
        centroids = np.array([c.values for c in result.centroids])
        recomputed = sum(
            float(((raw[i] - centroids[result.assignments[i]]) ** 2).sum())
            for i in range(10))
        assert abs(recomputed - result.inertia) <= 1e-9 * max(1.0, recomputed)


class TestExportScatter:
    def _result(self, assignments, centroids):
        return ClusteringResult(
            k=len(centroids), assignments=tuple(assignments),
            centroids=tuple(FeatureVector(values=tuple(c)) for c in centroids),
            inertia=0.0, representatives=tuple(range(len(centroids))))

    def test_axis_aligned_2d_projection_is_identity(self):
        pts = [(4.0, 0.0), (-4.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        result = self._result([0, 0, 1, 1], [(4.0, 0.0), (0.0, 1.0)])
        export = export_scatter(result, vectors(pts))
        assert not export.degenerate
        for source, point in zip(pts, export.points):
            assert point["x"] == pytest.approx(source[0], abs=1e-9)
            assert point["y"] == pytest.approx(source[1], abs=1e-9)

    def test_identical_points_degenerate(self):
        pts = [(1.0, 1.0)] * 5
        result = self._result([0] * 5, [(1.0, 1.0)])
        export = export_scatter(result, vectors(pts))
        assert export.degenerate
        assert all(p["x"] == 0.0 and p["y"] == 0.0 for p in export.points)

    def test_pc1_variance_at_least_pc2(self):
        rng = np.random.default_rng(18)
        for trial in range(5):
            raw = rng.normal(size=(12, 5)) * rng.uniform(0.5, 3.0, size=5)
            result = self._result([0] * 12, [raw.mean(axis=0).tolist()])
            export = export_scatter(result, vectors(raw))
            xs = np.array([p["x"] for p in export.points])
            ys = np.array([p["y"] for p in export.points])
            assert xs.var() >= ys.var() - 1e-12

    def test_steps_carried_through(self):
        pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]
        result = self._result([0, 1, 1], [(0.0, 0.0), (1.5, 0.75)])
        export = export_scatter(result, vectors(pts), steps=[0, 5, 10])
        assert [p["step"] for p in export.points] == [0, 5, 10]
        payload = export.to_json()
        assert set(payload) == {"points", "centroids", "degenerate"}

    def test_one_dimensional_features_pad_second_axis(self):
        pts = [(0.0,), (1.0,), (2.0,)]
        result = self._result([0, 0, 1], [(0.5,), (2.0,)])
        export = export_scatter(result, vectors(pts))
        assert all(p["y"] == 0.0 for p in export.points)
