import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperprop.hypergraph import InvalidHypergraph, compute_degrees
from hyperprop.partition import (
    ClusterAssignment,
    WeightingRule,
    build_hypergraph,
    ensemble_hypergraph,
    kmeans,
)


def two_blobs(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 0.1, size=(10, 2))
    b = rng.normal(100.0, 0.1, size=(10, 2))
    return np.vstack([a, b]), np.repeat([0, 1], 10)


def brute_force_best_2_partition_cost(x):
    """Minimum k=2 inertia by trying every bipartition (tiny n only)."""
    n = x.shape[0]
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        sel = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        cost = sum(((x[s] - x[s].mean(axis=0)) ** 2).sum() for s in (sel, ~sel))
        best = min(best, cost)
    return best


class TestKMeans:
    def test_separated_blobs(self):
        x, truth = two_blobs()
        a = kmeans(x, 2, seed=3)
        assert a.k == 2
        # equal up to permutation of cluster ids
        assert len({(int(p), int(t)) for p, t in zip(a.assignment, truth)}) == 2

    def test_reaches_optimum_on_tiny_input(self):
        x = np.array([[0.0], [0.2], [0.4], [5.0], [5.1], [9.0], [9.3], [9.4]])
        a = kmeans(x, 2, seed=0)
        assert a.inertia == pytest.approx(brute_force_best_2_partition_cost(x), rel=1e-12)

    def test_identical_rows_repaired(self):
        x = np.ones((6, 3))
        a = kmeans(x, 2, seed=0)
        assert a.k == 1 and a.dissolved == 1
        np.testing.assert_array_equal(a.assignment, np.zeros(6))
        build_hypergraph(a)

    def test_paper_cluster_ratio(self):
        x = np.random.default_rng(0).standard_normal((500, 26))
        a = kmeans(x, 250, seed=0)
        assert np.bincount(a.assignment).min() >= 2
        assert a.k + a.dissolved == 250

    @pytest.mark.parametrize("n,k", [(3, 2), (10, 1), (10, 6)])
    def test_rejects_bad_k(self, n, k):
        with pytest.raises(ValueError):
            kmeans(np.arange(n, dtype=float)[:, None], k)

    def test_deterministic(self):
        x = np.random.default_rng(5).standard_normal((80, 4))
        a, b = kmeans(x, 7, seed=11), kmeans(x, 7, seed=11)
        np.testing.assert_array_equal(a.assignment, b.assignment)
        assert a.centroids.tobytes() == b.centroids.tobytes()
        assert a.inertia_history == b.inertia_history

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 10))
    def test_inertia_non_increasing_and_min_size(self, seed, k):
        x = np.random.default_rng(seed).standard_normal((40, 3))
        a = kmeans(x, k, seed=seed)
        h = np.asarray(a.inertia_history)
        assert np.all(np.diff(h) <= 1e-12 * h[0])
        assert np.bincount(a.assignment, minlength=a.k).min() >= 2
        assert a.inertia >= 0


class TestBuildHypergraph:
    def test_transcription(self):
        a = ClusterAssignment(k=2, assignment=np.array([0, 0, 1, 1]), centroids=np.zeros((2, 1)), inertia=0.0)
        g = build_hypergraph(a)
        np.testing.assert_array_equal(g.incidence.toarray(), [[1, 0], [1, 0], [0, 1], [0, 1]])
        np.testing.assert_array_equal(g.weights, [1, 1])

    def test_inverse_variance(self):
        a = ClusterAssignment(k=1, assignment=np.zeros(3, dtype=int), centroids=np.zeros((1, 1)),
                              inertia=0.75, spread=np.array([0.25]))
        g = build_hypergraph(a, WeightingRule.INVERSE_VARIANCE)
        assert g.weights[0] == pytest.approx(4.0, rel=1e-8)

    def test_partition_property(self):
        x = np.random.default_rng(2).standard_normal((60, 2))
        a = kmeans(x, 8, seed=2)
        for rule in WeightingRule:
            g = build_hypergraph(a, rule)
            h = g.incidence.toarray()
            np.testing.assert_array_equal(h.sum(axis=1), 1)
            np.testing.assert_allclose(compute_degrees(g).vertex_degrees, g.weights[a.assignment])

    def test_rejects_small_cluster(self):
        a = ClusterAssignment(k=2, assignment=np.array([0, 0, 1]), centroids=np.zeros((2, 1)), inertia=0.0)
        with pytest.raises(InvalidHypergraph):
            build_hypergraph(a)

    def test_ensemble_stacks_runs(self):
        x = np.random.default_rng(4).standard_normal((50, 2))
        g1, _ = ensemble_hypergraph(x, 5, seed=0, runs=1)
        g3, parts = ensemble_hypergraph(x, 5, seed=0, runs=3)
        assert g3.m == sum(p.k for p in parts)
        np.testing.assert_array_equal(g3.incidence[:, :g1.m].toarray(), g1.incidence.toarray())
        np.testing.assert_array_equal(g3.incidence.toarray().sum(axis=1), 3)
