"""k-means clustering and hypergraph construction from cluster assignments."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .hypergraph import Hypergraph, InvalidHypergraph

VARIANCE_EPS = 1e-9


class WeightingRule(enum.Enum):
    UNIT = "unit"
    INVERSE_VARIANCE = "inverse-variance"


@dataclass(frozen=True)
class ClusterAssignment:
    """Result of :func:`kmeans`.

    ``dissolved`` counts clusters removed by the singleton repair, so
    ``k == requested_k - dissolved``.
    """

    k: int
    assignment: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...] = ()
    iterations: int = 0
    converged: bool = True
    requested_k: int = 0
    dissolved: int = 0
    spread: np.ndarray = field(default=None, repr=False)


def _as_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("features must be a non-empty 2-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite values")
    return x


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    # Direct differences rather than the |x|^2 - 2xc + |c|^2 expansion, which
    # can go slightly negative and break exact ties.
    step = max(1, 2_000_000 // max(1, c.shape[0] * x.shape[1]))
    out = np.empty((x.shape[0], c.shape[0]))
    for i in range(0, x.shape[0], step):
        out[i:i + step] = ((x[i:i + step, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    return out


def _plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    closest = ((x - x[idx[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        closest = np.minimum(closest, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[idx].copy()


def _update(x, labels, centroids):
    new = centroids.copy()
    for j in range(centroids.shape[0]):
        members = labels == j
        if members.any():
            new[j] = x[members].mean(axis=0)
    return new


def _inertia(x, labels, centroids) -> float:
    return float(((x - centroids[labels]) ** 2).sum())


def kmeans(x, k: int, seed: int = 0, max_iter: int = 300) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ seeding.

    After convergence every cluster with fewer than two members is dissolved
    and its points move to the nearest surviving centroid, so each returned
    cluster can serve as a hyperedge.

    Parameters
    ----------
    x : array-like, shape (n, d)
    k : int
        Requested number of clusters, ``2 <= k <= n // 2``.
    seed : int
        Seed for the k-means++ initialization.
    max_iter : int
        Cap on Lloyd iterations.
    """
    x = _as_features(x)
    n = x.shape[0]
    if n < 4:
        raise ValueError(f"k-means needs at least 4 samples, got {n}")
    if not 2 <= k <= n // 2:
        raise ValueError(f"k must lie in [2, {n // 2}] for n={n}, got {k}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")

    rng = np.random.default_rng(seed)
    centroids = _plus_plus(x, k, rng)
    labels = np.argmin(_sq_dists(x, centroids), axis=1)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        centroids = _update(x, labels, centroids)
        history.append(_inertia(x, labels, centroids))
        new_labels = np.argmin(_sq_dists(x, centroids), axis=1)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    sizes = np.bincount(labels, minlength=k)
    keep = np.flatnonzero(sizes >= 2)
    if keep.size == 0:
        raise ValueError("no cluster with at least two members survived")
    dissolved = k - keep.size
    if dissolved:
        orphans = np.flatnonzero(sizes[labels] < 2)
        nearest = np.argmin(_sq_dists(x[orphans], centroids[keep]), axis=1)
        remap = np.full(k, -1)
        remap[keep] = np.arange(keep.size)
        labels = remap[labels]
        labels[orphans] = nearest
        centroids = _update(x, labels, centroids[keep])

    labels = labels.astype(np.int64)
    spread = np.array([
        ((x[labels == j] - centroids[j]) ** 2).sum(axis=1).mean()
        for j in range(keep.size)
    ])
    return ClusterAssignment(
        k=int(keep.size),
        assignment=labels,
        centroids=centroids,
        inertia=_inertia(x, labels, centroids),
        inertia_history=tuple(history),
        iterations=it,
        converged=converged,
        requested_k=k,
        dissolved=int(dissolved),
        spread=spread,
    )


def hyperedge_weights(a: ClusterAssignment, weighting=WeightingRule.UNIT) -> np.ndarray:
    weighting = WeightingRule(weighting)
    if weighting is WeightingRule.UNIT:
        return np.ones(a.k)
    if a.spread is None:
        raise ValueError("inverse-variance weighting needs per-cluster spread")
    return 1.0 / (VARIANCE_EPS + np.asarray(a.spread, dtype=np.float64))


def build_hypergraph(a: ClusterAssignment, weighting=WeightingRule.UNIT) -> Hypergraph:
    """One hyperedge per cluster; ``h(v, e) = 1`` iff sample ``v`` is in cluster ``e``.

    With the inverse-variance rule the weight of a cluster is
    ``1 / (eps + mean squared distance to its centroid)``.
    """
    labels = np.asarray(a.assignment, dtype=np.int64)
    n = labels.size
    sizes = np.bincount(labels, minlength=a.k)
    if sizes.size != a.k or np.any(sizes < 2):
        raise InvalidHypergraph("every cluster must hold at least two samples")
    h = sparse.csc_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, a.k))
    return Hypergraph(h, hyperedge_weights(a, weighting))


def ensemble_hypergraph(
    x, k: int, seed: int = 0, runs: int = 1, max_iter: int = 300,
    weighting=WeightingRule.UNIT,
) -> tuple[Hypergraph, list[ClusterAssignment]]:
    """Stack the hyperedges of ``runs`` k-means clusterings seeded ``seed, seed+1, ...``.

    ``runs=1`` is exactly ``build_hypergraph(kmeans(x, k, seed))``. With more
    runs the hyperedges overlap and labels can flow between clusters.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    parts = [kmeans(x, k, seed=seed + r, max_iter=max_iter) for r in range(runs)]
    graphs = [build_hypergraph(p, weighting) for p in parts]
    if runs == 1:
        return graphs[0], parts
    h = sparse.hstack([g.incidence for g in graphs]).tocsc()
    w = np.concatenate([g.weights for g in graphs])
    return Hypergraph(h, w), parts
