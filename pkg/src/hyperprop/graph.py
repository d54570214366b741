"""Pairwise kNN graph baselines built from the same feature vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .hypergraph import DENSE_CAP, LaplacianKind


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric nonnegative affinity with zero diagonal and no isolated vertex."""

    affinity: sparse.csr_matrix
    bandwidth: float = float("nan")

    def __post_init__(self):
        a = sparse.csr_matrix(self.affinity, dtype=np.float64)
        a.eliminate_zeros()
        if a.shape[0] != a.shape[1]:
            raise ValueError("affinity must be square")
        if a.nnz and (np.any(a.data < 0) or not np.all(np.isfinite(a.data))):
            raise ValueError("affinity must be finite and nonnegative")
        if a.diagonal().any():
            raise ValueError("affinity must have a zero diagonal")
        if (a - a.T).count_nonzero():
            raise ValueError("affinity must be exactly symmetric")
        if np.any(self._deg(a) <= 0):
            raise ValueError("graph has a zero-degree vertex")
        object.__setattr__(self, "affinity", a)

    @staticmethod
    def _deg(a):
        return np.asarray(a.sum(axis=1)).ravel()

    @property
    def n(self) -> int:
        return self.affinity.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self._deg(self.affinity)


def knn_gaussian_graph(x, k_neighbors: int = 10, bandwidth: float | str = "auto") -> WeightedGraph:
    """Gaussian-weighted kNN graph, symmetrized by elementwise max.

    ``affinity[i, j] = exp(-|x_i - x_j|^2 / (2 sigma^2))`` when ``j`` is among
    the ``k_neighbors`` nearest neighbours of ``i`` or vice versa. With
    ``bandwidth="auto"`` sigma is the median of the retained kNN distances.
    Neighbour ties are broken by lower index.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k_neighbors < n:
        raise ValueError(f"k_neighbors must lie in [1, {n - 1}], got {k_neighbors}")

    dist, idx = cKDTree(x).query(x, k=min(n, k_neighbors + 1))
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    rows, cols, d = [], [], []
    for i in range(n):
        # stable order on (distance, index) so ties resolve to the lower index
        order = np.lexsort((idx[i], dist[i]))
        picked = [j for j in order if idx[i, j] != i][:k_neighbors]
        rows.extend([i] * len(picked))
        cols.extend(idx[i, picked].tolist())
        d.extend(dist[i, picked].tolist())
    d = np.asarray(d)

    if isinstance(bandwidth, str):
        if bandwidth.lower() != "auto":
            raise ValueError(f"unknown bandwidth {bandwidth!r}")
        sigma = float(np.median(d))
        if sigma <= 0:
            nz = d[d > 0]
            sigma = float(nz.mean()) if nz.size else 1.0
    else:
        sigma = float(bandwidth)
        if not sigma > 0:
            raise ValueError("bandwidth must be positive")

    vals = np.exp(-(d ** 2) / (2.0 * sigma ** 2))
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    a = a.maximum(a.T).tocsr()
    return WeightedGraph(a, bandwidth=sigma)


def graph_laplacian(g: WeightedGraph, kind=LaplacianKind.UNNORMALIZED,
                    dense: bool | None = None, dense_cap: int = DENSE_CAP):
    """``D - A``, ``I - D^{-1/2} A D^{-1/2}`` or ``I - D^{-1} A``.

    Dense ``ndarray`` up to ``dense_cap`` vertices, sparse CSR above.
    """
    kind = LaplacianKind(kind)
    a = g.affinity
    d = g.degrees
    if kind is LaplacianKind.UNNORMALIZED:
        lap = sparse.diags(d) - a
    else:
        lap = sparse.identity(g.n, format="csr") - graph_propagation_matrix(g, kind, dense=False)
    use_dense = g.n <= dense_cap if dense is None else dense
    return lap.toarray() if use_dense else lap.tocsr()


def graph_propagation_matrix(g: WeightedGraph, kind: LaplacianKind,
                             dense: bool | None = None, dense_cap: int = DENSE_CAP):
    """``D^{-1} A`` (random walk) or ``D^{-1/2} A D^{-1/2}`` (symmetric)."""
    kind = LaplacianKind(kind)
    d = g.degrees
    if kind is LaplacianKind.RANDOM_WALK:
        s = sparse.diags(1.0 / d) @ g.affinity
    elif kind is LaplacianKind.SYMMETRIC:
        r = sparse.diags(1.0 / np.sqrt(d))
        s = r @ g.affinity @ r
        s = 0.5 * (s + s.T)
    else:
        raise ValueError("the unnormalized Laplacian has no propagation matrix")
    use_dense = g.n <= dense_cap if dense is None else dense
    return s.toarray() if use_dense else s.tocsr()
