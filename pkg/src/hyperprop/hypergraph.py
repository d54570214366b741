"""Hypergraph data model, degrees, Laplacians and propagation matrices.

The incidence structure is kept sparse. Laplacians are materialized as dense
arrays up to ``DENSE_CAP`` vertices; above that they are returned as
``scipy.sparse.linalg.LinearOperator`` objects applied matrix-free.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator

DENSE_CAP = 10_000


class LaplacianKind(enum.Enum):
    UNNORMALIZED = "unnormalized"
    SYMMETRIC = "symmetric"
    RANDOM_WALK = "random_walk"


class InvalidHypergraph(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Weighted hypergraph given by a 0/1 incidence matrix.

    Parameters
    ----------
    incidence : scipy.sparse matrix or array-like, shape (n, m)
        ``incidence[v, e] == 1`` iff vertex ``v`` belongs to hyperedge ``e``.
    weights : array-like, shape (m,)
        Strictly positive hyperedge weights.
    """

    incidence: sparse.csc_matrix
    weights: np.ndarray

    def __post_init__(self):
        h = sparse.csc_matrix(self.incidence, dtype=np.float64)
        h.eliminate_zeros()
        if h.nnz and not np.all(h.data == 1.0):
            raise InvalidHypergraph("incidence entries must be 0 or 1")
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        n, m = h.shape
        if n < 1 or m < 1:
            raise InvalidHypergraph("hypergraph needs at least one vertex and one hyperedge")
        if w.shape != (m,):
            raise InvalidHypergraph(f"expected {m} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidHypergraph("hyperedge weights must be finite and strictly positive")
        sizes = np.asarray(h.sum(axis=0)).ravel()
        if np.any(sizes < 2):
            bad = np.flatnonzero(sizes < 2)
            raise InvalidHypergraph(f"hyperedges with fewer than 2 vertices: {bad.tolist()[:10]}")
        memberships = np.asarray(h.sum(axis=1)).ravel()
        if np.any(memberships < 1):
            bad = np.flatnonzero(memberships < 1)
            raise InvalidHypergraph(f"vertices in no hyperedge: {bad.tolist()[:10]}")
        w.setflags(write=False)
        object.__setattr__(self, "incidence", h)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Sequence[int]],
        n: int,
        weights: Sequence[float] | None = None,
    ) -> "Hypergraph":
        """Build from a list of vertex sets (0-based)."""
        edges = [sorted(set(int(v) for v in e)) for e in edges]
        rows = [v for e in edges for v in e]
        cols = [j for j, e in enumerate(edges) for _ in e]
        h = sparse.csc_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, len(edges))
        )
        if weights is None:
            weights = np.ones(len(edges))
        return cls(h, np.asarray(weights, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.incidence.shape[0]

    @property
    def m(self) -> int:
        return self.incidence.shape[1]

    def edges(self) -> list[np.ndarray]:
        h = self.incidence
        return [h.indices[h.indptr[j]:h.indptr[j + 1]] for j in range(self.m)]


@dataclass(frozen=True)
class DegreeData:
    vertex_degrees: np.ndarray
    hyperedge_degrees: np.ndarray


def compute_degrees(g: Hypergraph) -> DegreeData:
    """Vertex degrees ``d(v) = sum_e w(e) h(v,e)`` and hyperedge sizes ``d(e)``."""
    h = g.incidence
    dv = np.asarray(h @ g.weights).ravel()
    de = np.diff(h.indptr).astype(np.int64)
    if np.any(dv <= 0) or np.any(de == 0):
        raise InvalidHypergraph("all-zero incidence row or column")
    return DegreeData(dv, de)


def _adjacency_sparse(g: Hypergraph) -> sparse.csr_matrix:
    """``H W D_e^{-1} H^T`` as a sparse matrix."""
    deg = compute_degrees(g)
    scale = sparse.diags(g.weights / deg.hyperedge_degrees)
    return (g.incidence @ scale @ g.incidence.T).tocsr()


def _adjacency_operator(g: Hypergraph) -> LinearOperator:
    deg = compute_degrees(g)
    h = g.incidence
    ht = h.T.tocsr()
    scale = g.weights / deg.hyperedge_degrees

    def matvec(x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return h @ (scale * (ht @ x))
        return h @ (scale[:, None] * (ht @ x))

    return LinearOperator((g.n, g.n), matvec=matvec, matmat=matvec,
                          rmatvec=matvec, dtype=np.float64)


def _scaled(a, left: np.ndarray, right: np.ndarray):
    """``diag(left) @ a @ diag(right)`` for a sparse matrix or operator."""
    if isinstance(a, LinearOperator):
        def mv(x):
            x = np.asarray(x, dtype=np.float64)
            if x.ndim == 1:
                return left * a.matvec(right * x)
            return left[:, None] * a.matmat(right[:, None] * x)

        def rmv(x):
            x = np.asarray(x, dtype=np.float64).ravel()
            return right * a.rmatvec(left * x)

        return LinearOperator(a.shape, matvec=mv, matmat=mv, rmatvec=rmv,
                              dtype=np.float64)
    return (sparse.diags(left) @ a @ sparse.diags(right)).tocsr()


def _propagation(g: Hypergraph, kind: LaplacianKind, matrix_free: bool):
    dv = compute_degrees(g).vertex_degrees
    a = _adjacency_operator(g) if matrix_free else _adjacency_sparse(g)
    ones = np.ones(g.n)
    if kind is LaplacianKind.RANDOM_WALK:
        return _scaled(a, 1.0 / dv, ones)
    if kind is LaplacianKind.SYMMETRIC:
        s = 1.0 / np.sqrt(dv)
        return _scaled(a, s, s)
    raise ValueError("the unnormalized Laplacian has no propagation matrix")


def _use_dense(n: int, dense: bool | None, cap: int) -> bool:
    return n <= cap if dense is None else dense


def _identity_minus(s):
    if isinstance(s, LinearOperator):
        return LinearOperator(
            s.shape,
            matvec=lambda x: np.asarray(x, dtype=np.float64) - s.matvec(x),
            matmat=lambda x: np.asarray(x, dtype=np.float64) - s.matmat(x),
            rmatvec=lambda x: np.asarray(x, dtype=np.float64) - s.rmatvec(x),
            dtype=np.float64,
        )
    return np.eye(s.shape[0]) - s


def propagation_matrix(
    g: Hypergraph,
    kind: LaplacianKind,
    dense: bool | None = None,
    dense_cap: int = DENSE_CAP,
):
    """Return ``S_rw = D_v^{-1} H W D_e^{-1} H^T`` or its symmetric form.

    ``S_sym = D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2}``. Raises ``ValueError`` for
    ``LaplacianKind.UNNORMALIZED``.
    """
    kind = LaplacianKind(kind)
    if kind is LaplacianKind.UNNORMALIZED:
        raise ValueError("the unnormalized Laplacian has no propagation matrix")
    if _use_dense(g.n, dense, dense_cap):
        s = _propagation(g, kind, matrix_free=False).toarray()
        if kind is LaplacianKind.SYMMETRIC:
            s = 0.5 * (s + s.T)
        return s
    return _propagation(g, kind, matrix_free=True)


def laplacian(
    g: Hypergraph,
    kind: LaplacianKind = LaplacianKind.UNNORMALIZED,
    dense: bool | None = None,
    dense_cap: int = DENSE_CAP,
):
    """Hypergraph Laplacian of the requested kind.

    Unnormalized: ``D_v - H W D_e^{-1} H^T``.
    Symmetric: ``I - D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2}``.
    Random walk: ``I - D_v^{-1} H W D_e^{-1} H^T``.

    Returns a dense ``ndarray`` when ``g.n <= dense_cap`` (or ``dense=True``),
    otherwise a matrix-free ``LinearOperator``.
    """
    kind = LaplacianKind(kind)
    use_dense = _use_dense(g.n, dense, dense_cap)
    if kind is not LaplacianKind.UNNORMALIZED:
        return _identity_minus(propagation_matrix(g, kind, dense=use_dense))
    dv = compute_degrees(g).vertex_degrees
    if use_dense:
        lap = np.diag(dv) - _adjacency_sparse(g).toarray()
        return 0.5 * (lap + lap.T)
    a = _adjacency_operator(g)

    def mv(x):
        x = np.asarray(x, dtype=np.float64)
        d = dv if x.ndim == 1 else dv[:, None]
        return d * x - (a.matvec(x) if x.ndim == 1 else a.matmat(x))

    return LinearOperator((g.n, g.n), matvec=mv, matmat=mv, rmatvec=mv,
                          dtype=np.float64)


def quadratic_form_oracle(g: Hypergraph, f) -> float:
    """Evaluate the hyperedge smoothness functional by explicit summation.

    Computes ``1/2 * sum_e sum_{u,v in e} w(e)/d(e) * (f(u) - f(v))**2`` with
    the inner sum over ordered vertex pairs. Deliberately loops in Python so
    that it shares no code path with :func:`laplacian`.
    """
    f = np.asarray(f, dtype=np.float64).ravel()
    if f.shape != (g.n,):
        raise ValueError(f"f must have length {g.n}")
    total = 0.0
    for e, w in zip(g.edges(), g.weights):
        members = [int(v) for v in e]
        de = len(members)
        for u in members:
            for v in members:
                total += (w / de) * (f[u] - f[v]) ** 2
    return 0.5 * total
