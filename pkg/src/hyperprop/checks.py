"""Randomized invariant checks for Laplacians, propagation matrices and solvers.

Each check returns the worst error seen over all instances together with its
tolerance. The Laplacian builder is injectable so a deliberately corrupted
one can serve as a negative control.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import graph_laplacian, graph_propagation_matrix, knn_gaussian_graph
from .hypergraph import (
    Hypergraph,
    LaplacianKind,
    compute_degrees,
    laplacian,
    quadratic_form_oracle,
)
from .solvers import (
    Mode,
    SolverConfig,
    propagate_iterative,
    solve_propagation_closed,
    solve_sym_regularized,
    solve_unnormalized,
)

U, SYM, RW = LaplacianKind.UNNORMALIZED, LaplacianKind.SYMMETRIC, LaplacianKind.RANDOM_WALK


@dataclass
class CheckResult:
    name: str
    tolerance: float
    worst: float = 0.0
    instances: int = 0

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)

    def record(self, err: float) -> None:
        self.instances += 1
        if not np.isfinite(err):
            self.worst = float("inf")
        else:
            self.worst = max(self.worst, float(err))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} worst={self.worst:.3e}  tol={self.tolerance:.0e}"


def random_hypergraph(rng: np.random.Generator, max_n: int = 20, max_m: int = 8,
                      max_weight: float = 5.0) -> Hypergraph:
    """Random valid hypergraph: every hyperedge has >= 2 vertices and every
    vertex lies in some hyperedge. Weights are drawn from ``(0, max_weight]``."""
    n = int(rng.integers(3, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    edges = []
    for _ in range(m):
        size = int(rng.integers(2, n + 1))
        edges.append(set(rng.choice(n, size=size, replace=False).tolist()))
    for v in range(n):
        if not any(v in e for e in edges):
            edges[int(rng.integers(m))].add(v)
    weights = max_weight * (1.0 - rng.random(m))
    return Hypergraph.from_edges(edges, n, weights)


def reference_graph_laplacian(n: int, pairs, weights) -> np.ndarray:
    """Weighted graph Laplacian ``D - A`` assembled edge by edge."""
    lap = np.zeros((n, n))
    for (i, j), w in zip(pairs, weights):
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


LaplacianFn = Callable[[Hypergraph, LaplacianKind], np.ndarray]


def run_checks(n_instances: int = 100, seed: int = 0,
               laplacian_fn: LaplacianFn | None = None) -> list[CheckResult]:
    if n_instances < 1:
        raise ValueError("n_instances must be at least 1")
    lap_fn = laplacian_fn or (lambda g, kind: laplacian(g, kind, dense=True))
    rng = np.random.default_rng(seed)
    names = [
        ("quadratic form identity", 1e-10),
        ("PSD of L and L_sym", 1e-8),
        ("null vector of L", 1e-10),
        ("null vector of L_rw", 1e-10),
        ("null vector of L_sym", 1e-10),
        ("L_sym / L_rw spectra agree", 1e-8),
        ("generalized eigenproblem L u = lam D u", 1e-8),
        ("S_rw row sums", 1e-12),
        ("S_rw nonnegative", 0.0),
        ("S spectra within [-1, 1]", 1e-8),
        ("graph reduction (|e| = 2)", 1e-12),
        ("graph PSD and null vector", 1e-8),
        ("graph sym/rw spectra agree", 1e-8),
        ("graph D^-1 A row sums", 1e-12),
        ("iterative = closed form", 1e-6),
        ("regularization equivalence", 1e-8),
        ("unnormalized system residual", 1e-10),
        ("linearity in Y", 1e-10),
        ("class permutation equivariance", 1e-12),
        ("monotone tail of iteration", 0.0),
        ("slower convergence at larger alpha", 0.0),
    ]
    res = {name: CheckResult(name, tol) for name, tol in names}

    for _ in range(n_instances):
        g = random_hypergraph(rng)
        n = g.n
        dv = compute_degrees(g).vertex_degrees
        lap = lap_fn(g, U)
        lsym = lap_fn(g, SYM)
        lrw = lap_fn(g, RW)
        ones = np.ones(n)

        worst = 0.0
        for _ in range(10):
            f = rng.standard_normal(n)
            q = float(f @ lap @ f)
            worst = max(worst, abs(q - quadratic_form_oracle(g, f)) / (1 + abs(q)))
        res["quadratic form identity"].record(worst)

        lam_l = np.linalg.eigvalsh(0.5 * (lap + lap.T))
        lam_s, w = np.linalg.eigh(0.5 * (lsym + lsym.T))
        res["PSD of L and L_sym"].record(max(0.0, -lam_l.min(), -lam_s.min()))
        res["null vector of L"].record(_maxabs(lap @ ones))
        res["null vector of L_rw"].record(_maxabs(lrw @ ones))
        res["null vector of L_sym"].record(_maxabs(lsym @ np.sqrt(dv)))

        # eigenvectors of L_rw obtained through the similarity u = D^{-1/2} w
        u = w / np.sqrt(dv)[:, None]
        u /= np.linalg.norm(u, axis=0)
        res["L_sym / L_rw spectra agree"].record(_maxabs(lrw @ u - u * lam_s))
        res["generalized eigenproblem L u = lam D u"].record(
            _maxabs(lap @ u - (dv[:, None] * u) * lam_s))

        s_rw = np.eye(n) - lrw
        s_sym = np.eye(n) - lsym
        res["S_rw row sums"].record(_maxabs(s_rw.sum(axis=1) - 1.0))
        res["S_rw nonnegative"].record(max(0.0, -float(s_rw.min())))
        mu = np.linalg.eigvalsh(0.5 * (s_sym + s_sym.T))
        res["S spectra within [-1, 1]"].record(max(0.0, float(np.abs(mu).max()) - 1.0))

        # pair hypergraph vs independently assembled graph Laplacian
        pairs = sorted({tuple(sorted(rng.choice(n, 2, replace=False).tolist()))
                        for _ in range(2 * n)})
        covered = {v for p in pairs for v in p}
        pairs += [(v, (v + 1) % n) if v + 1 < n else (v - 1, v)
                  for v in range(n) if v not in covered]
        pw = 5.0 * (1.0 - rng.random(len(pairs)))
        pg = Hypergraph.from_edges(pairs, n, pw)
        res["graph reduction (|e| = 2)"].record(
            _maxabs(lap_fn(pg, U) - 0.5 * reference_graph_laplacian(n, pairs, pw)))

        pts = rng.standard_normal((n, 2))
        wg = knn_gaussian_graph(pts, k_neighbors=min(3, n - 1))
        gl = graph_laplacian(wg, U, dense=True)
        gsym = graph_laplacian(wg, SYM, dense=True)
        grw = graph_laplacian(wg, RW, dense=True)
        gl_eig = np.linalg.eigvalsh(gl)
        gs_eig, gw = np.linalg.eigh(gsym)
        res["graph PSD and null vector"].record(
            max(0.0, -gl_eig.min(), -gs_eig.min(), _maxabs(gl @ ones), _maxabs(grw @ ones)))
        gu = gw / np.sqrt(wg.degrees)[:, None]
        gu /= np.linalg.norm(gu, axis=0)
        res["graph sym/rw spectra agree"].record(_maxabs(grw @ gu - gu * gs_eig))
        res["graph D^-1 A row sums"].record(
            _maxabs(graph_propagation_matrix(wg, RW, dense=True).sum(axis=1) - 1.0))

        c = int(rng.integers(2, 5))
        y = rng.choice([-1.0, 0.0, 1.0], size=(n, c))
        y2 = rng.choice([-1.0, 0.0, 1.0], size=(n, c))
        worst = 0.0
        for alpha in (0.5, 0.96):
            cfg = SolverConfig(alpha=alpha, tolerance=1e-10, mode=Mode.ITERATIVE)
            for s in (s_rw, s_sym):
                it = propagate_iterative(s, y, cfg)
                cl = solve_propagation_closed(s, y, alpha)
                worst = max(worst, _maxabs(it.values - cl.values), 0.0 if it.converged else np.inf)
        res["iterative = closed form"].record(worst)

        worst = 0.0
        for gamma in (0.1, 1.0, 10.0):
            a = solve_sym_regularized(lsym, y, gamma).values
            b = solve_propagation_closed(s_sym, y, 1.0 / (1.0 + gamma)).values
            worst = max(worst, _maxabs(a - b))
        res["regularization equivalence"].record(worst)

        fu = solve_unnormalized(lap, y, 1.0).values
        res["unnormalized system residual"].record(_maxabs((lap + np.eye(n)) @ fu - y))

        lin = 0.0
        for solve in (lambda m: solve_unnormalized(lap, m, 1.0).values,
                      lambda m: solve_propagation_closed(s_rw, m, 0.96).values):
            lin = max(lin, _maxabs(solve(y + y2) - solve(y) - solve(y2)))
        res["linearity in Y"].record(lin)

        perm = rng.permutation(c)
        res["class permutation equivariance"].record(
            _maxabs(solve_propagation_closed(s_sym, y[:, perm], 0.9).values
                    - solve_propagation_closed(s_sym, y, 0.9).values[:, perm]))

        y1 = np.zeros((n, 1))
        y1[0] = 1.0
        slow = propagate_iterative(s_rw, y1, SolverConfig(alpha=0.96, mode=Mode.ITERATIVE))
        fast = propagate_iterative(s_rw, y1, SolverConfig(alpha=0.5, mode=Mode.ITERATIVE))
        tail = np.asarray(slow.history[-10:])
        res["monotone tail of iteration"].record(max(0.0, float(np.diff(tail).max(initial=0.0))))
        # ties happen when S is a projector (one hyperedge covering everything)
        res["slower convergence at larger alpha"].record(
            0.0 if fast.iterations <= slow.iterations else 1.0)

    return list(res.values())
