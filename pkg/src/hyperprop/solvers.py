"""Label propagation on (hyper)graph operators: iterative and closed form."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, aslinearoperator, cg, gmres

KRYLOV_TOL = 1e-12


class Mode(enum.Enum):
    ITERATIVE = "iterative"
    CLOSED = "closed"


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.96
    gamma: float = 1.0
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    mode: Mode = Mode.CLOSED

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Initial label matrix ``Y`` in original sample order.

    Labeled rows hold ``+1`` for the sample's class and ``-1`` elsewhere;
    unlabeled rows are zero. ``permutation`` lists labeled samples first, so
    ``values[permutation]`` is the prefix layout with rows ``0..l-1`` labeled.
    """

    values: np.ndarray
    labeled: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]

    @property
    def labeled_count(self) -> int:
        return int(self.labeled.size)

    @property
    def permutation(self) -> np.ndarray:
        rest = np.setdiff1d(np.arange(self.n), self.labeled)
        return np.concatenate([self.labeled, rest]).astype(np.int64)

    def prefix_form(self) -> np.ndarray:
        return self.values[self.permutation]


@dataclass(frozen=True, eq=False)
class EstimateMatrix:
    values: np.ndarray
    method: str
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    history: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class Prediction:
    signs: np.ndarray
    classes: np.ndarray
    zero_confidence: np.ndarray


def initial_labels(assignments: Iterable[tuple[int, int]], n: int, c: int) -> LabelMatrix:
    """Build ``Y`` from ``(sample index, class index)`` pairs."""
    if n < 1 or c < 1:
        raise ValueError("n and c must be positive")
    y = np.zeros((n, c))
    seen: dict[int, int] = {}
    for i, j in assignments:
        i, j = int(i), int(j)
        if not 0 <= i < n:
            raise ValueError(f"sample index {i} out of range [0, {n})")
        if not 0 <= j < c:
            raise ValueError(f"class index {j} out of range [0, {c})")
        if i in seen:
            raise ValueError(f"sample {i} labeled more than once")
        seen[i] = j
        y[i] = -1.0
        y[i, j] = 1.0
    labeled = np.array(sorted(seen), dtype=np.int64)
    y.setflags(write=False)
    return LabelMatrix(y, labeled)


def _as_rhs(y) -> np.ndarray:
    v = y.values if isinstance(y, LabelMatrix) else np.asarray(y, dtype=np.float64)
    return v.reshape(-1, 1) if v.ndim == 1 else v


def _shape_check(a, y: np.ndarray):
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"operator must be square, got {a.shape}")
    if y.shape[0] != n:
        raise ValueError(f"label matrix has {y.shape[0]} rows, operator has {n}")


def _apply(a, x: np.ndarray) -> np.ndarray:
    if isinstance(a, LinearOperator):
        return np.column_stack([a.matvec(x[:, j]) for j in range(x.shape[1])]) if x.shape[1] else x.copy()
    return np.asarray(a @ x)


def _is_symmetric(a) -> bool:
    if isinstance(a, np.ndarray):
        return bool(np.array_equal(a, a.T))
    if sparse.issparse(a):
        return (a - a.T).count_nonzero() == 0
    return False


def _max_abs(x) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


def _solve(a, b: np.ndarray, symmetric: bool, label: str) -> tuple[np.ndarray, float, bool]:
    """Solve ``a @ x = b`` for every column of ``b``; return ``(x, residual, ok)``."""
    if isinstance(a, np.ndarray):
        kinds = ("pos", "gen") if symmetric else ("gen",)
        for kind in kinds:
            try:
                x = scipy.linalg.solve(a, b, assume_a=kind)
                break
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
                err = exc
        else:
            raise SolverError(f"{label}: singular system ({err})")
        res = _max_abs(a @ x - b)
        return x, res, True
    op = aslinearoperator(a)
    cols, ok = [], True
    for j in range(b.shape[1]):
        rhs = b[:, j]
        if not rhs.any():
            cols.append(np.zeros_like(rhs))
            continue
        if symmetric:
            sol, info = cg(op, rhs, rtol=0.0, atol=KRYLOV_TOL, maxiter=10 * op.shape[0])
        else:
            sol, info = gmres(op, rhs, rtol=0.0, atol=KRYLOV_TOL, restart=50,
                              maxiter=10 * op.shape[0])
        ok = ok and info == 0
        cols.append(sol)
    x = np.column_stack(cols) if cols else np.zeros_like(b)
    res = _max_abs(_apply(op, x) - b)
    return x, res, ok


def _shifted(a, scale: float, shift: float):
    """``scale * a + shift * I`` for dense, sparse or matrix-free ``a``."""
    n = a.shape[0]
    if isinstance(a, np.ndarray):
        return scale * a + shift * np.eye(n)
    if sparse.issparse(a):
        return (scale * a + shift * sparse.identity(n)).tocsr()
    op = aslinearoperator(a)

    def mv(x):
        x = np.asarray(x, dtype=np.float64).ravel()
        return scale * op.matvec(x) + shift * x

    return LinearOperator((n, n), matvec=mv, dtype=np.float64)


def propagate_iterative(s, y, cfg: SolverConfig = SolverConfig(mode=Mode.ITERATIVE)) -> EstimateMatrix:
    """Run ``F <- alpha S F + (1 - alpha) Y`` from ``F = Y`` until the max-abs
    change between iterates drops to ``cfg.tolerance``.

    Non-convergence within ``cfg.max_iterations`` is reported through
    ``converged=False`` rather than raised.
    """
    y = _as_rhs(y)
    _shape_check(s, y)
    alpha = cfg.alpha
    base = (1.0 - alpha) * y
    f = y.copy()
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        nxt = alpha * _apply(s, f) + base
        change = _max_abs(nxt - f)
        history.append(change)
        f = nxt
        if change <= cfg.tolerance:
            converged = True
            break
    return EstimateMatrix(f, "iterative", iterations=it,
                          residual=history[-1] if history else 0.0,
                          converged=converged, history=tuple(history))


def solve_propagation_closed(s, y, alpha: float, symmetric: bool | None = None) -> EstimateMatrix:
    """Closed-form limit ``(1 - alpha) (I - alpha S)^{-1} Y``.

    Solved as the linear system ``(I - alpha S) F = (1 - alpha) Y``: dense
    factorization for arrays, CG (symmetric ``S``) or GMRES otherwise.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    y = _as_rhs(y)
    _shape_check(s, y)
    sym = _is_symmetric(s) if symmetric is None else symmetric
    a = _shifted(s, -alpha, 1.0)
    f, res, ok = _solve(a, (1.0 - alpha) * y, sym, "propagation")
    return EstimateMatrix(f, "closed-propagation", residual=res, converged=ok)


def solve_unnormalized(lap, y, gamma: float) -> EstimateMatrix:
    """``gamma (L + gamma I)^{-1} Y`` via the SPD system ``(L + gamma I) F = gamma Y``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    y = _as_rhs(y)
    _shape_check(lap, y)
    a = _shifted(lap, 1.0, gamma)
    f, res, ok = _solve(a, gamma * y, True, "unnormalized")
    return EstimateMatrix(f, "closed-unnormalized", residual=res, converged=ok)


def solve_sym_regularized(lap_sym, y, gamma: float) -> EstimateMatrix:
    """``gamma (L_sym + gamma I)^{-1} Y``.

    Identical to :func:`solve_propagation_closed` on ``S_sym = I - L_sym``
    with ``alpha = 1 / (1 + gamma)``.
    """
    est = solve_unnormalized(lap_sym, y, gamma)
    return EstimateMatrix(est.values, "closed-sym-regularized",
                          residual=est.residual, converged=est.converged)


def predict(f) -> Prediction:
    """Per-class signs and the argmax class of each row (ties -> lowest index)."""
    v = f.values if isinstance(f, EstimateMatrix) else np.asarray(f, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if not np.all(np.isfinite(v)):
        raise ValueError("estimate matrix contains non-finite values")
    signs = np.sign(v).astype(np.int64)
    classes = np.argmax(v, axis=1).astype(np.int64) if v.shape[1] else np.zeros(v.shape[0], np.int64)
    zero = ~np.any(v != 0, axis=1)
    return Prediction(signs, classes, zero)
