"""End-to-end runs: ingest, operator construction, solve, predict, score."""
from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy.sparse.linalg import aslinearoperator

from . import evaluation
from .graph import graph_laplacian, graph_propagation_matrix, knn_gaussian_graph
from .hypergraph import LaplacianKind, laplacian, propagation_matrix
from .partition import WeightingRule, ensemble_hypergraph
from .solvers import (
    Mode,
    SolverConfig,
    initial_labels,
    predict,
    propagate_iterative,
    solve_propagation_closed,
    solve_unnormalized,
)

log = logging.getLogger(__name__)

METHODS = {
    "hyper-unnorm": ("hyper", LaplacianKind.UNNORMALIZED),
    "hyper-rw": ("hyper", LaplacianKind.RANDOM_WALK),
    "hyper-sym": ("hyper", LaplacianKind.SYMMETRIC),
    "graph-unnorm": ("graph", LaplacianKind.UNNORMALIZED),
    "graph-rw": ("graph", LaplacianKind.RANDOM_WALK),
    "graph-sym": ("graph", LaplacianKind.SYMMETRIC),
}

# Row order of the comparison table (graph baselines first, as in the
# published comparison).
TABLE_ORDER = ["graph-unnorm", "graph-rw", "graph-sym",
               "hyper-unnorm", "hyper-rw", "hyper-sym"]


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    method: str = "hyper-sym"
    mode: str = "closed"
    alpha: float = 0.96
    gamma: float = 1.0
    tol: float = 1e-10
    max_iter: int = 10_000
    clusters: int = 250
    clusterings: int = 1
    kmeans_max_iter: int = 300
    weighting: str = "unit"
    knn: int = 10
    bandwidth: float | str = "auto"
    seed: int = 0
    classes: int | None = None
    features: str | None = None
    labels: str | None = None
    truth: str | None = None
    out_dir: str | None = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}; choose from {sorted(METHODS)}")
        Mode(self.mode)
        WeightingRule(self.weighting)
        self.solver_config()
        family, _ = METHODS[self.method]
        if family == "hyper" and (self.clusters < 2 or self.clusterings < 1):
            raise InputError("hypergraph methods need clusters >= 2 and clusterings >= 1")
        if family == "graph":
            if self.knn < 1:
                raise InputError("graph methods need knn >= 1")
            if not isinstance(self.bandwidth, str) and not self.bandwidth > 0:
                raise InputError("bandwidth must be positive or 'auto'")
        if self.classes is not None and self.classes < 1:
            raise InputError("classes must be positive")

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(alpha=self.alpha, gamma=self.gamma, tolerance=self.tol,
                                max_iterations=self.max_iter, mode=Mode(self.mode))
        except ValueError as exc:
            raise InputError(str(exc)) from exc


@dataclass
class RunResult:
    spec: RunSpec
    estimate: np.ndarray
    classes: np.ndarray
    metrics: dict[str, Any]
    counts: evaluation.ConfusionCounts | None = None
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.metrics["solver"]["converged"])

    @property
    def micro_q(self) -> float | None:
        ev = self.metrics.get("evaluation")
        return ev["micro_q"] if ev else None

    def predictions_csv(self) -> str:
        c = self.estimate.shape[1]
        lines = ["sample_index,argmax_class," + ",".join(f"f_{j}" for j in range(c))]
        for i, (cls, row) in enumerate(zip(self.classes, self.estimate)):
            lines.append(f"{i},{int(cls)}," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def metrics_json(self) -> str:
        return json.dumps(self.metrics, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        pred = out / "predictions.csv"
        met = out / "metrics.json"
        pred.write_text(self.predictions_csv())
        met.write_text(self.metrics_json())
        (out / "timing.json").write_text(json.dumps(self.timing, indent=2, sort_keys=True) + "\n")
        return pred, met


def read_features(path: str | Path) -> np.ndarray:
    """One sample per line, comma-separated reals of uniform width."""
    rows, width = [], None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not s.strip() for s in rec):
                continue
            try:
                vals = [float(s) for s in rec]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric field") from None
            if not all(np.isfinite(vals)):
                raise InputError(f"{path}:{lineno}: non-finite value")
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise InputError(f"{path}:{lineno}: ragged row ({len(vals)} fields, expected {width})")
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no feature rows")
    return np.asarray(rows, dtype=np.float64)


def read_labels(path: str | Path, n: int) -> list[tuple[int, int]]:
    """Lines of ``sample_index,class_index``; duplicates and bad indices rejected."""
    pairs, seen = [], {}
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not s.strip() for s in rec):
                continue
            if len(rec) != 2:
                raise InputError(f"{path}:{lineno}: expected 'sample_index,class_index'")
            try:
                i, j = int(rec[0]), int(rec[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer field") from None
            if not 0 <= i < n:
                raise InputError(f"{path}:{lineno}: sample index {i} out of range [0, {n})")
            if j < 0:
                raise InputError(f"{path}:{lineno}: negative class index {j}")
            if i in seen:
                raise InputError(f"{path}:{lineno}: duplicate label for sample {i} (first on line {seen[i]})")
            seen[i] = lineno
            pairs.append((i, j))
    return pairs


def ingest(features: str | Path, labels: str | Path):
    x = read_features(features)
    return x, read_labels(labels, x.shape[0])


def _config_echo(spec: RunSpec, c: int) -> dict:
    cfg = dataclasses.asdict(spec)
    cfg["classes"] = c
    for key in ("features", "labels", "truth", "out_dir"):
        cfg.pop(key)
    return cfg


def run_arrays(x: np.ndarray, label_pairs: Sequence[tuple[int, int]], spec: RunSpec,
               truth_pairs: Sequence[tuple[int, int]] | None = None) -> RunResult:
    """Run one method on in-memory features and labels."""
    spec.validate()
    cfg = spec.solver_config()
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    all_classes = [j for _, j in label_pairs] + [j for _, j in (truth_pairs or [])]
    c = spec.classes if spec.classes is not None else (max(all_classes) + 1 if all_classes else 1)
    if all_classes and max(all_classes) >= c:
        raise InputError(f"class index {max(all_classes)} out of range for {c} classes")
    try:
        y = initial_labels(label_pairs, n, c)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    warnings = []
    if y.labeled_count == 0:
        warnings.append("no labeled samples: every prediction is zero-confidence")
        log.warning(warnings[-1])

    timing = {}
    t0 = time.perf_counter()
    family, kind = METHODS[spec.method]
    structure: dict[str, Any] = {}
    if family == "hyper":
        try:
            g, parts = ensemble_hypergraph(x, spec.clusters, seed=spec.seed, runs=spec.clusterings,
                                           max_iter=spec.kmeans_max_iter, weighting=spec.weighting)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        structure = {
            "type": "hypergraph",
            "vertices": g.n,
            "hyperedges": g.m,
            "clusters_requested": spec.clusters,
            "clusters_dissolved": [p.dissolved for p in parts],
            "kmeans_iterations": [p.iterations for p in parts],
            "kmeans_converged": [p.converged for p in parts],
            "kmeans_inertia": [p.inertia for p in parts],
        }
        if any(p.dissolved for p in parts):
            warnings.append("k-means produced clusters with fewer than 2 members; they were dissolved")
        build_lap = lambda: laplacian(g, kind)
        build_s = lambda: propagation_matrix(g, kind)
    else:
        try:
            wg = knn_gaussian_graph(x, spec.knn, spec.bandwidth)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        structure = {
            "type": "graph",
            "vertices": wg.n,
            "edges": int(wg.affinity.nnz // 2),
            "bandwidth": wg.bandwidth,
        }
        build_lap = lambda: graph_laplacian(wg, kind)
        build_s = lambda: graph_propagation_matrix(wg, kind)
    timing["structure_seconds"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if kind is LaplacianKind.UNNORMALIZED:
        lap = build_lap()
        if cfg.mode is Mode.ITERATIVE:
            lap = aslinearoperator(lap)
        est = solve_unnormalized(lap, y, cfg.gamma)
    else:
        s = build_s()
        if cfg.mode is Mode.ITERATIVE:
            est = propagate_iterative(s, y, cfg)
        else:
            est = solve_propagation_closed(s, y, cfg.alpha,
                                           symmetric=kind is LaplacianKind.SYMMETRIC)
    timing["solve_seconds"] = time.perf_counter() - t0
    if not est.converged:
        warnings.append("solver did not converge")

    pred = predict(est)
    metrics: dict[str, Any] = {
        "config": _config_echo(spec, c),
        "n": n,
        "features": int(x.shape[1]),
        "labeled": y.labeled_count,
        "structure": structure,
        "solver": {
            "method": est.method,
            "iterations": est.iterations,
            "residual": est.residual,
            "converged": est.converged,
        },
        "zero_confidence": int(pred.zero_confidence.sum()),
        "warnings": warnings,
    }
    counts = None
    if truth_pairs is not None:
        idx = np.array([i for i, _ in truth_pairs], dtype=np.int64)
        true = np.array([j for _, j in truth_pairs], dtype=np.int64)
        counts = evaluation.confusion(pred.classes[idx] if idx.size else idx, true, c)
        metrics["evaluation"] = {
            "scored": int(idx.size),
            "micro_q": evaluation.sensitivity(counts),
            "macro_q": evaluation.macro_sensitivity(counts),
            "per_class_q": evaluation.per_class_sensitivity(counts),
            "counts": counts.to_dict(),
        }
    return RunResult(spec, est.values, pred.classes, metrics, counts, timing)


def run(spec: RunSpec) -> RunResult:
    """File-driven run; writes predictions, metrics and timing to ``spec.out_dir``."""
    spec.validate()
    if not spec.features or not spec.labels:
        raise InputError("--features and --labels are required")
    x, pairs = ingest(spec.features, spec.labels)
    truth = read_labels(spec.truth, x.shape[0]) if spec.truth else None
    result = run_arrays(x, pairs, spec, truth)
    if spec.out_dir:
        result.write(spec.out_dir)
    return result


@dataclass
class SweepResult:
    cells: list[dict[str, Any]]
    rows: list[evaluation.ReportRow]
    failures: list[dict[str, Any]]
    results: list[RunResult | None]

    @property
    def best(self) -> evaluation.ReportRow | None:
        scored = [r for r in self.rows if r.micro_q is not None]
        # first maximum in grid order
        return max(scored, key=lambda r: r.micro_q) if scored else None

    def table(self) -> str:
        text = evaluation.format_table(self.rows)
        if self.best is not None:
            text += f"best: {self.best.method} ({100 * self.best.micro_q:.2f})\n"
        for f in self.failures:
            text += f"failed: {f['cell']}: {f['error']}\n"
        return text

    def json(self) -> str:
        best = self.best
        return evaluation.report_json(
            self.rows,
            best=None if best is None else best.method,
            failures=self.failures,
            cells=self.cells,
        )


def _cell_name(cell: dict[str, Any]) -> str:
    if list(cell) == ["method"]:
        return str(cell["method"])
    return ",".join(f"{k}={v}" for k, v in cell.items())


def sweep(x, label_pairs, truth_pairs, base: RunSpec, grid: dict[str, Sequence[Any]]) -> SweepResult:
    """Run every cell of the Cartesian ``grid`` over ``RunSpec`` fields, in grid order."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise InputError("parameter grid must be non-empty")
    names = set(f.name for f in dataclasses.fields(RunSpec))
    unknown = set(grid) - names
    if unknown:
        raise InputError(f"unknown grid parameters: {sorted(unknown)}")
    keys = list(grid)
    cells, rows, failures, results = [], [], [], []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cell = dict(zip(keys, combo))
        cells.append(cell)
        name = _cell_name(cell)
        try:
            res = run_arrays(x, label_pairs, dataclasses.replace(base, **cell), truth_pairs)
        except Exception as exc:  # one bad cell must not abort the grid
            failures.append({"cell": name, "error": f"{type(exc).__name__}: {exc}"})
            results.append(None)
            continue
        results.append(res)
        if res.counts is not None:
            rows.append(evaluation.comparison_report([(name, res.counts)])[0])
        else:
            rows.append(evaluation.ReportRow(name, None, None, 0))
    return SweepResult(cells, rows, failures, results)
