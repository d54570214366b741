"""One-vs-rest confusion counts, sensitivity and comparison tables."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ConfusionCounts:
    """Per-class one-vs-rest tallies; arrays of length ``c``."""

    tp: np.ndarray
    fn: np.ndarray
    fp: np.ndarray
    tn: np.ndarray

    @property
    def c(self) -> int:
        return self.tp.size

    @property
    def total(self) -> dict[str, int]:
        return {k: int(getattr(self, k).sum()) for k in ("tp", "fn", "fp", "tn")}

    def to_dict(self) -> dict:
        return {
            "per_class": [
                {"class": j, "tp": int(self.tp[j]), "fn": int(self.fn[j]),
                 "fp": int(self.fp[j]), "tn": int(self.tn[j])}
                for j in range(self.c)
            ],
            "micro": self.total,
        }


def confusion(predicted, truth, c: int) -> ConfusionCounts:
    pred = np.asarray(predicted, dtype=np.int64).ravel()
    true = np.asarray(truth, dtype=np.int64).ravel()
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {true.size} truths")
    for name, v in (("predicted", pred), ("truth", true)):
        if v.size and (v.min() < 0 or v.max() >= c):
            raise ValueError(f"{name} class index out of range [0, {c})")
    tp = np.bincount(true[pred == true], minlength=c)
    pos = np.bincount(true, minlength=c)
    called = np.bincount(pred, minlength=c)
    fn = pos - tp
    fp = called - tp
    tn = pred.size - tp - fn - fp
    return ConfusionCounts(tp, fn, fp, tn)


def sensitivity(counts: ConfusionCounts) -> float | None:
    """Micro-averaged ``TP / (TP + FN)``; ``None`` when there are no positives."""
    tp = int(counts.tp.sum())
    denom = tp + int(counts.fn.sum())
    return tp / denom if denom else None


def per_class_sensitivity(counts: ConfusionCounts) -> list[float | None]:
    out = []
    for tp, fn in zip(counts.tp, counts.fn):
        out.append(int(tp) / int(tp + fn) if tp + fn else None)
    return out


def macro_sensitivity(counts: ConfusionCounts) -> float | None:
    vals = [q for q in per_class_sensitivity(counts) if q is not None]
    return float(np.mean(vals)) if vals else None


@dataclass(frozen=True)
class ReportRow:
    method: str
    micro_q: float | None
    macro_q: float | None
    evaluated: int


def comparison_report(results) -> list[ReportRow]:
    """Method-vs-sensitivity rows, in input order.

    ``results`` is a sequence of ``(method name, ConfusionCounts)``.
    """
    results = list(results)
    if not results:
        raise ValueError("comparison report needs at least one result")
    rows = []
    for name, counts in results:
        rows.append(ReportRow(
            method=str(name),
            micro_q=sensitivity(counts),
            macro_q=macro_sensitivity(counts),
            evaluated=int(counts.tp.sum() + counts.fn.sum()),
        ))
    return rows


def _pct(q):
    return "n/a" if q is None else f"{100 * q:.2f}"


def format_table(rows: list[ReportRow], title: str = "Sensitivity Measures (%)") -> str:
    width = max(len("Method"), *(len(r.method) for r in rows))
    lines = [title, f"{'Method':<{width}}  {'micro Q':>8}  {'macro Q':>8}  {'n':>6}"]
    for r in rows:
        lines.append(f"{r.method:<{width}}  {_pct(r.micro_q):>8}  {_pct(r.macro_q):>8}  {r.evaluated:>6}")
    return "\n".join(lines) + "\n"


def report_json(rows: list[ReportRow], **extra) -> str:
    doc = {
        "rows": [
            {"method": r.method, "micro_q": r.micro_q, "macro_q": r.macro_q,
             "evaluated": r.evaluated}
            for r in rows
        ],
        **extra,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
