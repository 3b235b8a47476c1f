"""Confusion-matrix metrics, ROC curve and trapezoidal AUC."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    sensitivity: float
    specificity: float
    precision: float
    f1: float
    mcc: float
    # metrics whose denominator was zero and were reported as 0.0
    undefined: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "precision": self.precision,
            "f1": self.f1,
            "mcc": self.mcc,
            "undefined": list(self.undefined),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self) -> str:
        rows = ["fpr,tpr"] + [f"{f!r},{t!r}" for f, t in self.points()]
        return "\n".join(rows) + "\n"


def _binary(values, name) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def confusion(truth, predicted) -> ConfusionCounts:
    t = _binary(truth, "truth")
    p = _binary(predicted, "predicted")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.size} truths, {p.size} predictions")
    if t.size == 0:
        raise ValueError("cannot score an empty prediction list")
    cells = np.bincount(2 * t + p, minlength=4)
    return ConfusionCounts(tp=cells[3], fp=cells[1], tn=cells[0], fn=cells[2])


def compute_metrics(c: ConfusionCounts) -> MetricsReport:
    if c.total == 0:
        raise ValueError("all confusion counts are zero")
    undefined = []

    def ratio(name, num, den):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    tp, fp, tn, fn = c.tp, c.fp, c.tn, c.fn
    accuracy = ratio("accuracy", tp + tn, tp + fn + tn + fp)
    sensitivity = ratio("sensitivity", tp, tp + fn)
    specificity = ratio("specificity", tn, tn + fp)
    precision = ratio("precision", tp, tp + fp)
    f1 = ratio("f1", 2 * tp, 2 * tp + fn + fp)
    # integer product keeps the denominator exact, so label swaps negate mcc exactly
    mcc = ratio(
        "mcc", tp * tn - fp * fn, math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    )
    return MetricsReport(
        accuracy, sensitivity, specificity, precision, f1, mcc, tuple(undefined)
    )


def evaluate(truth, predicted) -> MetricsReport:
    return compute_metrics(confusion(truth, predicted))


def roc_curve(truth, scores) -> RocCurve:
    """ROC points from the highest score down; tied scores form one step."""
    t = _binary(truth, "truth")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != t.shape:
        raise ValueError(f"length mismatch: {t.size} truths, {s.size} scores")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes in truth")
    order = np.argsort(-s, kind="stable")
    s_sorted, t_sorted = s[order], t[order]
    tp = np.cumsum(t_sorted)
    fp = np.cumsum(1 - t_sorted)
    group_end = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    fpr = np.r_[0.0, fp[group_end] / n_neg]
    tpr = np.r_[0.0, tp[group_end] / n_pos]
    return RocCurve(fpr, tpr)


def auc(curve: RocCurve) -> float:
    x, y = curve.fpr, curve.tpr
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))
