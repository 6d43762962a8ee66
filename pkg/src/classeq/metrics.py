"""Binary classification metrics and weight diagnostics.

The decision rule everywhere is logit > 0 predicts the positive class.
Degenerate cases are reported, not raised: an F1 with an empty denominator
is 0, and a per-class accuracy for an absent class is 0 with the absence
flagged on the report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec

__all__ = [
    "Confusion",
    "DegenerateWeightsError",
    "MetricsReport",
    "accuracy",
    "confusion",
    "f1",
    "macro_f1",
    "metrics_report",
    "normalized_weights",
    "per_class_accuracy",
    "predict",
]


class DegenerateWeightsError(ValueError):
    """The weight vector is identically zero, so no direction exists."""


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def predict(logits: np.ndarray) -> np.ndarray:
    """Fixed threshold at logit 0 (probability one half)."""
    return (np.asarray(logits) > 0).astype(np.int64)


def confusion(preds: np.ndarray, labels: np.ndarray) -> Confusion:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError("preds and labels must have equal length")
    if not (np.isin(preds, (0, 1)).all() and np.isin(labels, (0, 1)).all()):
        raise ValueError("preds and labels must be 0/1")
    p, l = preds == 1, labels == 1
    return Confusion(
        tp=int((p & l).sum()),
        fp=int((p & ~l).sum()),
        fn=int((~p & l).sum()),
        tn=int((~p & ~l).sum()),
    )


def _f1_from(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def f1(c: Confusion, cls: str = "pos") -> float:
    """F1 of one class; counts are role-swapped for the negative class."""
    if c.total == 0:
        raise ValueError("empty confusion")
    if cls == "pos":
        return _f1_from(c.tp, c.fp, c.fn)
    if cls == "neg":
        return _f1_from(c.tn, c.fn, c.fp)
    raise ValueError(f"cls must be 'pos' or 'neg', got {cls!r}")


def macro_f1(c: Confusion) -> float:
    return 0.5 * (f1(c, "pos") + f1(c, "neg"))


def accuracy(c: Confusion) -> float:
    if c.total == 0:
        raise ValueError("empty confusion")
    return (c.tp + c.tn) / c.total


def per_class_accuracy(c: Confusion) -> tuple[float, float]:
    """(pos_acc, neg_acc); an absent class scores 0 (see MetricsReport flags)."""
    if c.total == 0:
        raise ValueError("empty confusion")
    pos_acc = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    neg_acc = c.tn / (c.tn + c.fp) if (c.tn + c.fp) else 0.0
    return pos_acc, neg_acc


@dataclass(frozen=True)
class MetricsReport:
    pos_f1: float
    neg_f1: float
    mf1: float
    accuracy: float
    pos_acc: float
    neg_acc: float
    pos_absent: bool
    neg_absent: bool
    normalized_weights: np.ndarray | None = None

    METRIC_FIELDS = ("pos_f1", "neg_f1", "mf1", "accuracy", "pos_acc", "neg_acc")

    @property
    def collapsed(self) -> bool:
        """All-one-class prediction signature: no true positive found."""
        return self.pos_f1 == 0.0 and not self.pos_absent


def metrics_report(
    preds: np.ndarray,
    labels: np.ndarray,
    normalized_w: np.ndarray | None = None,
) -> MetricsReport:
    c = confusion(preds, labels)
    pos_acc, neg_acc = per_class_accuracy(c)
    return MetricsReport(
        pos_f1=f1(c, "pos"),
        neg_f1=f1(c, "neg"),
        mf1=macro_f1(c),
        accuracy=accuracy(c),
        pos_acc=pos_acc,
        neg_acc=neg_acc,
        pos_absent=(c.tp + c.fn) == 0,
        neg_absent=(c.tn + c.fp) == 0,
        normalized_weights=normalized_w,
    )


def normalized_weights(spec: ModelSpec, params: np.ndarray) -> np.ndarray:
    """Unit-norm feature weights of a linear model, bias excluded."""
    if spec.kind != "linear":
        raise ValueError("normalized weights are defined for linear models only")
    w = np.asarray(params, dtype=np.float64)[: spec.d_in]
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise DegenerateWeightsError("weight vector is zero")
    return w / norm
