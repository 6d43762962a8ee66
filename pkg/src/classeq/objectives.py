"""Training objectives built from per-class means of the binary cross entropy.

Everything here is a scalar computation over a batch: the per-sample loss,
its class-partitioned means, the plain/weighted/per-class empirical risks,
the class inequality penalty, the softmax-weighted group objective with
stop-gradient weights, and the linear hyperparameter schedules that drive
the last two during training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmptyClassError",
    "LossBreakdown",
    "ObjectiveSpec",
    "ScheduleSpec",
    "bce",
    "bce_vector",
    "breakdown",
    "class_losses",
    "cls_ineq",
    "erm",
    "erm_cls_w",
    "erm_per_cls",
    "gdro",
    "schedule_value",
    "total_loss",
]

OBJECTIVE_KINDS = ("erm", "erm_cls_w", "erm_per_cls", "cls_ineq", "gdro", "total")


class EmptyClassError(ValueError):
    """A class-partitioned objective received a batch missing one class."""

    def __init__(self, cls: str):
        super().__init__(f"batch contains no samples of class {cls!r}")
        self.cls = cls


@dataclass(frozen=True)
class ObjectiveSpec:
    """Which objective to optimize, with its fixed scalars for this evaluation.

    ``alpha_pos``/``alpha_neg`` apply to ``erm_cls_w``; ``tau`` to ``gdro``
    and ``total``; ``alpha`` to ``total``.
    """

    kind: str
    alpha_pos: float = 1.0
    alpha_neg: float = 1.0
    tau: float | None = None
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "erm_cls_w" and (self.alpha_pos <= 0 or self.alpha_neg <= 0):
            raise ValueError("class weights must be positive")
        if self.kind in ("gdro", "total"):
            if self.tau is None or self.tau <= 0:
                raise ValueError("tau must be positive for group-weighted objectives")
        if self.kind == "total":
            if self.alpha is None or self.alpha < 0:
                raise ValueError("total objective needs alpha >= 0")


@dataclass(frozen=True)
class ScheduleSpec:
    """Linear interpolation from ``init`` at t=0 to ``end`` at t=total_iterations."""

    init: float
    end: float
    total_iterations: int

    def __post_init__(self) -> None:
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")


def schedule_value(spec: ScheduleSpec, t: int | float) -> float:
    if not 0 <= t <= spec.total_iterations:
        raise ValueError(f"t={t} outside [0, {spec.total_iterations}]")
    return spec.init + (spec.end - spec.init) * (t / spec.total_iterations)


def _softplus(x: np.ndarray | float) -> np.ndarray | float:
    return np.logaddexp(0.0, x)


def bce(logit: float, label: int) -> float:
    """Binary cross entropy in logit space: softplus(z) - y*z.

    Stable for |logit| up to well beyond 1e3; always non-negative.
    """
    if not np.isfinite(logit):
        raise ValueError(f"logit must be finite, got {logit!r}")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    return float(_softplus(logit) - label * logit)


def bce_vector(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample BCE for a batch of logits and 0/1 labels."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.shape != labels.shape:
        raise ValueError("logits and labels must have equal length")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return _softplus(logits) - labels * logits


def class_losses(logits: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Mean BCE over the positive samples and over the negative samples."""
    losses = bce_vector(logits, labels)
    pos = np.asarray(labels) == 1
    if not pos.any():
        raise EmptyClassError("pos")
    if pos.all():
        raise EmptyClassError("neg")
    return float(losses[pos].mean()), float(losses[~pos].mean())


def erm(logits: np.ndarray, labels: np.ndarray) -> float:
    """Plain batch-mean risk; tolerates single-class batches."""
    return float(bce_vector(logits, labels).mean())


def erm_cls_w(logits: np.ndarray, labels: np.ndarray, alpha_pos: float, alpha_neg: float) -> float:
    """Batch mean of class-weighted per-sample losses."""
    if alpha_pos <= 0 or alpha_neg <= 0:
        raise ValueError("class weights must be positive")
    losses = bce_vector(logits, labels)
    w = np.where(np.asarray(labels) == 1, alpha_pos, alpha_neg)
    return float((w * losses).mean())


def erm_per_cls(l_pos: float, l_neg: float) -> float:
    """Sum of the per-class mean losses."""
    return l_pos + l_neg


def cls_ineq(l_pos: float, l_neg: float) -> float:
    """Absolute gap between the class losses.

    Gradient contract: sign(l_pos - l_neg) * (grad l_pos - grad l_neg), with
    sign(0) taken as 0 so the exact-equality point carries no gradient.
    """
    if not (np.isfinite(l_pos) and np.isfinite(l_neg)):
        raise ValueError("class losses must be finite")
    return abs(l_pos - l_neg)


def gdro(l_pos: float, l_neg: float, tau: float) -> tuple[float, float, float]:
    """Softmax-weighted sum of the class losses; returns (value, w_pos, w_neg).

    Weights are exp(tau*l_c) normalized over the two classes, computed with
    max subtraction so large tau cannot overflow. By contract the weights are
    constants under differentiation: the gradient of the value is
    w_pos * grad l_pos + w_neg * grad l_neg.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not (np.isfinite(l_pos) and np.isfinite(l_neg)):
        raise ValueError("class losses must be finite")
    zp, zn = tau * l_pos, tau * l_neg
    m = max(zp, zn)
    ep, en = np.exp(zp - m), np.exp(zn - m)
    w_pos = float(ep / (ep + en))
    w_neg = float(en / (ep + en))
    return w_pos * l_pos + w_neg * l_neg, w_pos, w_neg


def total_loss(alpha: float, l_cls_ineq: float, l_gdro: float) -> float:
    """alpha * inequality penalty + group objective."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return alpha * l_cls_ineq + l_gdro


@dataclass(frozen=True)
class LossBreakdown:
    """Every scalar the training loop tracks for one batch evaluation."""

    l_pos: float
    l_neg: float
    l_erm: float
    l_cls_ineq: float
    l_gdro: float
    l_total: float
    w_pos: float
    w_neg: float
    alpha: float
    tau: float


def breakdown(logits: np.ndarray, labels: np.ndarray, alpha: float, tau: float) -> LossBreakdown:
    """Evaluate the full loss family on one batch at the given schedule values."""
    l_pos, l_neg = class_losses(logits, labels)
    ineq = cls_ineq(l_pos, l_neg)
    g, w_pos, w_neg = gdro(l_pos, l_neg, tau)
    return LossBreakdown(
        l_pos=l_pos,
        l_neg=l_neg,
        l_erm=erm(logits, labels),
        l_cls_ineq=ineq,
        l_gdro=g,
        l_total=total_loss(alpha, ineq, g),
        w_pos=w_pos,
        w_neg=w_neg,
        alpha=alpha,
        tau=tau,
    )
