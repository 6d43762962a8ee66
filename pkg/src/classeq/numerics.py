"""Differentiable scalar objectives, a finite-difference oracle, Adam, and
the warmup-then-cosine learning-rate schedule.

Gradients are closed form: every objective reduces to a per-sample weighting
of the BCE derivative (sigmoid(z) - y), which backpropagates through the
model in one pass. The group objective's softmax weights are treated as
constants, and the finite-difference oracle freezes them the same way so the
two sides check the identical contract.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import models
from .models import ModelSpec
from .objectives import EmptyClassError, ObjectiveSpec, bce_vector, gdro

__all__ = [
    "AdamState",
    "LRSchedule",
    "NumericalOverflowError",
    "adam_init",
    "adam_step",
    "central_difference",
    "cosine_warmup_lr",
    "finite_diff_grad",
    "value_and_grad",
]


class NumericalOverflowError(ArithmeticError):
    """A loss or gradient evaluation produced a non-finite value."""


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _class_stats(logits: np.ndarray, labels: np.ndarray):
    losses = bce_vector(logits, labels)
    pos = np.asarray(labels) == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    l_pos = float(losses[pos].mean()) if n_pos else np.nan
    l_neg = float(losses[~pos].mean()) if n_neg else np.nan
    return losses, pos, n_pos, n_neg, l_pos, l_neg


def _require_both(objective: ObjectiveSpec, n_pos: int, n_neg: int) -> None:
    if objective.kind in ("erm_per_cls", "cls_ineq", "gdro", "total"):
        if n_pos == 0:
            raise EmptyClassError("pos")
        if n_neg == 0:
            raise EmptyClassError("neg")


def _objective_value(
    objective: ObjectiveSpec,
    logits: np.ndarray,
    labels: np.ndarray,
    frozen_group_weights: tuple[float, float] | None = None,
) -> tuple[float, np.ndarray | None]:
    """Objective value plus the per-sample coefficient vector c with
    d(value)/d(logit_i) = c_i * (sigmoid(z_i) - y_i). The coefficients
    realize the stop-gradient and subgradient contracts exactly."""
    losses, pos, n_pos, n_neg, l_pos, l_neg = _class_stats(logits, labels)
    _require_both(objective, n_pos, n_neg)
    n = logits.size
    kind = objective.kind

    if kind == "erm":
        return float(losses.mean()), np.full(n, 1.0 / n)

    if kind == "erm_cls_w":
        w = np.where(pos, objective.alpha_pos, objective.alpha_neg)
        return float((w * losses).mean()), w / n

    per_cls = np.where(pos, 1.0 / n_pos, 1.0 / n_neg)

    if kind == "erm_per_cls":
        return l_pos + l_neg, per_cls

    if kind == "cls_ineq":
        s = float(np.sign(l_pos - l_neg))
        coeff = np.where(pos, s / n_pos, -s / n_neg)
        return abs(l_pos - l_neg), coeff

    if frozen_group_weights is not None:
        w_pos, w_neg = frozen_group_weights
        g = w_pos * l_pos + w_neg * l_neg
    else:
        g, w_pos, w_neg = gdro(l_pos, l_neg, float(objective.tau))

    if kind == "gdro":
        return g, np.where(pos, w_pos / n_pos, w_neg / n_neg)

    # total: alpha * |l_pos - l_neg| + group value
    alpha = float(objective.alpha)
    s = float(np.sign(l_pos - l_neg))
    value = alpha * abs(l_pos - l_neg) + g
    coeff = np.where(pos, (alpha * s + w_pos) / n_pos, (-alpha * s + w_neg) / n_neg)
    return value, coeff


def value_and_grad(
    spec: ModelSpec,
    params: np.ndarray,
    objective: ObjectiveSpec,
    X: np.ndarray,
    y: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Exact loss and gradient of the objective at ``params``.

    Deterministic: identical inputs give bitwise-identical outputs.
    """
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("data must be nonempty")
    logits = models.forward(spec, params, X)
    value, coeff = _objective_value(objective, logits, y)
    dlogits = coeff * (_sigmoid(logits) - y)
    grad = models.backward(spec, params, X, dlogits)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise NumericalOverflowError(f"non-finite value or gradient for {objective.kind}")
    return float(value), grad


def central_difference(f, params: np.ndarray, h: float) -> np.ndarray:
    """Per-coordinate central differences (f(x+h*e_i) - f(x-h*e_i)) / 2h."""
    if h <= 0:
        raise ValueError("h must be positive")
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    for i in range(params.size):
        e = np.zeros_like(params)
        e[i] = h
        grad[i] = (f(params + e) - f(params - e)) / (2.0 * h)
    return grad


def finite_diff_grad(
    spec: ModelSpec,
    params: np.ndarray,
    objective: ObjectiveSpec,
    X: np.ndarray,
    y: np.ndarray,
    h: float = 1e-6,
) -> np.ndarray:
    """Central-difference gradient of an objective, independent of the
    analytic path.

    For the group-weighted objectives the softmax weights are frozen at their
    values at ``params`` during both perturbed evaluations, matching the
    stop-gradient contract of the analytic side.
    """
    params = np.asarray(params, dtype=np.float64)

    frozen = None
    if objective.kind in ("gdro", "total"):
        logits = models.forward(spec, params, X)
        _, _, n_pos, n_neg, l_pos, l_neg = _class_stats(logits, y)
        _require_both(objective, n_pos, n_neg)
        _, w_pos, w_neg = gdro(l_pos, l_neg, float(objective.tau))
        frozen = (w_pos, w_neg)

    def value_at(p: np.ndarray) -> float:
        logits = models.forward(spec, p, X)
        v, _ = _objective_value(objective, logits, np.asarray(y), frozen)
        return v

    grad = central_difference(value_at, params, h)
    if not np.all(np.isfinite(grad)):
        raise NumericalOverflowError("non-finite finite-difference gradient")
    return grad


@dataclass(frozen=True)
class AdamState:
    """First/second moment estimates plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(n_params: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(m=np.zeros(n_params), v=np.zeros(n_params), t=0, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(
    state: AdamState,
    params: np.ndarray,
    grad: np.ndarray,
    lr: float,
    weight_decay: float = 0.0,
) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update followed by decoupled weight decay.

    Decay multiplies the freshly updated parameters by (1 - lr*weight_decay),
    so it never contaminates any recorded loss value. Returns the new state
    and the new parameter vector; inputs are left untouched.
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape or params.shape != state.m.shape:
        raise ValueError("params, grad, and optimizer state lengths must agree")
    if lr < 0 or weight_decay < 0:
        raise ValueError("lr and weight_decay must be >= 0")

    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    if weight_decay > 0.0:
        new_params = new_params * (1.0 - lr * weight_decay)
    return replace(state, m=m, v=v, t=t), new_params


@dataclass(frozen=True)
class LRSchedule:
    """Linear warmup to ``peak_lr`` over ceil(warmup_ratio*T), cosine decay to 0."""

    peak_lr: float
    warmup_ratio: float
    total_iterations: int

    def __post_init__(self) -> None:
        if self.peak_lr <= 0:
            raise ValueError("peak_lr must be positive")
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ValueError("warmup_ratio must lie in [0, 1]")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")


def cosine_warmup_lr(sched: LRSchedule, t: int | float) -> float:
    """Learning rate at iteration t in [0, T]."""
    T = sched.total_iterations
    if not 0 <= t <= T:
        raise ValueError(f"t={t} outside [0, {T}]")
    t_w = int(np.ceil(sched.warmup_ratio * T))
    if t < t_w:
        return sched.peak_lr * t / t_w
    if t_w == T:
        return sched.peak_lr
    return sched.peak_lr * 0.5 * (1.0 + np.cos(np.pi * (t - t_w) / (T - t_w)))
