"""Class-unbiased binary classification toolkit.

A small numpy library plus CLI for training binary classifiers whose
per-class losses are kept in balance, together with a two-feature synthetic
benchmark that exhibits class-feature bias and a reproducible experiment
harness that writes delimited results and figures.
"""

from .metrics import MetricsReport, metrics_report, normalized_weights
from .models import ModelSpec, forward, param_init, stats_pool
from .numerics import (
    AdamState,
    LRSchedule,
    adam_init,
    adam_step,
    cosine_warmup_lr,
    finite_diff_grad,
    value_and_grad,
)
from .objectives import (
    EmptyClassError,
    LossBreakdown,
    ObjectiveSpec,
    ScheduleSpec,
    bce,
    breakdown,
    class_losses,
    cls_ineq,
    erm,
    erm_cls_w,
    erm_per_cls,
    gdro,
    schedule_value,
    total_loss,
)
from .synthdata import BiasReport, Dataset, GeneratorConfig, bias_score, generate

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "BiasReport",
    "Dataset",
    "EmptyClassError",
    "GeneratorConfig",
    "LRSchedule",
    "LossBreakdown",
    "MetricsReport",
    "ModelSpec",
    "ObjectiveSpec",
    "ScheduleSpec",
    "adam_init",
    "adam_step",
    "bce",
    "bias_score",
    "breakdown",
    "class_losses",
    "cls_ineq",
    "cosine_warmup_lr",
    "erm",
    "erm_cls_w",
    "erm_per_cls",
    "finite_diff_grad",
    "forward",
    "gdro",
    "generate",
    "metrics_report",
    "normalized_weights",
    "param_init",
    "schedule_value",
    "stats_pool",
    "total_loss",
    "value_and_grad",
]
