"""Two-feature synthetic benchmark with a class-conditional mixture design.

Each feature of each sample is drawn from one of two Gaussian components,
low N(mu_a, sigma^2) or high N(mu_b, sigma^2). Which component a sample uses
is decided per (role, feature, class) by a mixture table holding the
probability of the low component. The default table makes f1 separate the
classes identically in every role, while f2 carries class information only
in the training role; swapping entries in the table changes the benchmark
without touching any code.

Generation is paired across roles: with the same seed, the label sequence,
the f1 values, and the underlying f2 noise are identical for every role, so
role-to-role differences isolate the f2 component assignment.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BiasReport",
    "Dataset",
    "DegenerateFeatureError",
    "GeneratorConfig",
    "DEFAULT_MIXTURE",
    "ROLES",
    "bias_score",
    "generate",
    "load_csv",
    "save_csv",
]

ROLES = ("train", "test1", "test2")

# Probability of drawing the low component N(mu_a, sigma^2), per role,
# feature, and class. f1 is class-shared and identical in every role:
# positives low, negatives high. f2 carries class information only in
# training, where most negatives sit in the low component while positives
# never do, making low f2 a negative-class signature; in test1 both classes
# share the high component (f2 says nothing about the label), and in test2
# the negatives' low-component share shrinks, so the training-time
# association mis-prices test2 samples for a classifier that leaned on f2.
DEFAULT_MIXTURE: dict[str, dict[str, dict[str, float]]] = {
    "train": {"f1": {"pos": 1.0, "neg": 0.0}, "f2": {"pos": 0.0, "neg": 0.6}},
    "test1": {"f1": {"pos": 1.0, "neg": 0.0}, "f2": {"pos": 0.0, "neg": 0.0}},
    "test2": {"f1": {"pos": 1.0, "neg": 0.0}, "f2": {"pos": 0.0, "neg": 0.3}},
}


class DegenerateFeatureError(ValueError):
    """The feature has zero observed range, so binning is undefined."""


@dataclass(frozen=True)
class GeneratorConfig:
    """One dataset draw: role, size, class prior, component geometry, seed."""

    role: str
    n: int
    pos_prior: float
    seed: int
    mu_a: float = 0.0
    mu_b: float = 5.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 < self.pos_prior < 1.0:
            raise ValueError("pos_prior must lie strictly inside (0, 1)")
        if self.n * self.pos_prior < 1.0 or self.n * (1.0 - self.pos_prior) < 1.0:
            raise ValueError("expected class counts must each be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n, 2), 0/1 labels (n,), and the role tag."""

    X: np.ndarray
    y: np.ndarray
    role: str = "train"

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X rows and y length must agree")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be 0/1")

    @property
    def n(self) -> int:
        return int(self.y.size)


def _component_means(
    cfg: GeneratorConfig, a_prob: dict[str, float], u: np.ndarray, y: np.ndarray
) -> np.ndarray:
    p_low = np.where(y == 1, a_prob["pos"], a_prob["neg"])
    return np.where(u < p_low, cfg.mu_a, cfg.mu_b)


def generate(cfg: GeneratorConfig, mixture: dict | None = None) -> Dataset:
    """Draw one dataset; bitwise reproducible per (cfg, mixture).

    Labels are i.i.d. Bernoulli(pos_prior). Five independent child streams
    of the seed supply label draws, per-feature component selectors, and
    per-feature Gaussian noise, so datasets of different roles with the same
    seed are paired sample by sample.
    """
    table = (mixture or DEFAULT_MIXTURE)[cfg.role]
    ss = np.random.SeedSequence(cfg.seed)
    r_label, r_u1, r_z1, r_u2, r_z2 = [np.random.default_rng(s) for s in ss.spawn(5)]

    y = (r_label.random(cfg.n) < cfg.pos_prior).astype(np.int64)
    f1 = _component_means(cfg, table["f1"], r_u1.random(cfg.n), y) + cfg.sigma * r_z1.standard_normal(cfg.n)
    f2 = _component_means(cfg, table["f2"], r_u2.random(cfg.n), y) + cfg.sigma * r_z2.standard_normal(cfg.n)
    return Dataset(X=np.column_stack([f1, f2]), y=y, role=cfg.role)


@dataclass(frozen=True)
class BiasReport:
    """Per-class informativeness of one feature.

    Each score is the bin-mass-weighted mean absolute deviation between the
    binned class posterior and the class prior; 0 means the feature carries
    no information about that class, 1 is the maximum possible deviation.
    """

    feature_index: int
    bins: int
    pos_score: float
    neg_score: float


def bias_score(ds: Dataset, feature_index: int, bins: int = 20) -> BiasReport:
    """Empirical label-dependence of one feature via equal-width binning."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if feature_index not in (0, 1):
        raise ValueError("feature_index must be 0 or 1")
    x = ds.X[:, feature_index]
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise DegenerateFeatureError(f"feature {feature_index} is constant")

    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.digitize(x, edges[1:-1]), 0, bins - 1)
    n = ds.n
    prior_pos = float(ds.y.mean())

    pos_score = 0.0
    neg_score = 0.0
    for b in range(bins):
        mask = idx == b
        cnt = int(mask.sum())
        if cnt == 0:
            continue
        p_bin = cnt / n
        post_pos = float(ds.y[mask].mean())
        pos_score += p_bin * abs(post_pos - prior_pos)
        neg_score += p_bin * abs((1.0 - post_pos) - (1.0 - prior_pos))
    return BiasReport(feature_index=feature_index, bins=bins, pos_score=pos_score, neg_score=neg_score)


def save_csv(ds: Dataset, path: str) -> None:
    """Write `f1,f2,label` rows with 9 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_csv(ds))


def dumps_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    buf.write("f1,f2,label\n")
    for (f1, f2), label in zip(ds.X, ds.y):
        buf.write(f"{f1:.9g},{f2:.9g},{int(label)}\n")
    return buf.getvalue()


def load_csv(path: str, role: str = "train") -> Dataset:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected three columns f1,f2,label")
    return Dataset(X=data[:, :2].astype(np.float64), y=data[:, 2].astype(np.int64), role=role)
