"""Configuration-driven experiment runner.

Generates the synthetic benchmark splits, trains one model per (method,
seed) with paired seeds across methods, aggregates metrics over seeds, and
writes delimited results plus a fully resolved configuration echo. Figures
are rendered separately by the plots module.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass

import numpy as np

from . import models, plots
from .metrics import MetricsReport, metrics_report, normalized_weights, predict
from .models import ModelSpec
from .numerics import LRSchedule, adam_init, adam_step, cosine_warmup_lr, value_and_grad
from .objectives import (
    EmptyClassError,
    LossBreakdown,
    ObjectiveSpec,
    ScheduleSpec,
    breakdown,
    schedule_value,
)
from .synthdata import DEFAULT_MIXTURE, Dataset, GeneratorConfig, generate

__all__ = [
    "AggregateResult",
    "ConfigError",
    "DivergedError",
    "ExperimentResult",
    "RunRecord",
    "SplitData",
    "TrainConfig",
    "DEFAULTS",
    "emit",
    "make_splits",
    "multi_seed",
    "parse_config",
    "resolve_config",
    "run_experiment",
    "train",
]

METHODS = ("erm", "erm_cls_w", "erm_per_cls", "gdro_only", "cls_unbias")
SPLITS = ("train", "valid", "test1", "test2")

METRIC_NAMES = ("pos_f1", "neg_f1", "mf1", "accuracy", "pos_acc", "neg_acc")


class ConfigError(ValueError):
    """Bad key, bad value, or malformed line in an experiment config."""


class DivergedError(RuntimeError):
    """Training hit a non-finite loss; carries the iteration index."""

    def __init__(self, iteration: int, detail: str = ""):
        super().__init__(f"training diverged at iteration {iteration}" + (f": {detail}" if detail else ""))
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    """Everything one training run needs besides the data and the seed."""

    method: str
    lr: float
    iterations: int
    warmup_ratio: float
    weight_decay: float
    alpha: tuple[float, float]
    tau: tuple[float, float]
    model: ModelSpec
    batch_size: int | None = None
    adam_eps: float = 1e-8
    master_seed: int = 1234

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.iterations < 1 or self.lr <= 0:
            raise ConfigError("iterations must be >= 1 and lr > 0")
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ConfigError("warmup_ratio must lie in [0, 1]")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be >= 0")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1 when given")


@dataclass
class RunRecord:
    """Everything recorded during one training run."""

    seed: int
    breakdowns: list[LossBreakdown]
    lrs: list[float]
    valid_iters: list[int]
    valid_breakdowns: list[LossBreakdown]
    valid_reports: list[MetricsReport]
    final_params: np.ndarray
    final_metrics: dict[str, MetricsReport]
    norm_weights: np.ndarray | None


@dataclass
class AggregateResult:
    """Across-seed mean and standard deviation of the final metrics."""

    method: str
    n_seeds: int
    diverged_seeds: list[int]
    means: dict[str, dict[str, float]]
    stds: dict[str, dict[str, float]]
    records: list[RunRecord]


@dataclass
class SplitData:
    train: Dataset
    valid: Dataset
    test1: Dataset
    test2: Dataset

    def items(self):
        return (("train", self.train), ("valid", self.valid), ("test1", self.test1), ("test2", self.test2))


@dataclass
class ExperimentResult:
    config: dict[str, str]
    methods: dict[str, AggregateResult]
    positives_present: dict[str, bool]


def _method_objective(method: str, alpha: float, tau: float,
                      cls_weights: tuple[float, float]) -> ObjectiveSpec:
    if method == "erm":
        return ObjectiveSpec("erm")
    if method == "erm_cls_w":
        return ObjectiveSpec("erm_cls_w", alpha_pos=cls_weights[0], alpha_neg=cls_weights[1])
    if method == "erm_per_cls":
        return ObjectiveSpec("erm_per_cls")
    if method == "gdro_only":
        return ObjectiveSpec("gdro", tau=tau)
    return ObjectiveSpec("total", alpha=alpha, tau=tau)


def inverse_frequency_weights(labels: np.ndarray) -> tuple[float, float]:
    """Per-class weights proportional to 1/frequency, normalized to mean 1."""
    n = labels.size
    n_pos = int((labels == 1).sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EmptyClassError("pos" if n_pos == 0 else "neg")
    return n / (2.0 * n_pos), n / (2.0 * n_neg)


def train(cfg: TrainConfig, train_ds: Dataset, valid_ds: Dataset, run_seed: int) -> tuple[np.ndarray, RunRecord]:
    """One full training run; deterministic in (cfg, data, run_seed).

    The per-iteration loss family is recorded on the full training set, so
    the curves stay comparable when minibatching is enabled. Validation
    metrics are computed every max(1, T // 50) iterations and at the end.
    """
    spec = cfg.model
    T = cfg.iterations
    params = models.param_init(spec, run_seed)
    state = adam_init(spec.n_params, eps=cfg.adam_eps)
    sched = LRSchedule(cfg.lr, cfg.warmup_ratio, T)
    alpha_s = ScheduleSpec(cfg.alpha[0], cfg.alpha[1], T)
    tau_s = ScheduleSpec(cfg.tau[0], cfg.tau[1], T)
    cls_w = inverse_frequency_weights(train_ds.y) if cfg.method == "erm_cls_w" else (1.0, 1.0)
    batch_rng = np.random.default_rng(np.random.SeedSequence(entropy=run_seed, spawn_key=(1,)))

    X, y = train_ds.X, train_ds.y
    n = train_ds.n
    order = np.arange(n)
    cursor = n  # force a shuffle before the first minibatch

    record = RunRecord(
        seed=run_seed, breakdowns=[], lrs=[], valid_iters=[], valid_breakdowns=[],
        valid_reports=[], final_params=params, final_metrics={}, norm_weights=None,
    )
    valid_every = max(1, T // 50)

    # overflow on a diverging run is detected by the explicit finiteness
    # checks, so numpy's intermediate warnings are suppressed here
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            lr_t = cosine_warmup_lr(sched, t)
            alpha_t = schedule_value(alpha_s, t)
            tau_t = schedule_value(tau_s, t)

            try:
                bd = breakdown(models.forward(spec, params, X), y, alpha_t, tau_t)
            except EmptyClassError:
                raise
            except (ValueError, ArithmeticError) as err:  # non-finite training state
                raise DivergedError(t, str(err)) from err
            if not np.isfinite(bd.l_total) or not np.isfinite(bd.l_erm):
                raise DivergedError(t)
            record.breakdowns.append(bd)
            record.lrs.append(lr_t)

            if t % valid_every == 0 or t == T - 1:
                v_logits = models.forward(spec, params, valid_ds.X)
                record.valid_iters.append(t)
                record.valid_breakdowns.append(breakdown(v_logits, valid_ds.y, alpha_t, tau_t))
                record.valid_reports.append(metrics_report(predict(v_logits), valid_ds.y))

            if cfg.batch_size is None or cfg.batch_size >= n:
                Xb, yb = X, y
            else:
                if cursor + cfg.batch_size > n:
                    order = batch_rng.permutation(n)
                    cursor = 0
                sel = order[cursor : cursor + cfg.batch_size]
                cursor += cfg.batch_size
                Xb, yb = X[sel], y[sel]

            objective = _method_objective(cfg.method, alpha_t, tau_t, cls_w)
            try:
                loss, grad = value_and_grad(spec, params, objective, Xb, yb)
            except EmptyClassError:
                if cfg.method in ("erm", "erm_cls_w"):
                    continue  # single-class minibatch; skip the step
                raise
            except (ValueError, ArithmeticError) as err:
                raise DivergedError(t, str(err)) from err
            if not np.isfinite(loss):
                raise DivergedError(t)
            state, params = adam_step(state, params, grad, lr_t, cfg.weight_decay)
            if not np.all(np.isfinite(params)):
                raise DivergedError(t, "non-finite parameters")

    record.final_params = params
    if spec.kind == "linear":
        record.norm_weights = normalized_weights(spec, params)
    return params, record


def _evaluate(spec: ModelSpec, params: np.ndarray, ds: Dataset) -> MetricsReport:
    return metrics_report(predict(models.forward(spec, params, ds.X)), ds.y)


def derive_run_seed(master_seed: int, index: int) -> int:
    """Fixed, documented derivation: child `index` of the master seed's
    numpy SeedSequence, reproducible across platforms."""
    return int(np.random.SeedSequence(entropy=master_seed, spawn_key=(index,)).generate_state(1)[0])


def multi_seed(cfg: TrainConfig, data: SplitData, n_seeds: int) -> AggregateResult:
    """Run `n_seeds` paired training runs and aggregate the final metrics.

    Seeds depend only on cfg.master_seed and the run index, never on the
    method, so method-to-method comparisons see identical initializations.
    Diverged runs are recorded, excluded from the aggregates, and flagged.
    """
    if n_seeds < 1:
        raise ConfigError("n_seeds must be >= 1")
    records: list[RunRecord] = []
    diverged: list[int] = []
    for i in range(n_seeds):
        run_seed = derive_run_seed(cfg.master_seed, i)
        try:
            params, rec = train(cfg, data.train, data.valid, run_seed)
        except DivergedError:
            diverged.append(i)
            continue
        for split, ds in data.items():
            rec.final_metrics[split] = _evaluate(cfg.model, params, ds)
        records.append(rec)

    means: dict[str, dict[str, float]] = {}
    stds: dict[str, dict[str, float]] = {}
    for split in SPLITS:
        means[split] = {}
        stds[split] = {}
        for m in METRIC_NAMES:
            vals = np.array([getattr(r.final_metrics[split], m) for r in records])
            means[split][m] = float(vals.mean()) if len(vals) else float("nan")
            stds[split][m] = float(vals.std()) if len(vals) else float("nan")
    return AggregateResult(
        method=cfg.method, n_seeds=n_seeds, diverged_seeds=diverged,
        means=means, stds=stds, records=records,
    )


# --- configuration ---------------------------------------------------------

DEFAULTS: dict[str, str] = {
    "method": "erm,cls_unbias",
    "lr": "0.05",
    "iterations": "300",
    "batch_size": "",
    "warmup_ratio": "0.1",
    "weight_decay": "0.0",
    "alpha_init": "0.0",
    "alpha_end": "1.0",
    "tau_init": "2.0",
    "tau_end": "0.01",
    "model": "linear",
    "hidden_dims": "",
    "activation": "tanh",
    "bias": "true",
    "adam_eps": "10.0",
    "seeds": "5",
    "master_seed": "1234",
    "train_n": "2000",
    "test_n": "2000",
    "pos_prior": "0.5",
    "test_pos_prior": "0.5",
    "data_seed": "7",
    "mu_a": "0.0",
    "mu_b": "5.0",
    "sigma": "1.0",
    "figures": "true",
}
for _role, _feats in DEFAULT_MIXTURE.items():
    for _feat, _classes in _feats.items():
        for _cls, _val in _classes.items():
            DEFAULTS[f"mix_{_role}_{_feat}_{_cls}"] = f"{_val:g}"


def parse_config(text: str) -> dict[str, str]:
    """Parse flat `key = value` lines; '#' starts a comment. Unknown keys
    are errors so typos cannot silently fall back to defaults."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _as_bool(key: str, value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _as_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError as err:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from err


def _as_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as err:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from err


def resolve_config(overrides: dict[str, str]) -> dict[str, str]:
    """Defaults plus overrides; values stay strings for faithful echoing."""
    unknown = set(overrides) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    resolved = dict(DEFAULTS)
    resolved.update(overrides)
    return resolved


def _mixture_from(resolved: dict[str, str]) -> dict:
    table = copy.deepcopy(DEFAULT_MIXTURE)
    for role in table:
        for feat in ("f1", "f2"):
            for cls in ("pos", "neg"):
                v = _as_float(f"mix_{role}_{feat}_{cls}", resolved[f"mix_{role}_{feat}_{cls}"])
                if not 0.0 <= v <= 1.0:
                    raise ConfigError(f"mix_{role}_{feat}_{cls} must lie in [0, 1]")
                table[role][feat][cls] = v
    return table


def _model_from(resolved: dict[str, str]) -> ModelSpec:
    bias = _as_bool("bias", resolved["bias"])
    if resolved["model"] == "linear":
        return ModelSpec("linear", (2,), bias=bias)
    if resolved["model"] == "mlp":
        dims_text = resolved["hidden_dims"].strip()
        if not dims_text:
            raise ConfigError("mlp model needs hidden_dims, e.g. hidden_dims = 8,4")
        hidden = tuple(_as_int("hidden_dims", d) for d in dims_text.split(","))
        return ModelSpec("mlp", (2,) + hidden, activation=resolved["activation"], bias=bias)
    raise ConfigError(f"model must be 'linear' or 'mlp', got {resolved['model']!r}")


def train_config_from(resolved: dict[str, str], method: str) -> TrainConfig:
    batch = resolved["batch_size"].strip()
    return TrainConfig(
        method=method,
        lr=_as_float("lr", resolved["lr"]),
        iterations=_as_int("iterations", resolved["iterations"]),
        warmup_ratio=_as_float("warmup_ratio", resolved["warmup_ratio"]),
        weight_decay=_as_float("weight_decay", resolved["weight_decay"]),
        alpha=(_as_float("alpha_init", resolved["alpha_init"]), _as_float("alpha_end", resolved["alpha_end"])),
        tau=(_as_float("tau_init", resolved["tau_init"]), _as_float("tau_end", resolved["tau_end"])),
        model=_model_from(resolved),
        batch_size=_as_int("batch_size", batch) if batch else None,
        adam_eps=_as_float("adam_eps", resolved["adam_eps"]),
        master_seed=_as_int("master_seed", resolved["master_seed"]),
    )


def make_splits(resolved: dict[str, str]) -> SplitData:
    """Benchmark splits: train and a same-distribution validation holdout at
    the configured prior, plus both test sets at the test prior. Train and
    the test sets share one seed so labels and f1 are paired across roles."""
    mixture = _mixture_from(resolved)
    data_seed = _as_int("data_seed", resolved["data_seed"])
    train_n = _as_int("train_n", resolved["train_n"])
    test_n = _as_int("test_n", resolved["test_n"])
    pos_prior = _as_float("pos_prior", resolved["pos_prior"])
    test_prior = _as_float("test_pos_prior", resolved["test_pos_prior"])
    mu_a = _as_float("mu_a", resolved["mu_a"])
    mu_b = _as_float("mu_b", resolved["mu_b"])
    sigma = _as_float("sigma", resolved["sigma"])
    valid_seed = derive_run_seed(data_seed, 1)

    def gen(role: str, n: int, prior: float, seed: int) -> Dataset:
        cfg = GeneratorConfig(role=role, n=n, pos_prior=prior, seed=seed,
                              mu_a=mu_a, mu_b=mu_b, sigma=sigma)
        return generate(cfg, mixture)

    return SplitData(
        train=gen("train", train_n, pos_prior, data_seed),
        valid=gen("train", train_n, pos_prior, valid_seed),
        test1=gen("test1", test_n, test_prior, data_seed),
        test2=gen("test2", test_n, test_prior, data_seed),
    )


def run_experiment(resolved: dict[str, str], methods: list[str] | None = None,
                   n_seeds: int | None = None) -> ExperimentResult:
    data = make_splits(resolved)
    if methods is None:
        methods = [m.strip() for m in resolved["method"].split(",") if m.strip()]
    if not methods:
        raise ConfigError("no method given")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    if n_seeds is None:
        n_seeds = _as_int("seeds", resolved["seeds"])

    results = {}
    for method in methods:
        cfg = train_config_from(resolved, method)
        results[method] = multi_seed(cfg, data, n_seeds)
    positives = {split: bool((ds.y == 1).any()) for split, ds in data.items()}
    echo = dict(resolved)
    echo["method"] = ",".join(methods)
    echo["seeds"] = str(n_seeds)
    return ExperimentResult(config=echo, methods=results, positives_present=positives)


# --- output ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def emit(result: ExperimentResult, out_dir: str) -> list[str]:
    """Write summary, per-run curves, per-method weights, and the resolved
    config. Identical inputs produce byte-identical files."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    path = os.path.join(out_dir, "summary.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        cols = ["method", "split", "n_seeds", "n_diverged", "collapsed"]
        for m in METRIC_NAMES:
            cols += [f"{m}_mean", f"{m}_std"]
        fh.write(",".join(cols) + "\n")
        for method in sorted(result.methods):
            agg = result.methods[method]
            for split in SPLITS:
                collapsed = (
                    agg.means[split]["pos_f1"] == 0.0 and result.positives_present[split]
                )
                row = [method, split, str(agg.n_seeds), str(len(agg.diverged_seeds)),
                       str(collapsed).lower()]
                for m in METRIC_NAMES:
                    row += [_fmt(agg.means[split][m]), _fmt(agg.stds[split][m])]
                fh.write(",".join(row) + "\n")
    written.append(path)

    for method in sorted(result.methods):
        agg = result.methods[method]
        for idx, rec in enumerate(agg.records):
            path = os.path.join(out_dir, f"curves_{method}_{idx}.csv")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("iteration,l_pos,l_neg,l_cls_ineq,l_gdro,l_total,"
                         "alpha,tau,lr,valid_mf1,valid_erm_loss\n")
                valid_at = {t: k for k, t in enumerate(rec.valid_iters)}
                for t, bd in enumerate(rec.breakdowns):
                    cells = [str(t), _fmt(bd.l_pos), _fmt(bd.l_neg), _fmt(bd.l_cls_ineq),
                             _fmt(bd.l_gdro), _fmt(bd.l_total), _fmt(bd.alpha), _fmt(bd.tau),
                             _fmt(rec.lrs[t])]
                    if t in valid_at:
                        k = valid_at[t]
                        cells += [_fmt(rec.valid_reports[k].mf1),
                                  _fmt(rec.valid_breakdowns[k].l_erm)]
                    else:
                        cells += ["", ""]
                    fh.write(",".join(cells) + "\n")
            written.append(path)

        path = os.path.join(out_dir, f"weights_{method}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            d = max((rec.norm_weights.size for rec in agg.records if rec.norm_weights is not None),
                    default=0)
            fh.write("seed_index,run_seed," + ",".join(f"w{i+1}" for i in range(d)) + "\n")
            for idx, rec in enumerate(agg.records):
                if rec.norm_weights is None:
                    continue
                fh.write(",".join([str(idx), str(rec.seed)] + [_fmt(v) for v in rec.norm_weights]) + "\n")
        written.append(path)

    path = os.path.join(out_dir, "config.resolved")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(result.config):
            fh.write(f"{key} = {result.config[key]}\n")
    written.append(path)
    return written


def emit_figures(result: ExperimentResult, out_dir: str) -> list[str]:
    return plots.render_figures(result, out_dir)
