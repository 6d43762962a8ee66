"""Parameterized predictors over flat float64 parameter vectors.

A ModelSpec pins the architecture and therefore the exact parameter layout;
every operation here is a pure function of (spec, params, data). Keeping
parameters flat lets the optimizer and the finite-difference oracle treat
every model identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ModelSpec", "param_init", "forward", "backward", "stats_pool"]


@dataclass(frozen=True)
class ModelSpec:
    """Architecture descriptor producing a single binary logit.

    ``layer_dims`` is the input dimension followed by any hidden widths; the
    final affine map to one output is implicit. Linear models use
    ``layer_dims=(d_in,)`` and ignore ``activation``.
    """

    kind: str
    layer_dims: tuple[int, ...]
    activation: str = "tanh"
    bias: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "mlp"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.layer_dims or any(d < 1 for d in self.layer_dims):
            raise ValueError("layer_dims must be nonempty with every dim >= 1")
        if self.kind == "linear" and len(self.layer_dims) != 1:
            raise ValueError("linear models take layer_dims=(d_in,)")
        if self.activation not in ("tanh", "relu"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def dims(self) -> tuple[int, ...]:
        """Affine chain including the implicit one-dimensional output."""
        return self.layer_dims + (1,)

    @property
    def d_in(self) -> int:
        return self.layer_dims[0]

    @property
    def n_params(self) -> int:
        b = 1 if self.bias else 0
        return sum(di * do + b * do for di, do in zip(self.dims, self.dims[1:]))


def linear(d_in: int, bias: bool = False) -> ModelSpec:
    """Linear classifier spec; bias off by default for the synthetic benchmark."""
    return ModelSpec(kind="linear", layer_dims=(d_in,), bias=bias)


def mlp(layer_dims: tuple[int, ...], activation: str = "tanh", bias: bool = True) -> ModelSpec:
    return ModelSpec(kind="mlp", layer_dims=tuple(layer_dims), activation=activation, bias=bias)


def _check_params(spec: ModelSpec, params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.ndim != 1 or params.size != spec.n_params:
        raise ValueError(
            f"parameter vector has length {params.size}, spec requires {spec.n_params}"
        )
    return params


def _unpack(spec: ModelSpec, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray | None]]:
    """Split a flat vector into per-layer (W, b) views following the spec layout."""
    layers = []
    off = 0
    for di, do in zip(spec.dims, spec.dims[1:]):
        w = params[off : off + di * do].reshape(di, do)
        off += di * do
        b = None
        if spec.bias:
            b = params[off : off + do]
            off += do
        layers.append((w, b))
    return layers


def param_init(spec: ModelSpec, seed: int) -> np.ndarray:
    """Uniform fan-balanced weight init, zero biases, deterministic per seed.

    Each layer draws from Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)).
    """
    rng = np.random.default_rng(seed)
    parts = []
    for di, do in zip(spec.dims, spec.dims[1:]):
        limit = np.sqrt(6.0 / (di + do))
        parts.append(rng.uniform(-limit, limit, size=di * do))
        if spec.bias:
            parts.append(np.zeros(do))
    return np.concatenate(parts)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activate_deriv(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0.0).astype(np.float64)


def forward(spec: ModelSpec, params: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Logits for a batch, shape (n,). Deterministic in all inputs."""
    params = _check_params(spec, params)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.d_in:
        raise ValueError(f"X has shape {X.shape}, spec expects (n, {spec.d_in})")
    layers = _unpack(spec, params)
    a = X
    for i, (w, b) in enumerate(layers):
        z = a @ w
        if b is not None:
            z = z + b
        a = _activate(z, spec.activation) if i < len(layers) - 1 else z
    return a[:, 0]


def backward(spec: ModelSpec, params: np.ndarray, X: np.ndarray, dlogits: np.ndarray) -> np.ndarray:
    """Gradient of sum_i dlogits[i] * logit_i with respect to the flat params."""
    params = _check_params(spec, params)
    X = np.asarray(X, dtype=np.float64)
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if dlogits.shape != (X.shape[0],):
        raise ValueError("dlogits must be one value per sample")

    layers = _unpack(spec, params)
    acts = [X]  # layer inputs
    pre = []  # pre-activations of hidden layers
    a = X
    for i, (w, b) in enumerate(layers):
        z = a @ w
        if b is not None:
            z = z + b
        if i < len(layers) - 1:
            pre.append(z)
            a = _activate(z, spec.activation)
            acts.append(a)
        else:
            a = z

    grads: list[np.ndarray | None] = [None] * len(layers)
    delta = dlogits[:, None]
    for i in range(len(layers) - 1, -1, -1):
        w, b = layers[i]
        gw = acts[i].T @ delta
        gb = delta.sum(axis=0) if b is not None else None
        grads[i] = (gw, gb)
        if i > 0:
            delta = (delta @ w.T) * _activate_deriv(pre[i - 1], spec.activation)

    flat = []
    for gw, gb in grads:  # type: ignore[misc]
        flat.append(gw.ravel())
        if gb is not None:
            flat.append(gb)
    return np.concatenate(flat)


def stats_pool(frames: np.ndarray) -> np.ndarray:
    """Pool a (T, d) frame sequence to a fixed 3d vector.

    Concatenates the per-dimension temporal mean, the population standard
    deviation, and the mean first-order difference between successive frames.
    Population (not sample) std keeps the constant-sequence case exactly zero
    for every T.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("frames must be a (T, d) matrix")
    if frames.shape[0] < 2:
        raise ValueError("need at least two frames for the first-order difference")
    mean = frames.mean(axis=0)
    std = frames.std(axis=0)  # ddof=0
    diff = np.diff(frames, axis=0).mean(axis=0)
    return np.concatenate([mean, std, diff])
