import numpy as np
import pytest

from classeq.models import ModelSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_batch(rng, n=20, d=2, logit_scale=1.0):
    """Two-class batch with at least one sample per class."""
    X = rng.normal(0.0, logit_scale, size=(n, d))
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 1, 0
    return X, y


def random_params(spec: ModelSpec, rng):
    return rng.normal(0.0, 0.7, size=spec.n_params)


LINEAR_BIAS = ModelSpec("linear", (2,), bias=True)
LINEAR_NOBIAS = ModelSpec("linear", (2,), bias=False)
MLP_TANH = ModelSpec("mlp", (2, 6, 4), activation="tanh", bias=True)
