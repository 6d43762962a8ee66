import numpy as np
import pytest

from classeq.models import ModelSpec, backward, forward, param_init, stats_pool

from conftest import LINEAR_NOBIAS, MLP_TANH


class TestModelSpec:
    def test_param_counts(self):
        assert ModelSpec("linear", (2,), bias=False).n_params == 2
        assert ModelSpec("linear", (2,), bias=True).n_params == 3
        assert ModelSpec("mlp", (2, 6, 4), bias=True).n_params == (2 * 6 + 6) + (6 * 4 + 4) + (4 + 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            ModelSpec("conv", (2,))
        with pytest.raises(ValueError):
            ModelSpec("mlp", ())
        with pytest.raises(ValueError):
            ModelSpec("linear", (2, 3))
        with pytest.raises(ValueError):
            ModelSpec("mlp", (2, 0))
        with pytest.raises(ValueError):
            ModelSpec("mlp", (2, 3), activation="gelu")


class TestParamInit:
    def test_deterministic_per_seed(self):
        a = param_init(MLP_TANH, 7)
        b = param_init(MLP_TANH, 7)
        c = param_init(MLP_TANH, 8)
        assert (a == b).all()
        assert not (a == c).all()

    def test_biases_start_at_zero(self):
        spec = ModelSpec("linear", (3,), bias=True)
        params = param_init(spec, 0)
        assert params[3] == 0.0

    def test_weight_mean_near_zero(self):
        # 10k draws of a 4x4 layer: mean within 3 standard errors of 0
        spec = ModelSpec("mlp", (4, 4), bias=False)
        draws = np.concatenate([param_init(spec, seed)[:16] for seed in range(625)])
        limit = np.sqrt(6.0 / 8.0)
        se = (2 * limit / np.sqrt(12.0)) / np.sqrt(draws.size)
        assert abs(draws.mean()) < 3 * se
        assert np.abs(draws).max() <= limit


class TestForward:
    def test_linear_dot_product(self):
        logits = forward(LINEAR_NOBIAS, np.array([1.0, -1.0]), np.array([[3.0, 1.0]]))
        assert logits[0] == pytest.approx(2.0)

    def test_zero_mlp_outputs_zero(self, rng):
        X = rng.normal(size=(5, 2))
        logits = forward(MLP_TANH, np.zeros(MLP_TANH.n_params), X)
        np.testing.assert_allclose(logits, np.zeros(5))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            forward(LINEAR_NOBIAS, np.array([1.0, -1.0]), np.array([[1.0, 2.0, 3.0]]))

    def test_linear_positive_homogeneity(self, rng):
        X = rng.normal(size=(10, 2))
        w = rng.normal(size=2)
        base = forward(LINEAR_NOBIAS, w, X)
        scaled = forward(LINEAR_NOBIAS, 3.5 * w, X)
        np.testing.assert_allclose(scaled, 3.5 * base, rtol=1e-12)
        assert ((scaled > 0) == (base > 0)).all()

    def test_tanh_hidden_bounded(self, rng):
        # a tanh network's final affine layer sees inputs inside (-1, 1), so
        # huge logits cannot appear no matter the input scale
        spec = ModelSpec("mlp", (2, 8), activation="tanh", bias=False)
        params = rng.normal(size=spec.n_params)
        X = rng.normal(0.0, 100.0, size=(50, 2))
        logits = forward(spec, params, X)
        w_out = params[16:]
        assert np.abs(logits).max() <= np.abs(w_out).sum() + 1e-12

    def test_relu_forward(self, rng):
        spec = ModelSpec("mlp", (2, 4), activation="relu", bias=True)
        params = param_init(spec, 3)
        logits = forward(spec, params, rng.normal(size=(6, 2)))
        assert logits.shape == (6,)
        assert np.isfinite(logits).all()


class TestBackward:
    def test_linear_gradient(self):
        X = np.array([[3.0, 1.0], [0.0, 2.0]])
        dlogits = np.array([1.0, -2.0])
        grad = backward(LINEAR_NOBIAS, np.array([1.0, -1.0]), X, dlogits)
        np.testing.assert_allclose(grad, X.T @ dlogits)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            backward(LINEAR_NOBIAS, np.zeros(2), np.zeros((3, 2)), np.zeros(4))


class TestStatsPool:
    def test_constant_frames(self):
        out = stats_pool(np.full((5, 3), 2.5))
        np.testing.assert_allclose(out, [2.5, 2.5, 2.5, 0, 0, 0, 0, 0, 0])

    def test_ramp_example(self):
        out = stats_pool(np.array([[0.0], [1.0], [2.0]]))
        np.testing.assert_allclose(out, [1.0, np.sqrt(2.0 / 3.0), 1.0], rtol=1e-9)

    def test_output_length(self, rng):
        out = stats_pool(rng.normal(size=(7, 4)))
        assert out.shape == (12,)

    def test_time_reversal(self, rng):
        frames = rng.normal(size=(9, 3))
        fwd = stats_pool(frames)
        rev = stats_pool(frames[::-1])
        np.testing.assert_allclose(rev[:6], fwd[:6], rtol=1e-12)
        np.testing.assert_allclose(rev[6:], -fwd[6:], rtol=1e-12)

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            stats_pool(np.zeros((1, 3)))
