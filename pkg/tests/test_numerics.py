import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classeq.models import forward
from classeq.numerics import (
    LRSchedule,
    adam_init,
    adam_step,
    central_difference,
    cosine_warmup_lr,
    finite_diff_grad,
    value_and_grad,
)
from classeq.objectives import EmptyClassError, ObjectiveSpec

from conftest import LINEAR_BIAS, LINEAR_NOBIAS, MLP_TANH, random_batch, random_params

ALL_OBJECTIVES = [
    ObjectiveSpec("erm"),
    ObjectiveSpec("erm_cls_w", alpha_pos=2.2, alpha_neg=0.7),
    ObjectiveSpec("erm_per_cls"),
    ObjectiveSpec("cls_ineq"),
    ObjectiveSpec("gdro", tau=1.7),
    ObjectiveSpec("total", alpha=0.8, tau=1.7),
]


class TestValueAndGrad:
    def test_linear_bce_closed_form(self):
        X = np.array([[1.0, 2.0]])
        y = np.array([1])
        loss, grad = value_and_grad(LINEAR_BIAS, np.zeros(3), ObjectiveSpec("erm"), X, y)
        assert loss == pytest.approx(math.log(2), abs=1e-12)
        np.testing.assert_allclose(grad, [-0.5, -1.0, -0.5], atol=1e-12)

    def test_cls_ineq_at_exact_equality(self):
        # identical logits for both classes: the gap is zero and the
        # subgradient convention sign(0)=0 gives a zero gradient
        X = np.array([[1.0, 2.0], [1.0, 2.0]])
        y = np.array([1, 0])
        loss, grad = value_and_grad(LINEAR_BIAS, np.zeros(3), ObjectiveSpec("cls_ineq"), X, y)
        assert loss == 0.0
        np.testing.assert_allclose(grad, np.zeros(3), atol=0.0)

    def test_missing_class_raises(self):
        X = np.array([[1.0, 2.0], [0.5, 0.1]])
        y = np.array([1, 1])
        with pytest.raises(EmptyClassError):
            value_and_grad(LINEAR_BIAS, np.zeros(3), ObjectiveSpec("erm_per_cls"), X, y)

    def test_layout_mismatch(self):
        X = np.array([[1.0, 2.0]])
        with pytest.raises(ValueError):
            value_and_grad(LINEAR_BIAS, np.zeros(5), ObjectiveSpec("erm"), X, np.array([1]))

    def test_deterministic(self, rng):
        X, y = random_batch(rng)
        params = random_params(MLP_TANH, rng)
        obj = ObjectiveSpec("total", alpha=0.5, tau=2.0)
        a = value_and_grad(MLP_TANH, params, obj, X, y)
        b = value_and_grad(MLP_TANH, params, obj, X, y)
        assert a[0] == b[0]
        assert (a[1] == b[1]).all()

    @pytest.mark.parametrize("spec", [LINEAR_BIAS, LINEAR_NOBIAS, MLP_TANH],
                             ids=["linear", "linear_nobias", "mlp_tanh"])
    @pytest.mark.parametrize("objective", ALL_OBJECTIVES, ids=lambda o: o.kind)
    def test_matches_finite_differences(self, spec, objective, rng):
        for _ in range(5):
            X, y = random_batch(rng, n=24, d=spec.d_in)
            params = random_params(spec, rng)
            _, grad = value_and_grad(spec, params, objective, X, y)
            fd = finite_diff_grad(spec, params, objective, X, y, h=1e-6)
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)

    def test_gdro_gradient_is_frozen_mixture_of_class_gradients(self, rng):
        # stop-gradient contract: gradient equals w_pos * grad(l_pos) +
        # w_neg * grad(l_neg) with the softmax weights held constant
        X, y = random_batch(rng, n=30)
        params = random_params(LINEAR_BIAS, rng)
        obj = ObjectiveSpec("gdro", tau=2.5)
        _, grad = value_and_grad(LINEAR_BIAS, params, obj, X, y)

        from classeq.objectives import class_losses, gdro as gdro_fn
        l_pos, l_neg = class_losses(forward(LINEAR_BIAS, params, X), y)
        _, w_pos, w_neg = gdro_fn(l_pos, l_neg, 2.5)
        _, g_pos = value_and_grad(LINEAR_BIAS, params, ObjectiveSpec("erm"), X[y == 1], y[y == 1])
        _, g_neg = value_and_grad(LINEAR_BIAS, params, ObjectiveSpec("erm"), X[y == 0], y[y == 0])
        np.testing.assert_allclose(grad, w_pos * g_pos + w_neg * g_neg, atol=1e-12)


class TestFiniteDiff:
    def test_quadratic_oracle(self):
        grad = central_difference(lambda p: float(np.sum(p * p)), np.array([1.0, -2.0]), h=1e-5)
        np.testing.assert_allclose(grad, [2.0, -4.0], atol=1e-8)

    def test_constant_objective_gives_zero(self):
        # each class holds the pair {x, -x}, so with no bias both class means
        # equal (softplus(z) + softplus(-z)) / 2 for every parameter vector
        # and cls_ineq is identically zero
        x = np.array([0.3, -1.2])
        X = np.stack([x, -x, x, -x])
        y = np.array([1, 1, 0, 0])
        params = np.array([0.4, -0.2])
        fd = finite_diff_grad(LINEAR_NOBIAS, params, ObjectiveSpec("cls_ineq"), X, y)
        np.testing.assert_allclose(fd, np.zeros(2), atol=1e-9)

    def test_matches_closed_form_bce(self):
        X = np.array([[1.0, 2.0]])
        y = np.array([1])
        fd = finite_diff_grad(LINEAR_BIAS, np.zeros(3), ObjectiveSpec("erm"), X, y)
        np.testing.assert_allclose(fd, [-0.5, -1.0, -0.5], rtol=1e-6, atol=1e-10)

    def test_rejects_bad_h(self):
        X = np.array([[1.0, 2.0], [0.1, 0.2]])
        y = np.array([1, 0])
        with pytest.raises(ValueError):
            finite_diff_grad(LINEAR_BIAS, np.zeros(3), ObjectiveSpec("erm"), X, y, h=0.0)


class TestAdam:
    def test_zero_gradient_is_fixed_point(self):
        state = adam_init(3)
        params = np.array([1.0, -2.0, 0.5])
        new_state, new_params = adam_step(state, params, np.zeros(3), lr=0.01)
        assert (new_params == params).all()
        assert new_state.t == 1

    def test_first_step_magnitude(self):
        state = adam_init(2)
        grad = np.array([1.0, -3.0])
        _, new_params = adam_step(state, np.zeros(2), grad, lr=0.001)
        delta = np.abs(new_params)
        assert np.all(delta > 0.000999) and np.all(delta < 0.001)
        assert np.sign(new_params[0]) == -1 and np.sign(new_params[1]) == 1

    def test_decoupled_decay(self):
        state = adam_init(1)
        _, new_params = adam_step(state, np.array([1.0]), np.zeros(1), lr=0.1, weight_decay=0.01)
        assert new_params[0] == pytest.approx(0.999, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adam_step(adam_init(2), np.zeros(3), np.zeros(3), lr=0.1)

    def test_step_counter_increments(self):
        state = adam_init(1)
        for expected in (1, 2, 3):
            state, _ = adam_step(state, np.zeros(1), np.ones(1), lr=0.1)
            assert state.t == expected


class TestCosineWarmup:
    SCHED = LRSchedule(peak_lr=3e-3, warmup_ratio=0.1, total_iterations=100)

    def test_peak_at_warmup_end(self):
        assert cosine_warmup_lr(self.SCHED, 10) == pytest.approx(3e-3)

    def test_linear_ramp_midpoint(self):
        assert cosine_warmup_lr(self.SCHED, 5) == pytest.approx(1.5e-3)

    def test_zero_at_end(self):
        assert cosine_warmup_lr(self.SCHED, 100) == pytest.approx(0.0, abs=1e-18)

    def test_starts_at_zero_with_warmup(self):
        assert cosine_warmup_lr(self.SCHED, 0) == 0.0

    def test_no_warmup_starts_at_peak(self):
        sched = LRSchedule(peak_lr=0.01, warmup_ratio=0.0, total_iterations=10)
        assert cosine_warmup_lr(sched, 0) == pytest.approx(0.01)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            cosine_warmup_lr(self.SCHED, 101)

    @given(st.floats(min_value=1e-5, max_value=1.0), st.floats(0.0, 1.0), st.integers(1, 500))
    @settings(max_examples=60, deadline=None)
    def test_bounds_and_monotone_decay(self, peak, ratio, total):
        sched = LRSchedule(peak, ratio, total)
        values = [cosine_warmup_lr(sched, t) for t in range(total + 1)]
        assert all(0.0 <= v <= peak + 1e-15 for v in values)
        t_w = math.ceil(ratio * total)
        assert values[t_w] == pytest.approx(peak, rel=1e-12)
        tail = values[t_w:]
        assert all(a >= b - 1e-15 for a, b in zip(tail, tail[1:]))
