import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classeq.metrics import (
    Confusion,
    DegenerateWeightsError,
    accuracy,
    confusion,
    f1,
    macro_f1,
    metrics_report,
    normalized_weights,
    per_class_accuracy,
    predict,
)
from classeq.models import ModelSpec

LINEAR2 = ModelSpec("linear", (2,), bias=False)
LINEAR2B = ModelSpec("linear", (2,), bias=True)

binary_vectors = st.lists(st.integers(0, 1), min_size=1, max_size=60)


class TestConfusion:
    def test_perfect(self):
        c = confusion(np.array([1, 0, 1]), np.array([1, 0, 1]))
        assert (c.tp, c.tn, c.fp, c.fn) == (2, 1, 0, 0)

    def test_hand_count(self):
        preds = np.array([1, 1, 0, 0, 0, 0, 1, 0, 0, 0])
        labels = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0])
        c = confusion(preds, labels)
        assert (c.tp, c.fn, c.fp, c.tn) == (2, 3, 1, 4)

    def test_all_negative_predictor(self):
        labels = np.array([1, 1, 1, 0, 0])
        c = confusion(np.zeros(5, dtype=int), labels)
        assert c.fn == 3 and c.tp == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion(np.array([1, 0]), np.array([1]))

    def test_threshold_at_zero_logit(self):
        np.testing.assert_array_equal(predict(np.array([-0.1, 0.0, 0.1])), [0, 0, 1])


class TestF1AndFriends:
    # counts from the hand-count example above: tp=2 fn=3 fp=1 tn=4
    HAND = Confusion(tp=2, fp=1, fn=3, tn=4)

    def test_hand_values(self):
        assert f1(self.HAND, "pos") == pytest.approx(0.5)
        assert f1(self.HAND, "neg") == pytest.approx(8 / 12)
        assert macro_f1(self.HAND) == pytest.approx(7 / 12)
        assert accuracy(self.HAND) == pytest.approx(0.6)
        assert per_class_accuracy(self.HAND) == (pytest.approx(0.4), pytest.approx(0.8))

    def test_perfect_scores(self):
        c = Confusion(tp=3, fp=0, fn=0, tn=2)
        assert f1(c, "pos") == 1.0 and f1(c, "neg") == 1.0
        assert macro_f1(c) == 1.0 and accuracy(c) == 1.0

    def test_majority_collapse_signature(self):
        # all-negative predictions with both classes present
        labels = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
        report = metrics_report(np.zeros(10, dtype=int), labels)
        assert report.pos_f1 == 0.0
        assert report.neg_acc == 1.0
        assert report.collapsed
        assert not report.pos_absent

    def test_empty_confusion(self):
        with pytest.raises(ValueError):
            accuracy(Confusion(0, 0, 0, 0))

    def test_absent_class_flagged(self):
        report = metrics_report(np.array([1, 1]), np.array([1, 1]))
        assert report.neg_absent and report.neg_acc == 0.0
        assert not report.collapsed

    @given(binary_vectors, binary_vectors)
    @settings(max_examples=80, deadline=None)
    def test_swap_invariance_and_identity(self, preds, labels):
        n = min(len(preds), len(labels))
        p = np.array(preds[:n])
        l = np.array(labels[:n])
        c = confusion(p, l)
        swapped = confusion(1 - p, 1 - l)
        assert macro_f1(c) == pytest.approx(macro_f1(swapped), abs=1e-12)
        # accuracy equals the prior-weighted per-class accuracies
        if 0 < l.sum() < n:
            prior = l.mean()
            pos_acc, neg_acc = per_class_accuracy(c)
            assert accuracy(c) == pytest.approx(prior * pos_acc + (1 - prior) * neg_acc, abs=1e-12)
        assert 0.0 <= macro_f1(c) <= 1.0
        assert 0.0 <= accuracy(c) <= 1.0


class TestNormalizedWeights:
    def test_three_four_five(self):
        np.testing.assert_allclose(normalized_weights(LINEAR2, np.array([3.0, 4.0])), [0.6, 0.8])

    def test_scale_invariance(self):
        base = np.array([0.858, -0.514])
        for k in (0.25, 1.0, 40.0):
            w = normalized_weights(LINEAR2, k * base)
            np.testing.assert_allclose(w, base / np.linalg.norm(base), atol=1e-12)
            np.testing.assert_allclose(w, [0.858, -0.514], atol=5e-4)
            assert np.argmax(np.abs(w)) == 0

    def test_bias_excluded(self):
        w = normalized_weights(LINEAR2B, np.array([3.0, 4.0, 17.0]))
        np.testing.assert_allclose(w, [0.6, 0.8])

    def test_zero_vector(self):
        with pytest.raises(DegenerateWeightsError):
            normalized_weights(LINEAR2, np.zeros(2))

    def test_linear_only(self):
        with pytest.raises(ValueError):
            normalized_weights(ModelSpec("mlp", (2, 3)), np.zeros(13))
