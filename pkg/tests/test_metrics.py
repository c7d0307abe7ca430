import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acslab import metrics


def test_confusion_counts():
    assert metrics.confusion([1, 1, 0, 0], [1, 0, 1, 0]) == (1, 1, 1, 1)


def test_perfect_diagnosis():
    t = [1, 0, 1]
    assert metrics.precision(t, t) == 1.0
    assert metrics.recall(t, t) == 1.0
    assert metrics.f1(t, t) == 1.0


def test_partial_recall_hand_example():
    truth = [1, 1, 0]
    est = [1, 0, 0]
    assert metrics.recall(truth, est) == pytest.approx(0.5)
    assert metrics.precision(truth, est) == 1.0
    assert metrics.f1(truth, est) == pytest.approx(2 / 3)


def test_all_negative_convention():
    z = [0, 0, 0]
    assert metrics.precision(z, z) == 1.0
    assert metrics.recall(z, z) == 1.0


def test_f_beta_zero_when_no_overlap():
    assert metrics.f_beta([1, 0], [0, 1], beta=2.0) == 0.0


def test_f1_is_harmonic_mean():
    truth = [1, 1, 0, 0]
    est = [1, 0, 1, 0]
    p = metrics.precision(truth, est)
    r = metrics.recall(truth, est)
    assert metrics.f1(truth, est) == pytest.approx(2 * p * r / (p + r))


def test_nrmse_examples():
    assert metrics.nrmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert metrics.nrmse([3.0, 4.0], [0.0, 0.0]) == pytest.approx(1.0)
    assert metrics.nrmse([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.sqrt(2))
    assert math.isnan(metrics.nrmse([0.0, 0.0], [1.0, 0.0]))


def test_nrmse_scale_invariance():
    rng = np.random.default_rng(0)
    y = rng.random(10) + 0.1
    yh = rng.random(10)
    for c in (2.0, -3.5, 0.01):
        assert metrics.nrmse(c * y, c * yh) == pytest.approx(metrics.nrmse(y, yh))


def test_accuracy_examples():
    assert metrics.absolute_accuracy([0, 1, 2], [0, 1, 2]) == 1.0
    assert metrics.relative_accuracy([0, 1, 2], [0, 1, 2]) == 1.0
    assert metrics.absolute_accuracy([0, 2], [2, 0]) == 0.0
    assert metrics.relative_accuracy([0, 2], [2, 0]) == 0.0
    assert metrics.absolute_accuracy([0, 1, 2], [0, 1, 1]) == pytest.approx(2 / 3)
    assert metrics.relative_accuracy([0, 1, 2], [0, 1, 1]) == pytest.approx(5 / 6)


def test_relative_accuracy_zero_range_falls_back():
    assert metrics.relative_accuracy([1, 1], [1, 0]) == 0.5


@settings(max_examples=200, derandomize=True)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=20), st.data())
def test_relative_at_least_absolute_for_in_range_preds(labels, data):
    lo, hi = min(labels), max(labels)
    preds = data.draw(st.lists(st.integers(lo, hi), min_size=len(labels),
                               max_size=len(labels)))
    rel = metrics.relative_accuracy(labels, preds)
    ab = metrics.absolute_accuracy(labels, preds)
    assert rel >= ab - 1e-12


def test_length_mismatch_raises():
    with pytest.raises(ValueError):
        metrics.nrmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        metrics.absolute_accuracy([1], [1, 2])
    with pytest.raises(ValueError):
        metrics.confusion([1], [1, 0])
