"""Scoring for link diagnoses and label predictions.

Degenerate-denominator conventions (CONVENTION_VERSION below, recorded in
every experiment report):

* precision with nothing claimed (TP+FP = 0) is 1.0;
* recall with nothing to find (TP+FN = 0) is 1.0;
* F-beta is 0.0 when precision and recall are both zero.
"""

from __future__ import annotations

import math

import numpy as np

CONVENTION_VERSION = 1


def confusion(truth, est):
    """(TP, FP, FN, TN) on the positive (congested) class."""
    t = np.asarray(truth).astype(bool)
    e = np.asarray(est).astype(bool)
    if t.shape != e.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {e.shape}")
    tp = int((t & e).sum())
    fp = int((~t & e).sum())
    fn = int((t & ~e).sum())
    tn = int((~t & ~e).sum())
    return tp, fp, fn, tn


def precision(truth, est) -> float:
    tp, fp, _, _ = confusion(truth, est)
    return tp / (tp + fp) if tp + fp else 1.0


def recall(truth, est) -> float:
    tp, _, fn, _ = confusion(truth, est)
    return tp / (tp + fn) if tp + fn else 1.0


def f_beta(truth, est, beta: float = 1.0) -> float:
    p = precision(truth, est)
    r = recall(truth, est)
    if p == 0.0 and r == 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * p * r / (b2 * p + r)


def f1(truth, est) -> float:
    return f_beta(truth, est, beta=1.0)


def nrmse(y, y_hat) -> float:
    """sqrt(sum |y - y_hat|^2 / sum |y|^2); NaN when y is all zero."""
    yv = np.asarray(y, dtype=np.float64)
    hv = np.asarray(y_hat, dtype=np.float64)
    if yv.shape != hv.shape:
        raise ValueError(f"length mismatch: {yv.shape} vs {hv.shape}")
    denom = float((yv * yv).sum())
    if denom == 0.0:
        return math.nan
    num = float(((yv - hv) ** 2).sum())
    return math.sqrt(num / denom)


def absolute_accuracy(labels, preds) -> float:
    """Fraction of exactly correct predictions."""
    lv = np.asarray(labels)
    pv = np.asarray(preds)
    if lv.shape != pv.shape:
        raise ValueError(f"length mismatch: {lv.shape} vs {pv.shape}")
    if lv.size == 0:
        raise ValueError("empty batch")
    return float((lv == pv).mean())


def relative_accuracy(labels, preds) -> float:
    """Mean of 1 - |y - y_hat| / (max(Y) - min(Y)), range over this batch.

    Falls back to absolute accuracy when the batch's labels have zero range.
    """
    lv = np.asarray(labels, dtype=np.float64)
    pv = np.asarray(preds, dtype=np.float64)
    if lv.shape != pv.shape:
        raise ValueError(f"length mismatch: {lv.shape} vs {pv.shape}")
    if lv.size == 0:
        raise ValueError("empty batch")
    span = float(lv.max() - lv.min())
    if span == 0.0:
        return absolute_accuracy(labels, preds)
    return float((1.0 - np.abs(lv - pv) / span).mean())
