"""Operating-point statistics, ROC/AUC and validation threshold selection.

Labels are 1 for glaucoma and 0 for normal. A sample is predicted positive
when its score is greater than or equal to the threshold.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoNegatives, NoPositives, SingleClassData

MIN_SPECIFICITY = 0.8


class Confusion(NamedTuple):
    tp: int
    fn: int
    tn: int
    fp: int


def _as_arrays(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(bool)
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores but {labels.size} labels")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    return scores, labels


def _require_both_classes(labels):
    if labels.all() or not labels.any():
        raise SingleClassData("both glaucoma and normal samples are required")


def confusion(scores, labels, threshold: float) -> Confusion:
    scores, labels = _as_arrays(scores, labels)
    pred = scores >= threshold
    tp = int(np.count_nonzero(pred & labels))
    fp = int(np.count_nonzero(pred & ~labels))
    fn = int(np.count_nonzero(labels)) - tp
    tn = int(np.count_nonzero(~labels)) - fp
    return Confusion(tp, fn, tn, fp)


def sens_spec(counts):
    tp, fn, tn, fp = counts
    if tp + fn == 0:
        raise NoPositives("sensitivity undefined without glaucoma samples")
    if tn + fp == 0:
        raise NoNegatives("specificity undefined without normal samples")
    return tp / (tp + fn), tn / (tn + fp)


def f1_harmonic(sensitivity: float, specificity: float) -> float:
    """Harmonic mean of sensitivity and specificity (0 when both are 0)."""
    total = sensitivity + specificity
    if total == 0:
        return 0.0
    return 2.0 * sensitivity * specificity / total


def roc_curve(scores, labels):
    """ROC vertices swept over the distinct scores, highest first.

    Returns ``(fpr, tpr, thresholds)``; the first vertex is (0, 0) with an
    infinite threshold and the last is (1, 1). Equal scores form one step.
    """
    scores, labels = _as_arrays(scores, labels)
    _require_both_classes(labels)
    tps, fps, thresholds = _cumulative_counts(scores, labels)
    p, n = tps[-1], fps[-1]
    return fps / n, tps / p, thresholds


def _cumulative_counts(scores, labels):
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tps = np.cumsum(y)[last_of_group]
    fps = np.cumsum(~y)[last_of_group]
    return (np.r_[0, tps].astype(np.int64), np.r_[0, fps].astype(np.int64),
            np.r_[np.inf, s[last_of_group]])


def roc_auc(scores, labels):
    """ROC vertices as an ``(m, 2)`` array of (fpr, tpr) and the trapezoidal AUC.

    The area is accumulated in integer counts and divided once, so it agrees
    with the Mann-Whitney pair count up to a single rounding.
    """
    scores, labels = _as_arrays(scores, labels)
    _require_both_classes(labels)
    tps, fps, _ = _cumulative_counts(scores, labels)
    p, n = int(tps[-1]), int(fps[-1])
    # twice the trapezoid area in count units
    doubled = int(np.sum(np.diff(fps) * (tps[1:] + tps[:-1])))
    points = np.column_stack([fps / n, tps / p])
    return points, doubled / (2 * p * n)


def _candidate_thresholds(scores):
    distinct = np.unique(scores)
    mids = (distinct[1:] + distinct[:-1]) / 2
    return np.unique(np.r_[0.0, mids, 1.0])


def operating_points(scores, labels, thresholds):
    """Sensitivity, specificity and harmonic F1 at each threshold (vectorized)."""
    scores, labels = _as_arrays(scores, labels)
    _require_both_classes(labels)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    pos = np.sort(scores[labels])
    neg = np.sort(scores[~labels])
    # count of scores >= threshold
    tp = pos.size - np.searchsorted(pos, thresholds, side="left")
    fp = neg.size - np.searchsorted(neg, thresholds, side="left")
    sens = tp / pos.size
    spec = (neg.size - fp) / neg.size
    denom = sens + spec
    f1 = np.divide(2 * sens * spec, denom, out=np.zeros_like(denom), where=denom > 0)
    return sens, spec, f1


def select_threshold(scores, labels, min_specificity: float = MIN_SPECIFICITY) -> float:
    """Validation operating threshold.

    Candidates are 0, 1 and the midpoints between adjacent distinct scores.
    Among candidates with specificity strictly above ``min_specificity`` the
    one with the highest F1 wins (ties: higher specificity, then lower
    threshold). If no candidate qualifies, the highest specificity wins
    (ties: higher F1, then lower threshold).
    """
    scores, labels = _as_arrays(scores, labels)
    _require_both_classes(labels)
    cand = _candidate_thresholds(scores)
    _, spec, f1 = operating_points(scores, labels, cand)
    feasible = spec > min_specificity
    if feasible.any():
        keys = (cand, -spec, -f1, ~feasible)
    else:
        keys = (cand, -f1, -spec)
    # lexsort: last key is primary
    return float(cand[np.lexsort(keys)[0]])


@dataclass
class EvalReport:
    auc: float
    threshold: float
    sensitivity: float
    specificity: float
    f1: float
    counts: Confusion
    roc_points: np.ndarray

    def as_row(self) -> dict:
        return {
            "auc": self.auc, "threshold": self.threshold, "sensitivity": self.sensitivity,
            "specificity": self.specificity, "f1": self.f1, **self.counts._asdict(),
        }


def evaluate(scores, labels, threshold: float) -> EvalReport:
    points, auc = roc_auc(scores, labels)
    counts = confusion(scores, labels, threshold)
    sens, spec = sens_spec(counts)
    return EvalReport(auc, threshold, sens, spec, f1_harmonic(sens, spec), counts, points)
