import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glaucofuse.errors import NoNegatives, NoPositives, SingleClassData
from glaucofuse.metrics import (confusion, evaluate, f1_harmonic, operating_points, roc_auc,
                                roc_curve, select_threshold, sens_spec)


def mann_whitney(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def test_confusion_examples():
    assert confusion([], [], 0.5) == (0, 0, 0, 0)
    assert confusion([0.9, 0.2], [1, 0], 0.5) == (1, 0, 1, 0)
    assert confusion([0.9, 0.2, 0.4], [1, 0, 0], 0.0) == (1, 0, 0, 2)
    # score equal to the threshold counts as positive
    assert confusion([0.5], [1], 0.5).tp == 1


def test_sens_spec_examples():
    assert sens_spec((10, 0, 10, 0)) == (1.0, 1.0)
    assert sens_spec((1, 1, 3, 1)) == (0.5, 0.75)
    assert sens_spec((0, 5, 2, 2))[0] == 0.0
    with pytest.raises(NoPositives):
        sens_spec((0, 0, 1, 1))
    with pytest.raises(NoNegatives):
        sens_spec((1, 1, 0, 0))


def test_f1_values():
    assert f1_harmonic(0.8655, 0.8457) == pytest.approx(0.8555, abs=1e-4)
    assert f1_harmonic(0.95, 0.8722) == pytest.approx(0.9094, abs=1e-4)
    assert f1_harmonic(0.0, 0.0) == 0.0


@given(st.floats(0, 1))
def test_f1_idempotent(x):
    assert f1_harmonic(x, x) == pytest.approx(x)


def test_auc_examples():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])[1] == 1.0
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])[1] == 0.75
    pts, auc = roc_auc([0.3] * 4, [0, 1, 0, 1])
    assert auc == 0.5 and pts.tolist() == [[0, 0], [1, 1]]
    with pytest.raises(SingleClassData):
        roc_auc([0.1, 0.2], [1, 1])


def test_roc_curve_endpoints():
    fpr, tpr, thr = roc_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert (fpr[0], tpr[0], thr[0]) == (0.0, 0.0, np.inf)
    assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)


labelled = st.lists(st.tuples(st.integers(0, 8).map(lambda k: k / 8), st.booleans()),
                    min_size=2, max_size=30).filter(lambda xs: 0 < sum(y for _, y in xs) < len(xs))


@settings(max_examples=200)
@given(labelled)
def test_auc_matches_pair_count(data):
    scores, labels = zip(*data)
    assert abs(roc_auc(scores, labels)[1] - mann_whitney(scores, labels)) < 1e-12


@settings(max_examples=100)
@given(labelled)
def test_auc_invariant_under_monotone_map(data):
    scores, labels = map(np.array, zip(*data))
    assert roc_auc(np.exp(3 * scores) - 7, labels)[1] == roc_auc(scores, labels)[1]


@settings(max_examples=100)
@given(labelled)
def test_auc_of_reversed_scores_is_complement(data):
    scores, labels = map(np.array, zip(*data))
    assert roc_auc(-scores, labels)[1] == pytest.approx(1 - roc_auc(scores, labels)[1], abs=1e-12)


def test_select_threshold_separated():
    scores = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9]
    labels = [0, 0, 0, 1, 1, 1]
    t = select_threshold(scores, labels)
    assert t == pytest.approx(0.5)
    assert evaluate(scores, labels, t).f1 == 1.0


def test_select_threshold_falls_back_to_one():
    # every normal outscores every glaucoma case, so only t=1 keeps spec above 0.8
    scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.1, 0.2]
    labels = [0, 0, 0, 0, 0, 1, 1]
    assert select_threshold(scores, labels) == 1.0


def test_select_threshold_prefers_spec_on_f1_tie():
    # two operating points share F1; the higher-specificity one wins
    scores = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95])
    labels = np.array([0, 0, 0, 0, 0, 1, 0, 1, 1, 1])
    t = select_threshold(scores, labels, min_specificity=0.0)
    sens, spec, f1 = operating_points(scores, labels, [t])
    cand = np.linspace(0, 1, 10001)
    s2, p2, f2 = operating_points(scores, labels, cand)
    best = f2.max()
    assert f1[0] == pytest.approx(best)
    assert spec[0] == p2[np.isclose(f2, best)].max()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_select_threshold_not_dominated(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 80))
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    scores = np.round(np.clip(rng.normal(0.5 + 0.2 * (labels - 0.5), 0.2), 0, 1), 3)
    t = select_threshold(scores, labels)
    _, spec, f1 = operating_points(scores, labels, [t])
    _, gs, gf = operating_points(scores, labels, np.round(np.arange(10001) * 1e-4, 4))
    dominated = (gf >= f1[0]) & (gs >= spec[0]) & ((gf > f1[0]) | (gs > spec[0]))
    assert not dominated.any()


def test_evaluate_report_row():
    rep = evaluate([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1], 0.3)
    row = rep.as_row()
    assert row["auc"] == 0.75 and row["tp"] == 2 and row["fp"] == 1
    assert rep.sensitivity == 1.0 and rep.specificity == 0.5
