import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diabml.metrics import (
    ConfusionCounts,
    RocCurve,
    auc,
    compute_metrics,
    confusion,
    evaluate,
    roc_curve,
)
from oracles import metric_values, pairwise_auc, tally, threshold_sweep

FIELDS = ("accuracy", "sensitivity", "specificity", "precision", "f1", "mcc")


def test_confusion_examples():
    assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionCounts(tp=2, fp=0, tn=1, fn=0)
    assert confusion([1, 1, 0, 0], [0, 0, 1, 1]) == ConfusionCounts(tp=0, fp=2, tn=0, fn=2)


def test_confusion_matches_tally():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        t, p = rng.integers(0, 2, n), rng.integers(0, 2, n)
        c = confusion(t, p)
        assert (c.tp, c.fp, c.tn, c.fn) == tally(t.tolist(), p.tolist())
        assert c.total == n


@pytest.mark.parametrize(
    "truth, predicted", [([1, 0], [1]), ([], []), ([2], [1]), ([[1]], [[1]])]
)
def test_confusion_errors(truth, predicted):
    with pytest.raises(ValueError):
        confusion(truth, predicted)


def test_symmetric_counts():
    r = compute_metrics(ConfusionCounts(tp=40, fp=10, tn=40, fn=10))
    for name in FIELDS[:5]:
        assert getattr(r, name) == pytest.approx(0.8, abs=1e-15)
    assert r.mcc == pytest.approx(0.6, abs=1e-15)
    assert r.undefined == ()


def test_perfect_classifier():
    r = compute_metrics(ConfusionCounts(tp=1, fp=0, tn=1, fn=0))
    assert [getattr(r, f) for f in FIELDS] == [1.0] * 6


def test_mcc_worked_value():
    r = compute_metrics(ConfusionCounts(tp=6, fp=2, tn=5, fn=3))
    assert r.mcc == pytest.approx(24 / math.sqrt(4032), abs=1e-15)
    assert round(r.mcc, 4) == 0.378


def test_zero_denominators_flagged():
    r = compute_metrics(ConfusionCounts(tp=0, fp=0, tn=5, fn=0))
    assert r.sensitivity == r.precision == r.mcc == 0.0
    assert set(r.undefined) == {"sensitivity", "precision", "f1", "mcc"}
    assert r.accuracy == r.specificity == 1.0


def test_all_zero_counts_rejected():
    with pytest.raises(ValueError):
        compute_metrics(ConfusionCounts(0, 0, 0, 0))
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


def test_report_json_is_flat():
    text = evaluate([1, 0, 1, 0], [1, 1, 1, 0]).to_json()
    assert text.startswith('{"accuracy": 0.75')
    assert '"undefined": []' in text


counts = st.tuples(*[st.integers(0, 10**6)] * 4).filter(lambda c: sum(c) > 0)


@given(counts)
def test_metrics_match_oracle(c):
    tp, fp, tn, fn = c
    report = compute_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
    expected = metric_values(tp, fp, tn, fn)
    for name in FIELDS:
        want = expected[name]
        got = getattr(report, name)
        if want is None:
            assert got == 0.0 and name in report.undefined
        else:
            assert got == pytest.approx(want, abs=1e-12)
    assert 0 <= report.accuracy <= 1 and -1 <= report.mcc <= 1


@given(counts)
def test_f1_is_harmonic_mean(c):
    r = compute_metrics(ConfusionCounts(*c))
    if r.precision > 0 and r.sensitivity > 0:
        harmonic = 2 * r.precision * r.sensitivity / (r.precision + r.sensitivity)
        assert r.f1 == pytest.approx(harmonic, abs=1e-12)
    tp, _, _, fn = c
    if tp + fn:
        assert r.sensitivity == tp / (tp + fn)


binary_pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
)


@given(binary_pairs)
def test_mcc_negates_under_prediction_swap(pair):
    truth, predicted = pair
    a = evaluate(truth, predicted).mcc
    b = evaluate(truth, [1 - p for p in predicted]).mcc
    assert b == -a


@given(binary_pairs, st.randoms())
def test_row_permutation_invariance(pair, rnd):
    truth, predicted = pair
    order = list(range(len(truth)))
    rnd.shuffle(order)
    assert evaluate(truth, predicted) == evaluate(
        [truth[i] for i in order], [predicted[i] for i in order]
    )


# -- ROC / AUC --------------------------------------------------------------------


def test_perfect_ranking_passes_through_corner():
    curve = roc_curve([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])
    assert (0.0, 1.0) in curve.points()
    assert auc(curve) == 1.0


def test_single_tie_group():
    curve = roc_curve([0, 1, 0, 1], [0.3] * 4)
    assert curve.points() == [(0.0, 0.0), (1.0, 1.0)]
    assert auc(curve) == 0.5


def test_auc_of_reference_curves():
    assert auc(RocCurve(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 1.0]))) == 1.0
    assert auc(RocCurve(np.array([0.0, 1.0]), np.array([0.0, 1.0]))) == 0.5


def test_roc_matches_threshold_sweep():
    rng = np.random.default_rng(1)
    truth = rng.integers(0, 2, 50).tolist()
    scores = np.round(rng.random(50), 1).tolist()  # coarse values force ties
    assert roc_curve(truth, scores).points() == pytest.approx(threshold_sweep(truth, scores))


def test_roc_csv():
    text = roc_curve([0, 1], [0.2, 0.7]).to_csv()
    assert text == "fpr,tpr\n0.0,0.0\n0.0,1.0\n1.0,1.0\n"


@pytest.mark.parametrize(
    "truth, scores", [([1, 1], [0.1, 0.2]), ([0, 1], [0.1]), ([0, 1], [0.1, np.nan])]
)
def test_roc_errors(truth, scores):
    with pytest.raises(ValueError):
        roc_curve(truth, scores)


score_sets = st.integers(2, 200).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda t: 0 < sum(t) < len(t)),
        st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]) | st.floats(0, 1), min_size=n, max_size=n),
    )
)


@given(score_sets)
def test_auc_matches_pairwise_ranking(data):
    truth, scores = data
    curve = roc_curve(truth, scores)
    assert auc(curve) == pytest.approx(pairwise_auc(truth, scores), abs=1e-9)
    assert curve.points()[0] == (0.0, 0.0) and curve.points()[-1] == (1.0, 1.0)
    assert (np.diff(curve.fpr) >= 0).all() and (np.diff(curve.tpr) >= 0).all()


@given(score_sets)
def test_inverted_scores_complement_auc(data):
    truth, scores = data
    flipped = [1.0 - s for s in scores]
    # 1 - s is monotone, so it keeps every tie; rounding can only merge distinct scores
    if len(set(flipped)) == len(set(scores)):
        assert auc(roc_curve(truth, flipped)) == pytest.approx(
            1.0 - auc(roc_curve(truth, scores)), abs=1e-12
        )
    else:
        assert auc(roc_curve(truth, flipped)) == pytest.approx(pairwise_auc(truth, flipped), abs=1e-12)
