"""Slow, obviously-correct reference computations used as test oracles."""

import math
from fractions import Fraction


def tally(truth, predicted):
    tp = fp = tn = fn = 0
    for t, p in zip(truth, predicted):
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 1:
            fp += 1
        elif t == 0 and p == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def metric_values(tp, fp, tn, fn):
    """Exact rational evaluation; None marks a zero denominator."""

    def frac(num, den):
        return None if den == 0 else float(Fraction(num, den))

    mcc_den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    return {
        "accuracy": frac(tp + tn, tp + tn + fp + fn),
        "sensitivity": frac(tp, tp + fn),
        "specificity": frac(tn, tn + fp),
        "precision": frac(tp, tp + fp),
        "f1": frac(2 * tp, 2 * tp + fp + fn),
        "mcc": None if mcc_den == 0 else (tp * tn - fp * fn) / math.sqrt(mcc_den),
    }


def pairwise_auc(truth, scores):
    pos = [s for t, s in zip(truth, scores) if t == 1]
    neg = [s for t, s in zip(truth, scores) if t == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (len(pos) * len(neg))


def threshold_sweep(truth, scores):
    """(fpr, tpr) for "predict 1 when score >= t" over every distinct score."""
    n_pos = sum(truth)
    n_neg = len(truth) - n_pos
    points = [(0.0, 0.0)]
    for t in sorted(set(scores), reverse=True):
        tp, fp, _, _ = tally(truth, [1 if s >= t else 0 for s in scores])
        points.append((fp / n_neg, tp / n_pos))
    return points
