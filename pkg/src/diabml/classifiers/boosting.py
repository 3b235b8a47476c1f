"""Discrete AdaBoost over decision stumps."""

import numpy as np

from diabml.classifiers.core import ClassifierKind, register, sigmoid

# weighted error treated as zero (perfect stump); alpha is capped there
_PERFECT = 1e-12


def best_stump(X, y, w, order):
    """Lowest weighted-error stump ``h(x) = polarity * sign(x[f] > t)``.

    Ties go to the lower feature, then the lower threshold, then polarity +1.
    Returns (error, feature, threshold, polarity) or None if every column
    is constant.
    """
    xs = np.take_along_axis(X, order, axis=0)
    ws = w[order]
    ys = y[order]
    pos = np.cumsum(ws * ys, axis=0)[:-1]
    neg = np.cumsum(ws * (1 - ys), axis=0)[:-1]
    total = w.sum()
    total_neg = total - (w * y).sum()
    # polarity +1 predicts 0 on the left: errors are left positives + right negatives
    err_up = pos + (total_neg - neg)
    err_down = total - err_up
    valid = xs[1:] > xs[:-1]
    err = np.where(err_up <= err_down, err_up, err_down)
    err = np.where(valid, err, np.inf).T  # (features, positions), row-major tie order
    if not np.isfinite(err).any():
        return None
    f, i = np.unravel_index(np.argmin(err), err.shape)
    lo, hi = xs[i, f], xs[i + 1, f]
    thr = 0.5 * (lo + hi)
    if thr >= hi:
        thr = lo
    polarity = 1 if err_up[i, f] <= err_down[i, f] else -1
    return float(err[f, i]) / total, int(f), float(thr), polarity


def stump_outputs(X, feature, threshold, polarity):
    return polarity * np.where(X[:, feature] > threshold, 1.0, -1.0)


def fit_adaboost(X, y, settings, rng):
    n = X.shape[0]
    order = np.argsort(X, axis=0, kind="stable")
    yf = y.astype(np.float64)
    signs = np.where(y == 1, 1.0, -1.0)
    w = np.full(n, 1.0 / n)
    feats, thrs, pols, alphas = [], [], [], []
    for _ in range(int(settings["n_rounds"])):
        found = best_stump(X, yf, w, order)
        if found is None:
            break
        err, f, thr, pol = found
        if err >= 0.5:
            break
        perfect = err <= _PERFECT
        eps = max(err, _PERFECT)
        alpha = 0.5 * np.log((1.0 - eps) / eps)
        feats.append(f)
        thrs.append(thr)
        pols.append(pol)
        alphas.append(alpha)
        if perfect:
            break
        w = w * np.exp(-alpha * signs * stump_outputs(X, f, thr, pol))
        w /= w.sum()
    return {
        "feature": np.array(feats, dtype=np.int64),
        "threshold": np.array(thrs, dtype=np.float64),
        "polarity": np.array(pols, dtype=np.int64),
        "alpha": np.array(alphas, dtype=np.float64),
    }


def decision_function(params, X):
    total = np.zeros(X.shape[0])
    for f, t, p, a in zip(
        params["feature"], params["threshold"], params["polarity"], params["alpha"]
    ):
        total += a * stump_outputs(X, f, t, p)
    return total


def score_adaboost(params, X, settings):
    return sigmoid(2.0 * decision_function(params, X))


register(ClassifierKind.ADABOOST)((fit_adaboost, score_adaboost))
