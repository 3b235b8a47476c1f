"""Logistic regression (full-batch gradient descent) and a Pegasos linear SVM."""

import numpy as np

from diabml.classifiers.core import ClassifierKind, diverged, register, sigmoid


def log_loss_and_grad(bias: float, weights: np.ndarray, X: np.ndarray, y: np.ndarray):
    """Mean log-loss of P(y=1|x) = sigmoid(bias + x.w) and its gradient."""
    z = bias + X @ weights
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    resid = (sigmoid(z) - y) / X.shape[0]
    return loss, resid.sum(), X.T @ resid


def fit_logistic_regression(X, y, settings, rng):
    lr = settings["learning_rate"]
    bias, weights = 0.0, np.zeros(X.shape[1])
    yf = y.astype(np.float64)
    for _ in range(int(settings["epochs"])):
        loss, g_bias, g_w = log_loss_and_grad(bias, weights, X, yf)
        if not np.isfinite(loss):
            raise diverged(ClassifierKind.LOGISTIC_REGRESSION, f"loss {loss}")
        bias -= lr * g_bias
        weights -= lr * g_w
    return {"bias": np.float64(bias), "weights": weights}


def score_logistic_regression(params, X, settings):
    return sigmoid(params["bias"] + X @ params["weights"])


def fit_linear_svm(X, y, settings, rng):
    """Hinge loss + (lam/2)|w|^2 by Pegasos: step 1/(lam*t), ball projection.

    The bias rides along as a constant feature and is regularised with w.
    """
    lam = float(settings["lam"])
    batch = max(1, int(settings["batch_size"]))
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    s = np.where(y == 1, 1.0, -1.0)
    w = np.zeros(Xa.shape[1])
    radius = 1.0 / np.sqrt(lam)
    n = Xa.shape[0]
    t = 0
    for _ in range(int(settings["epochs"])):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            t += 1
            eta = 1.0 / (lam * t)
            margin = s[idx] * (Xa[idx] @ w)
            active = idx[margin < 1.0]
            w *= 1.0 - eta * lam
            if active.size:
                w += (eta / idx.size) * (s[active] @ Xa[active])
            norm = np.sqrt(w @ w)
            if norm > radius:
                w *= radius / norm
        if not np.isfinite(w).all():
            raise diverged(ClassifierKind.LINEAR_SVM, "non-finite weights")
    return {"weights": w[:-1], "bias": np.float64(w[-1])}


def score_linear_svm(params, X, settings):
    return sigmoid(X @ params["weights"] + params["bias"])


register(ClassifierKind.LOGISTIC_REGRESSION)(
    (fit_logistic_regression, score_logistic_regression)
)
register(ClassifierKind.LINEAR_SVM)((fit_linear_svm, score_linear_svm))
