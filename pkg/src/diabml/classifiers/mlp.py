"""One-hidden-layer perceptron with logistic units, trained by mini-batch SGD."""

import numpy as np

from diabml.classifiers.core import ClassifierKind, diverged, register, sigmoid

PARAM_NAMES = ("w1", "b1", "w2", "b2")


def forward(params, X):
    hidden = sigmoid(X @ params["w1"] + params["b1"])
    z = hidden @ params["w2"] + params["b2"]
    return hidden, z


def loss_and_grads(params, X, y):
    """Mean log-loss and its gradient for every parameter array."""
    hidden, z = forward(params, X)
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    dz = (sigmoid(z) - y) / X.shape[0]
    da = np.outer(dz, params["w2"]) * hidden * (1.0 - hidden)
    grads = {
        "w2": hidden.T @ dz,
        "b2": np.float64(dz.sum()),
        "w1": X.T @ da,
        "b1": da.sum(axis=0),
    }
    return loss, grads


def init_params(n_features, hidden, scale, rng):
    return {
        "w1": rng.uniform(-scale, scale, size=(n_features, hidden)),
        "b1": rng.uniform(-scale, scale, size=hidden),
        "w2": rng.uniform(-scale, scale, size=hidden),
        "b2": np.float64(rng.uniform(-scale, scale)),
    }


def fit_mlp(X, y, settings, rng):
    params = init_params(
        X.shape[1], int(settings["hidden"]), float(settings["init_scale"]), rng
    )
    lr = float(settings["learning_rate"])
    batch = max(1, int(settings["batch_size"]))
    yf = y.astype(np.float64)
    n = X.shape[0]
    for _ in range(int(settings["epochs"])):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            _, grads = loss_and_grads(params, X[idx], yf[idx])
            for name in PARAM_NAMES:
                params[name] = params[name] - lr * grads[name]
        if not all(np.isfinite(params[k]).all() for k in PARAM_NAMES):
            raise diverged(ClassifierKind.MLP, "non-finite weights")
    return params


def score_mlp(params, X, settings):
    _, z = forward(params, X)
    return sigmoid(z)


register(ClassifierKind.MLP)((fit_mlp, score_mlp))
