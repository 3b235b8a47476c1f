"""Gaussian naive Bayes."""

import numpy as np

from diabml.classifiers.core import ClassifierKind, register, sigmoid


def fit_naive_bayes(X, y, settings, rng):
    means, variances, priors = [], [], []
    for cls in (0, 1):
        rows = X[y == cls]
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), settings["var_floor"]))
        priors.append(rows.shape[0] / X.shape[0])
    return {
        "means": np.array(means),
        "variances": np.array(variances),
        "log_priors": np.log(priors),
    }


def joint_log_likelihood(params, X):
    mu, var = params["means"], params["variances"]
    ll = -0.5 * (
        np.log(2.0 * np.pi * var)[None, :, :]
        + (X[:, None, :] - mu[None, :, :]) ** 2 / var[None, :, :]
    ).sum(axis=2)
    return ll + params["log_priors"][None, :]


def score_naive_bayes(params, X, settings):
    jll = joint_log_likelihood(params, X)
    # posterior of class 1 = sigmoid(log-odds), stable for extreme odds
    return sigmoid(jll[:, 1] - jll[:, 0])


register(ClassifierKind.NAIVE_BAYES)((fit_naive_bayes, score_naive_bayes))
