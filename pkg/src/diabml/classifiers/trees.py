"""CART decision tree and bagged random forest."""

import math

import numpy as np

from diabml.classifiers._cart import build_tree, presort, tree_leaf_values
from diabml.classifiers.core import ClassifierKind, register

_TREE_KEYS = ("feature", "threshold", "left", "right", "value")


def fit_decision_tree(X, y, settings, rng, order=None):
    return build_tree(
        X,
        y,
        max_depth=int(settings["max_depth"]),
        min_samples_split=settings["min_samples_split"],
        order=order,
    )


def score_decision_tree(params, X, settings):
    return tree_leaf_values(params, X)


def fit_random_forest(X, y, settings, rng):
    n, n_feat = X.shape
    m = settings["max_features"]
    m = max(1, int(math.isqrt(n_feat))) if m is None else min(int(m), n_feat)
    order = presort(X)
    trees = []
    for _ in range(int(settings["n_trees"])):
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        trees.append(
            build_tree(
                X,
                y,
                max_depth=int(settings["max_depth"]),
                min_samples_split=settings["min_samples_split"],
                weights=counts.astype(np.float64),
                order=order,
                max_features=m,
                rng=rng,
            )
        )
    # trees are stored concatenated; child links are offset to global ids
    offsets = np.cumsum([0] + [t["value"].size for t in trees])
    params = {k: np.concatenate([t[k] for t in trees]) for k in _TREE_KEYS}
    for key in ("left", "right"):
        parts = [np.where(t[key] >= 0, t[key] + off, -1) for t, off in zip(trees, offsets)]
        params[key] = np.concatenate(parts)
    params["roots"] = offsets[:-1].astype(np.int64)
    return params


def forest_votes(params, X):
    """Per-tree hard votes, shape (n_trees, n_rows)."""
    votes = np.empty((params["roots"].size, X.shape[0]), dtype=np.int8)
    for i, root in enumerate(params["roots"]):
        votes[i] = tree_leaf_values(params, X, root=int(root)) >= 0.5
    return votes


def score_random_forest(params, X, settings):
    return forest_votes(params, X).mean(axis=0)


register(ClassifierKind.DECISION_TREE)((fit_decision_tree, score_decision_tree))
register(ClassifierKind.RANDOM_FOREST)((fit_random_forest, score_random_forest))
