"""k-nearest-neighbour vote."""

import numpy as np

from diabml._neighbors import nearest
from diabml.classifiers.core import ClassifierError, ClassifierKind, register


def fit_knn(X, y, settings, rng):
    k = int(settings["k"])
    if not 1 <= k <= X.shape[0]:
        raise ClassifierError(f"knn: k={k} but only {X.shape[0]} training rows")
    return {"train_x": X.copy(), "train_y": y.astype(np.int8)}


def score_knn(params, X, settings):
    idx = nearest(params["train_x"], X, int(settings["k"]))
    return params["train_y"][idx].mean(axis=1)


register(ClassifierKind.KNN)((fit_knn, score_knn))
