"""Classifier kinds, configuration, trained-model container and dispatch."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class ClassifierError(ValueError):
    pass


class ClassifierKind(str, enum.Enum):
    NAIVE_BAYES = "naive_bayes"
    LOGISTIC_REGRESSION = "logistic_regression"
    DECISION_TREE = "decision_tree"
    KNN = "knn"
    RANDOM_FOREST = "random_forest"
    LINEAR_SVM = "linear_svm"
    MLP = "mlp"
    ADABOOST = "adaboost"

    def __str__(self):
        return self.value


ALL_KINDS: tuple[ClassifierKind, ...] = tuple(ClassifierKind)

DEFAULT_SETTINGS: dict[ClassifierKind, dict[str, Any]] = {
    ClassifierKind.NAIVE_BAYES: {"var_floor": 1e-9},
    ClassifierKind.LOGISTIC_REGRESSION: {"learning_rate": 0.1, "epochs": 500},
    ClassifierKind.DECISION_TREE: {"max_depth": 12, "min_samples_split": 2},
    ClassifierKind.KNN: {"k": 5},
    ClassifierKind.RANDOM_FOREST: {
        "n_trees": 100,
        "max_depth": 12,
        "min_samples_split": 2,
        "max_features": None,  # None -> floor(sqrt(n_features))
    },
    ClassifierKind.LINEAR_SVM: {"lam": 1e-4, "epochs": 20, "batch_size": 1},
    ClassifierKind.MLP: {
        "hidden": 32,
        "learning_rate": 0.1,
        "epochs": 50,
        "batch_size": 32,
        "init_scale": 0.5,
    },
    ClassifierKind.ADABOOST: {"n_rounds": 100},
}


@dataclass(frozen=True)
class ClassifierConfig:
    kind: ClassifierKind
    settings: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        kind = ClassifierKind(self.kind)
        object.__setattr__(self, "kind", kind)
        unknown = set(self.settings) - set(DEFAULT_SETTINGS[kind])
        if unknown:
            raise ClassifierError(f"unknown {kind} settings: {sorted(unknown)}")

    def resolved(self) -> dict[str, Any]:
        return {**DEFAULT_SETTINGS[self.kind], **self.settings}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Learned parameters of one classifier; arrays are read-only."""

    kind: ClassifierKind
    n_features: int
    params: dict[str, np.ndarray]
    settings: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ClassifierKind(self.kind))
        frozen = {}
        for name, value in self.params.items():
            arr = np.array(value, copy=True)
            arr.setflags(write=False)
            frozen[name] = arr
        object.__setattr__(self, "params", frozen)

    # logistic regression exposes its bias and weight vector directly
    @property
    def bias(self) -> float:
        return float(self.params["bias"])

    @property
    def weights(self) -> np.ndarray:
        return self.params["weights"]


FitFn = Callable[[np.ndarray, np.ndarray, dict, np.random.Generator], dict]
ScoreFn = Callable[[dict, np.ndarray, dict], np.ndarray]
_REGISTRY: dict[ClassifierKind, tuple[FitFn, ScoreFn]] = {}


def register(kind: ClassifierKind):
    def deco(pair):
        _REGISTRY[kind] = pair
        return pair

    return deco


def _check_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ClassifierError("features must be 2-D with one label per row")
    if X.shape[0] < 2:
        raise ClassifierError("training needs at least two rows")
    if not np.isfinite(X).all():
        raise ClassifierError("training features contain non-finite values")
    if not np.isin(y, (0, 1)).all():
        raise ClassifierError("labels must be 0 or 1")
    if y.min() == y.max():
        raise ClassifierError("training labels contain a single class")
    return X, y.astype(np.int64)


def train(config: ClassifierConfig, features, labels) -> TrainedModel:
    X, y = _check_xy(features, labels)
    fit, _ = _REGISTRY[config.kind]
    settings = config.resolved()
    rng = np.random.default_rng(config.seed)
    params = fit(X, y, settings, rng)
    return TrainedModel(config.kind, X.shape[1], params, settings)


def predict_scores(model: TrainedModel, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ClassifierError(
            f"{model.kind} expects {model.n_features} features, got shape {X.shape}"
        )
    _, score = _REGISTRY[model.kind]
    return np.clip(score(model.params, X, model.settings), 0.0, 1.0)


def predict_labels(model: TrainedModel, features) -> np.ndarray:
    return (predict_scores(model, features) >= 0.5).astype(np.int8)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def diverged(kind: ClassifierKind, what: str) -> ClassifierError:
    return ClassifierError(f"{kind} training diverged: {what}")
