"""From-scratch binary classifiers with a shared train / score interface."""

from diabml.classifiers.core import (
    ALL_KINDS,
    DEFAULT_SETTINGS,
    ClassifierConfig,
    ClassifierError,
    ClassifierKind,
    TrainedModel,
    predict_labels,
    predict_scores,
    train,
)

# importing the implementations registers them
from diabml.classifiers import bayes, boosting, knn, linear, mlp, trees  # noqa: F401
from diabml.classifiers.serialize import (
    dumps_model,
    load_model,
    loads_model,
    read_model,
    save_model,
)

__all__ = [
    "ALL_KINDS",
    "DEFAULT_SETTINGS",
    "ClassifierConfig",
    "ClassifierError",
    "ClassifierKind",
    "TrainedModel",
    "dumps_model",
    "load_model",
    "loads_model",
    "predict_labels",
    "predict_scores",
    "read_model",
    "save_model",
    "train",
]
