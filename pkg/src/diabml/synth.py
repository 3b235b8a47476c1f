"""Synthetic tabular data whose labels depend on a known set of columns."""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from diabml.dataio import DEFAULT_LABEL_COLUMN, Dataset

# spread across the 21 columns so recovery cannot exploit position
PLANTED_INFORMATIVE = (0, 2, 4, 7, 9, 12, 14, 17, 19)


def synth_dataset(
    seed: int,
    rows: int,
    informative: Sequence[int] = PLANTED_INFORMATIVE,
    noise_features: int = 12,
    flip_rate: float = 0.0,
    imbalance: float = 0.5,
) -> Dataset:
    """Uniform [0, 1] features with labels from a seeded linear score.

    The table has ``len(informative) + noise_features`` columns. A row is
    positive when its score over the informative columns is among the top
    ``imbalance`` share; each label is then flipped with ``flip_rate``.
    """
    informative = [int(i) for i in informative]
    total = len(informative) + int(noise_features)
    if noise_features < 0 or not informative:
        raise ValueError("need at least one informative column and noise_features >= 0")
    if len(set(informative)) != len(informative) or min(informative) < 0 or max(informative) >= total:
        raise ValueError(f"informative indices must be distinct and in [0, {total})")
    if not 0.0 <= flip_rate < 0.5:
        raise ValueError(f"flip_rate must be in [0, 0.5), got {flip_rate}")
    if not 0.0 < imbalance <= 1.0:
        raise ValueError(f"imbalance must be in (0, 1], got {imbalance}")
    if rows < 2:
        raise ValueError("rows must be at least 2")

    rng = np.random.default_rng(seed)
    X = rng.random((rows, total))
    weights = rng.uniform(0.5, 1.5, size=len(informative))
    score = X[:, informative] @ weights
    n_pos = int(np.floor(imbalance * rows + 0.5))
    labels = np.zeros(rows, dtype=np.int8)
    labels[np.argsort(-score, kind="stable")[:n_pos]] = 1
    flips = rng.random(rows) < flip_rate
    labels[flips] = 1 - labels[flips]
    names = tuple(f"f{j + 1}" for j in range(total))
    return Dataset(names, X, labels)


def write_csv(data: Dataset, path, label_column: str = DEFAULT_LABEL_COLUMN) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([label_column, *data.feature_names])
        for label, row in zip(data.labels, data.features):
            writer.writerow([int(label), *(repr(float(v)) for v in row)])
