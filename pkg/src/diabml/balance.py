"""SMOTE oversampling of the minority class."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from diabml._neighbors import nearest


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not 0.0 < self.target_ratio <= 1.0:
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")


@dataclass(frozen=True)
class SmotePairs:
    """Which minority rows produced each synthetic row (indices into the minority set)."""

    minority_rows: np.ndarray
    parents: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray


def minority_neighbors(points: np.ndarray, k: int) -> np.ndarray:
    """k nearest other points for each point, ordered by (distance, index)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ValueError("need at least two minority points")
    if not 1 <= k <= points.shape[0] - 1:
        raise ValueError(
            f"k={k} too large for {points.shape[0]} minority points"
        )
    return nearest(points, points, k, exclude_self=True)


def interpolate(p: np.ndarray, q: np.ndarray, lam) -> np.ndarray:
    """p + lam * (q - p), row-wise, clipped onto the p-q segment."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim == 1:
        lam = lam[:, None]
    # rounding can push p + lam*(q-p) one ulp past an endpoint
    return np.clip(p + lam * (q - p), np.minimum(p, q), np.maximum(p, q))


def synthetic_count(n_minority: int, n_majority: int, target_ratio: float) -> int:
    # tolerance keeps e.g. 0.7 * 100 from ceiling to 71
    wanted = math.ceil(target_ratio * n_majority - 1e-9)
    return max(0, wanted - n_minority)


def smote_oversample(
    features: np.ndarray,
    labels: np.ndarray,
    config: SmoteConfig = SmoteConfig(),
    return_pairs: bool = False,
):
    """Append interpolated minority rows until the minority:majority ratio is met.

    Parents are visited round-robin over a seeded shuffle of the minority
    rows; each draws one of its k neighbours and a uniform weight.
    Original rows come first, unchanged and in order.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("features must be 2-D with one label per row")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != y.size:
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("SMOTE needs both classes present")

    minority_label = 1 if n_pos < n_neg else 0
    n_min, n_maj = min(n_pos, n_neg), max(n_pos, n_neg)
    n_new = synthetic_count(n_min, n_maj, config.target_ratio)
    minority_rows = np.flatnonzero(y == minority_label)
    if n_new == 0:
        empty = np.empty(0, dtype=np.intp)
        pairs = SmotePairs(minority_rows, empty, empty, np.empty(0))
        return (X.copy(), y.copy(), pairs) if return_pairs else (X.copy(), y.copy())

    if n_min <= config.k_neighbors:
        raise ValueError(
            f"minority class has {n_min} rows; k_neighbors={config.k_neighbors} "
            "needs more"
        )
    P = X[minority_rows]
    nbrs = minority_neighbors(P, config.k_neighbors)

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(n_min)
    parents = order[np.arange(n_new) % n_min]
    picks = rng.integers(0, config.k_neighbors, size=n_new)
    neighbors = nbrs[parents, picks]
    lam = rng.random(n_new)
    synthetic = interpolate(P[parents], P[neighbors], lam)

    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(n_new, minority_label, dtype=y.dtype)])
    if return_pairs:
        return X_out, y_out, SmotePairs(minority_rows, parents, neighbors, lam)
    return X_out, y_out
