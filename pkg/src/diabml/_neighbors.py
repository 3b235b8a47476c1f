"""Brute-force Euclidean k-nearest-neighbour search with index tie-breaking."""

from __future__ import annotations

import numpy as np

# bytes of distance matrix materialised per chunk
_CHUNK_BYTES = 64 * 2**20


def squared_distances(A: np.ndarray, B: np.ndarray, B_sq: np.ndarray | None = None):
    if B_sq is None:
        B_sq = np.einsum("ij,ij->i", B, B)
    A_sq = np.einsum("ij,ij->i", A, A)
    d = A_sq[:, None] + B_sq[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def nearest(
    reference: np.ndarray, queries: np.ndarray, k: int, exclude_self: bool = False
) -> np.ndarray:
    """Indices of the ``k`` nearest reference rows for every query row.

    Rows of the result are ordered by (distance, index). With
    ``exclude_self`` the queries must be the reference set itself and each
    point is barred from its own neighbour list.
    """
    reference = np.ascontiguousarray(reference, dtype=np.float64)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    m = reference.shape[0]
    limit = m - 1 if exclude_self else m
    if k < 1 or k > limit:
        raise ValueError(f"k={k} needs at least {k + exclude_self} reference points, have {m}")

    ref_sq = np.einsum("ij,ij->i", reference, reference)
    out = np.empty((queries.shape[0], k), dtype=np.intp)
    step = max(1, _CHUNK_BYTES // (8 * max(m, 1)))
    for start in range(0, queries.shape[0], step):
        stop = min(start + step, queries.shape[0])
        d = squared_distances(queries[start:stop], reference, ref_sq)
        if exclude_self:
            d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = _k_smallest(d, k)
    return out


def _k_smallest(d: np.ndarray, k: int) -> np.ndarray:
    # exactly k per row: everything strictly below the k-th value, then the
    # lowest-index entries equal to it
    kth = np.partition(d, k - 1, axis=1)[:, k - 1 : k]
    below = d < kth
    need = k - below.sum(axis=1, keepdims=True)
    tied = d == kth
    chosen = below | (tied & (np.cumsum(tied, axis=1) <= need))
    rows, cols = np.nonzero(chosen)
    cols = cols.reshape(d.shape[0], k)
    order = np.argsort(d[rows.reshape(-1, k), cols], axis=1, kind="stable")
    return np.take_along_axis(cols, order, axis=1)
