"""Loading, cleaning, MinMax scaling and stratified splitting of tabular data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_LABEL_COLUMN = "Diabetes_binary"


class DataError(ValueError):
    """Raised when input data violates a loading or preprocessing contract."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, binary labels and column names.

    Shapes are checked on construction. Finiteness is enforced by
    :func:`load_csv` and restored by :func:`clean`, so a dataset holding
    NaN rows can exist between those two steps.
    """

    feature_names: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, copy=True)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(
                f"labels length {y.shape} does not match {X.shape[0]} feature rows"
            )
        if X.shape[1] != len(names):
            raise DataError(
                f"{X.shape[1]} feature columns but {len(names)} feature names"
            )
        if y.size and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y.astype(np.int8)))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n_pos = int(self.labels.sum())
        return self.n_rows - n_pos, n_pos

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.features).all())

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.feature_names, self.features[rows], self.labels[rows])

    def select_columns(self, columns: Sequence[int]) -> "Dataset":
        columns = list(columns)
        return Dataset(
            tuple(self.feature_names[c] for c in columns),
            self.features[:, columns],
            self.labels,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features, equal_nan=True)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True, eq=False)
class ScalerParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.array(self.minimum, dtype=np.float64)
        hi = np.array(self.maximum, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DataError("scaler bounds must be two 1-D arrays of equal length")
        if (lo > hi).any():
            raise DataError("scaler minimum exceeds maximum")
        object.__setattr__(self, "minimum", _frozen(lo))
        object.__setattr__(self, "maximum", _frozen(hi))


@dataclass(frozen=True)
class SplitIndices:
    train_rows: np.ndarray
    test_rows: np.ndarray


@dataclass(frozen=True)
class CleanReport:
    rows_in: int
    duplicate_rows_dropped: int
    invalid_rows_dropped: int
    rows_out: int

    def to_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.__dict__.items())


def load_csv(
    path, label_column: str = DEFAULT_LABEL_COLUMN, allow_nonfinite: bool = False
) -> Dataset:
    """Read a headed, comma-separated numeric file into a :class:`Dataset`.

    With ``allow_nonfinite`` the cells ``nan``/``inf``/empty are kept as NaN
    so that :func:`clean` can count and drop them; otherwise they are errors.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or all(not h.strip() for h in header):
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header")
        rows = list(reader)

    width = len(header)
    rows = [r for r in rows if r]  # tolerate trailing blank lines
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(
                f"{path}: row {i + 2} has {len(r)} cells, header has {width}"
            )
    label_at = header.index(label_column)
    names = tuple(h for j, h in enumerate(header) if j != label_at)

    if allow_nonfinite:
        rows = [[c if c.strip() else "nan" for c in r] for r in rows]
    try:
        table = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    except ValueError:
        table = None
    if table is None:
        for i, r in enumerate(rows):
            for j, cell in enumerate(r):
                try:
                    float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric cell {cell!r} at row {i + 2}, "
                        f"column {j + 1} ({header[j]})"
                    ) from None
        raise DataError(f"{path}: could not parse numeric table")

    labels = table[:, label_at]
    bad = ~np.isin(labels, (0.0, 1.0))
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(
            f"{path}: label {rows[i][label_at]!r} at row {i + 2} is not 0 or 1"
        )
    features = np.delete(table, label_at, axis=1)
    if not allow_nonfinite:
        finite = np.isfinite(features)
        if not finite.all():
            i, j = map(int, np.argwhere(~finite)[0])
            col = j if j < label_at else j + 1
            raise DataError(
                f"{path}: non-finite cell {rows[i][col]!r} at row {i + 2}, "
                f"column {col + 1} ({header[col]})"
            )
    return Dataset(names, features, labels.astype(np.int8))


def clean(data: Dataset) -> tuple[Dataset, CleanReport]:
    """Drop rows with non-finite values, then exact duplicate rows (first kept)."""
    finite = np.isfinite(data.features).all(axis=1)
    X = data.features[finite]
    y = data.labels[finite]

    # +0.0 folds -0.0 into 0.0 so the byte view compares values
    table = np.ascontiguousarray(np.column_stack([X + 0.0, y.astype(np.float64)]))
    keys = table.view(np.dtype((np.void, table.dtype.itemsize * table.shape[1])))
    _, first = np.unique(keys.ravel(), return_index=True)
    keep = np.sort(first)

    out = Dataset(data.feature_names, X[keep], y[keep])
    report = CleanReport(
        rows_in=data.n_rows,
        duplicate_rows_dropped=int(X.shape[0] - keep.size),
        invalid_rows_dropped=int(data.n_rows - X.shape[0]),
        rows_out=out.n_rows,
    )
    if out.n_rows == 0:
        raise DataError("cleaning removed every row")
    if len(np.unique(out.labels)) < 2:
        raise DataError("only one class remains after cleaning")
    return out, report


def fit_minmax(data: Dataset, rows=None) -> ScalerParams:
    """Per-column bounds over ``rows`` (all rows when None)."""
    if rows is None:
        rows = np.arange(data.n_rows)
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise DataError("cannot fit scaler on an empty row list")
    if rows.min() < 0 or rows.max() >= data.n_rows:
        raise DataError("row index out of range")
    X = data.features[rows]
    return ScalerParams(X.min(axis=0), X.max(axis=0))


def minmax_transform(X: np.ndarray, params: ScalerParams) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != params.minimum.size:
        raise DataError(
            f"{X.shape[-1]} columns but scaler was fit on {params.minimum.size}"
        )
    span = params.maximum - params.minimum
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (X - params.minimum) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


def apply_minmax(data: Dataset, params: ScalerParams) -> Dataset:
    """Map each column to [0, 1]; constant columns become 0, outliers clamp."""
    return Dataset(
        data.feature_names, minmax_transform(data.features, params), data.labels
    )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(
    data: Dataset, test_fraction: float = 0.2, seed: int = 0
) -> SplitIndices:
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (0, 1):
        members = np.flatnonzero(data.labels == cls)
        if members.size == 0:
            raise DataError(f"class {cls} is absent; both classes are required")
        n_test = _round_half_up(members.size * test_fraction)
        if n_test < 1 or n_test >= members.size:
            raise DataError(
                f"class {cls} has {members.size} rows; fraction {test_fraction} "
                f"leaves an empty train or test part"
            )
        shuffled = rng.permutation(members)
        test.append(shuffled[:n_test])
        train.append(shuffled[n_test:])
    return SplitIndices(
        train_rows=_frozen(np.sort(np.concatenate(train))),
        test_rows=_frozen(np.sort(np.concatenate(test))),
    )
