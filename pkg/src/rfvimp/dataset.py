"""Dataset container, CSV ingestion and stratified fold assignment."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .rng import TAG_FOLDS, SeedSpec

#: Cell contents treated as missing during ingestion.
MISSING_TOKENS = {"", "NA", "NaN", "nan", "?"}


class DataError(ValueError):
    """Raised when input data violates a precondition (CLI exit code 2)."""


@dataclass(frozen=True)
class Dataset:
    """Numeric feature matrix with binary labels.

    Label 1 is the minority class by convention (``n1 <= n0``); ingestion
    enforces this via ``positive_label`` and warns when the user's mapping
    makes the positive class the majority.
    """

    features: np.ndarray  # (n, p) float64
    labels: np.ndarray    # (n,) int8 over {0, 1}
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape != (n,):
            raise DataError("labels length must match the number of rows")
        if not np.isfinite(X).all():
            raise DataError("features contain non-finite values")
        if not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0/1")
        if y.min() == y.max():
            raise DataError("both label values must be present")
        names = self.feature_names or tuple(f"x{j + 1}" for j in range(p))
        object.__setattr__(self, "feature_names", tuple(names))
        if len(self.feature_names) != p or len(set(self.feature_names)) != p:
            raise DataError("feature_names must be unique and match p")
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def n1(self) -> int:
        return int(self.labels.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    def restrict(self, columns) -> "Dataset":
        """Dataset with only the given feature columns (order preserved)."""
        cols = list(columns)
        return Dataset(
            np.ascontiguousarray(self.features[:, cols]),
            self.labels,
            tuple(self.feature_names[j] for j in cols),
        )

    def subset(self, rows) -> "Dataset":
        return Dataset(
            np.ascontiguousarray(self.features[rows]),
            self.labels[rows],
            self.feature_names,
        )


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray  # (n,) int32 over {1..k}
    k: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def imbalance_ratio(dataset: Dataset) -> float:
    """n0 / n1; >= 1 under the minority convention."""
    return dataset.n0 / dataset.n1


def load_csv(path, label_column: str, positive_label: str,
             encoding_policy: str = "one-hot") -> Dataset:
    """Load an RFC-4180-style CSV with a header row into a Dataset.

    Rows containing any missing cell (one of ``MISSING_TOKENS``) are
    rejected; the count is reported in the error detail if nothing
    survives. Non-numeric columns are encoded per ``encoding_policy``
    (``one-hot`` or ``integer``, category values sorted lexicographically).
    """
    if encoding_policy not in ("one-hot", "integer"):
        raise ValueError(f"unknown encoding_policy {encoding_policy!r}")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file, header row required")
            rows = [row for row in reader if row]
    except FileNotFoundError:
        raise DataError(f"{path}: no such file")
    header = [h.strip() for h in header]
    if label_column not in header:
        raise DataError(f"{path}: missing label column {label_column!r} (header: {header})")
    label_idx = header.index(label_column)

    kept, n_missing = [], 0
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
        if any(cell.strip() in MISSING_TOKENS for cell in row):
            n_missing += 1
            continue
        kept.append([cell.strip() for cell in row])
    if not kept:
        raise DataError(f"{path}: zero rows survive missing-value filtering "
                        f"({n_missing} rows dropped)")

    label_values = sorted({row[label_idx] for row in kept})
    if len(label_values) != 2:
        raise DataError(f"{path}: label column {label_column!r} must take exactly two "
                        f"distinct values, found {label_values}")
    if positive_label not in label_values:
        raise DataError(f"{path}: positive_label {positive_label!r} not among label "
                        f"values {label_values}")
    y = np.array([1 if row[label_idx] == positive_label else 0 for row in kept],
                 dtype=np.int8)

    columns, names = [], []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        raw = [row[j] for row in kept]
        try:
            columns.append(np.array([float(v) for v in raw], dtype=np.float64))
            names.append(name)
        except ValueError:
            levels = sorted(set(raw))
            if encoding_policy == "integer":
                code = {v: float(c) for c, v in enumerate(levels)}
                columns.append(np.array([code[v] for v in raw], dtype=np.float64))
                names.append(name)
            else:
                for level in levels:
                    columns.append(np.array([1.0 if v == level else 0.0 for v in raw],
                                            dtype=np.float64))
                    names.append(f"{name}={level}")
    if not columns:
        raise DataError(f"{path}: no feature columns besides the label")

    ds = Dataset(np.column_stack(columns), y, tuple(names))
    if ds.n1 > ds.n0:
        warnings.warn(
            f"{path}: positive_label {positive_label!r} maps to the majority class "
            f"(n1={ds.n1} > n0={ds.n0}); imbalance_ratio will be < 1",
            stacklevel=2,
        )
    return ds


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a Dataset as CSV; reloading round-trips matrices bit-exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.feature_names, label_column])
        for i in range(dataset.n):
            writer.writerow([*(repr(v) for v in dataset.features[i].tolist()),
                             int(dataset.labels[i])])


def stratified_kfold(dataset: Dataset, k: int, seed: SeedSpec) -> FoldAssignment:
    """Assign rows to k folds so per-class counts differ by at most 1."""
    n1 = dataset.n1
    if not 2 <= k <= n1:
        raise DataError(f"k must satisfy 2 <= k <= n1={n1}, got k={k}")
    rng = seed.derive(TAG_FOLDS)
    fold_of = np.zeros(dataset.n, dtype=np.int32)
    fold_sizes = np.zeros(k, dtype=np.int64)
    # Larger class first so the smaller class can even out fold totals.
    classes = sorted((0, 1), key=lambda c: -np.count_nonzero(dataset.labels == c))
    for c in classes:
        idx = np.flatnonzero(dataset.labels == c)
        idx = idx[rng.permutation(len(idx))]
        base, extra = divmod(len(idx), k)
        counts = np.full(k, base, dtype=np.int64)
        if extra:
            order = np.lexsort((np.arange(k), fold_sizes))  # smallest folds first
            counts[order[:extra]] += 1
        pos = 0
        for f in range(k):
            fold_of[idx[pos:pos + counts[f]]] = f + 1
            pos += counts[f]
        fold_sizes += counts
    return FoldAssignment(fold_of, k)
