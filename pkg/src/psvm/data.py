"""Dataset loading, cleaning, standardization, label maps, and deterministic splits.

The split and fold shufflers draw from numpy PCG64 streams derived from the
user seed (see seeding.py), so index sequences are reproducible across runs
and platforms. They will not match other toolchains' samplers for the same
seed; reproduction tolerances account for that.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import seeding
from .exceptions import InvalidInputError, ParseError

MISSING_TOKENS = {"", "?", "NA", "NaN", "nan"}


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] | None = None
    standardized: bool = False

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return replace(self, X=self.X[indices], y=self.y[indices])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = False

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise InvalidInputError(f"train_fraction must be in (0,1), got {self.train_fraction}")


@dataclass(frozen=True)
class Standardizer:
    """Per-column transform (x - mean) / scale; constant columns get scale 1."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        mean = X.mean(axis=0)
        sd = X.std(axis=0)  # population sd
        scale = np.where(sd == 0.0, 1.0, sd)
        return cls(mean=mean, scale=scale)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def _read_rows(path, delimiter: str) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        if delimiter.isspace():
            return [line.split() for line in fh if line.strip()]
        reader = csv.reader(fh, delimiter=delimiter)
        return [row for row in reader if any(f.strip() for f in row)]


def _parse_label(token: str):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        v = float(token)
        if v.is_integer():
            return int(v)
    except ValueError:
        pass
    return token


def load_csv(path, has_header: bool, label_column, delimiter: str = ",") -> Dataset:
    """Load a delimited text file; rows containing any missing value are dropped.

    label_column is an index (negative allowed) or, with a header, a name.
    Every non-label field must parse as a number. A space delimiter splits on
    whitespace runs (the convention of space-separated .dat files).
    """
    rows = _read_rows(path, delimiter)
    if not rows:
        raise InvalidInputError(f"{path}: file is empty")

    header = None
    if has_header:
        header = [f.strip() for f in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")

    width = len(rows[0])
    if isinstance(label_column, str):
        if header is None:
            raise InvalidInputError("label column by name requires a header")
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise InvalidInputError(f"label column {label_column!r} not in header {header}")
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += width
        if not (0 <= label_idx < width):
            raise InvalidInputError(f"label column {label_column} out of range for width {width}")

    features, labels = [], []
    for rowno, row in enumerate(rows, start=2 if has_header else 1):
        if len(row) != width:
            raise ParseError(f"{path}: row {rowno} has {len(row)} fields, expected {width}",
                             row=rowno)
        stripped = [f.strip() for f in row]
        if any(f in MISSING_TOKENS for f in stripped):
            continue
        feat = []
        for colno, tok in enumerate(stripped):
            if colno == label_idx:
                continue
            try:
                feat.append(float(tok))
            except ValueError:
                raise ParseError(
                    f"{path}: cannot parse {tok!r} at row {rowno}, column {colno}",
                    row=rowno, column=colno)
        features.append(feat)
        labels.append(_parse_label(stripped[label_idx]))

    if not features:
        raise InvalidInputError(f"{path}: every row was dropped or the file had no usable data")
    X = np.asarray(features, dtype=np.float64)
    if all(isinstance(l, int) for l in labels):
        y = np.asarray(labels, dtype=np.int64)
    else:
        y = np.asarray([str(l) for l in labels], dtype=object)
    names = None
    if header is not None:
        names = [h for i, h in enumerate(header) if i != label_idx]
    return Dataset(X=X, y=y, feature_names=names, standardized=False)


def load_matrix(path, has_header: bool, delimiter: str = ",") -> np.ndarray:
    """Load an unlabeled file: every field is a feature; gap rows are dropped."""
    rows = _read_rows(path, delimiter)
    if has_header:
        rows = rows[1:]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    out = []
    for rowno, row in enumerate(rows, start=2 if has_header else 1):
        stripped = [f.strip() for f in row]
        if any(f in MISSING_TOKENS for f in stripped):
            continue
        try:
            out.append([float(tok) for tok in stripped])
        except ValueError as err:
            raise ParseError(f"{path}: row {rowno}: {err}", row=rowno)
    if not out:
        raise InvalidInputError(f"{path}: every row was dropped")
    return np.asarray(out, dtype=np.float64)


def standardize(ds: Dataset) -> Dataset:
    """Column-wise zero mean, unit population variance; constant columns to zeros."""
    if ds.standardized:
        raise InvalidInputError("dataset is already standardized")
    st = Standardizer.fit(ds.X)
    return replace(ds, X=st.apply(ds.X), standardized=True)


def map_binary_labels(y: np.ndarray) -> np.ndarray:
    """Normalize {0,1} labels to {-1,+1}; pass {-1,+1} through unchanged."""
    vals = set(np.unique(y).tolist())
    if vals <= {-1, 1}:
        return np.asarray(y, dtype=np.int64)
    if vals <= {0, 1}:
        return np.where(np.asarray(y) == 0, -1, 1).astype(np.int64)
    raise InvalidInputError(f"labels {sorted(vals)} are not a recognized binary coding")


def binarize_wine(quality) -> np.ndarray:
    """Quality levels 0..5 map to -1, 6..10 to +1."""
    q = np.asarray(quality)
    if q.size and (np.min(q) < 0 or np.max(q) > 10):
        raise InvalidInputError("quality levels must lie in [0, 10]")
    return np.where(q <= 5, -1, 1).astype(np.int64)


def train_test_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Deterministic shuffle-split; train size is floor(m * fraction).

    Stratified mode preserves class ratios to within one sample per class
    (remainders go to the classes with the largest fractional targets).
    """
    m = ds.m
    n_train = int(np.floor(m * spec.train_fraction))
    if not (1 <= n_train <= m - 1):
        raise InvalidInputError(f"split of {m} rows at {spec.train_fraction} leaves an empty side")
    rng = seeding.rng_for(spec.seed, seeding.SPLIT)
    if not spec.stratified:
        perm = rng.permutation(m)
        return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])

    classes = sorted(set(ds.y.tolist()))
    per_class = {c: np.flatnonzero(ds.y == c) for c in classes}
    targets = {}
    fracs = []
    for c in classes:
        exact = per_class[c].size * spec.train_fraction
        targets[c] = int(np.floor(exact))
        fracs.append((exact - targets[c], c))
    remainder = n_train - sum(targets.values())
    for _, c in sorted(fracs, key=lambda t: (-t[0], classes.index(t[1])))[:remainder]:
        targets[c] += 1
    if any(targets[c] == 0 for c in classes):
        raise InvalidInputError("stratified split leaves a class absent from the train side")
    train_idx, test_idx = [], []
    for c in classes:
        idx = per_class[c][rng.permutation(per_class[c].size)]
        train_idx.append(idx[: targets[c]])
        test_idx.append(idx[targets[c]:])
    return ds.subset(np.concatenate(train_idx)), ds.subset(np.concatenate(test_idx))


def kfold_indices(m: int, k: int, seed: int) -> list[np.ndarray]:
    """Partition [0, m) into k shuffled folds whose sizes differ by at most 1."""
    if k < 2:
        raise InvalidInputError(f"k must be >= 2, got {k}")
    if k > m:
        raise InvalidInputError(f"k = {k} exceeds m = {m}")
    perm = seeding.rng_for(seed, seeding.CV_FOLDS).permutation(m)
    sizes = [m // k + (1 if f < m % k else 0) for f in range(k)]
    folds, start = [], 0
    for size in sizes:
        folds.append(perm[start : start + size])
        start += size
    return folds


def stratified_kfold_indices(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """k folds balancing both fold sizes and per-class counts.

    Each class's shuffled indices are dealt one at a time to the currently
    least-filled fold (ties to the lowest fold index).
    """
    y = np.asarray(y)
    m = y.size
    if k < 2:
        raise InvalidInputError(f"k must be >= 2, got {k}")
    if k > m:
        raise InvalidInputError(f"k = {k} exceeds m = {m}")
    rng = seeding.rng_for(seed, seeding.CV_FOLDS)
    buckets: list[list[int]] = [[] for _ in range(k)]
    for c in sorted(set(y.tolist())):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        for i in idx:
            target = min(range(k), key=lambda f: (len(buckets[f]), f))
            buckets[target].append(int(i))
    return [np.asarray(sorted(b), dtype=np.int64) for b in buckets]
