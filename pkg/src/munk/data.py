"""Two-class CSV datasets: loading, seeded splits, standardization.

Splits draw from ``numpy.random.Generator(PCG64(seed))``; the permutation for
each class comes from ``Generator.permutation``, A class first, then B.
"""
import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError

MISSING = "?"


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray  # (n, d), one point per row
    y: np.ndarray  # (n,), entries +1 / -1

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise InputError(f"inconsistent shapes X{X.shape} y{y.shape}")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise InputError("labels must be +1 or -1")
        if not np.all(np.isfinite(X)):
            raise InputError("features contain non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def idx_A(self):
        return np.flatnonzero(self.y > 0)

    @property
    def idx_B(self):
        return np.flatnonzero(self.y < 0)

    @property
    def X_A(self):
        return self.X[self.idx_A]

    @property
    def X_B(self):
        return self.X[self.idx_B]

    def subset(self, rows):
        return LabeledDataset(self.X[rows], self.y[rows])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _is_name(spec):
    return isinstance(spec, str) and not spec.lstrip("-").isdigit()


def _resolve_column(spec, header, width):
    if _is_name(spec):
        if header is None or spec not in header:
            raise InputError(f"unknown column {spec!r}")
        return header.index(spec)
    idx = int(spec)
    if not -width <= idx < width:
        raise InputError(f"column index {idx} out of range for {width} columns")
    return idx % width


def load_csv(path, label_column=-1, positive_label="1", missing_policy="drop_row", drop_columns=()):
    """Read a comma-separated two-class dataset.

    A first row is taken as a header when any of its non-label cells is not
    numeric. Labels equal to ``positive_label`` become +1, everything else -1.
    Rows holding the missing token ``?`` in a feature cell are dropped or
    rejected according to ``missing_policy``.
    """
    if missing_policy not in ("drop_row", "error"):
        raise ConfigError(f"unknown missing_policy {missing_policy!r}")
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        rows = [r for r in csv.reader(io.StringIO(raw.decode("utf-8"))) if r and any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path} is empty")
    rows = [[c.strip() for c in r] for r in rows]
    width = len(rows[0])

    first = rows[0]
    if _is_name(label_column):
        header, rows = first, rows[1:]
    else:
        label_guess = _resolve_column(label_column, None, width)
        header = None
        if any(not _is_number(c) and c != MISSING for j, c in enumerate(first) if j != label_guess):
            header, rows = first, rows[1:]
    label_idx = _resolve_column(label_column, header, width)
    dropped = {_resolve_column(c, header, width) for c in drop_columns}
    if label_idx in dropped:
        raise ConfigError("label column cannot also be dropped")
    feature_idx = [j for j in range(width) if j != label_idx and j not in dropped]

    feats, labels = [], []
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise InputError(f"{path}:{lineno}: expected {width} cells, found {len(row)}")
        cells = [row[j] for j in feature_idx]
        if MISSING in cells:
            if missing_policy == "error":
                raise InputError(f"{path}:{lineno}: missing value")
            continue
        try:
            feats.append([float(c) for c in cells])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        labels.append(1.0 if row[label_idx] == str(positive_label) else -1.0)

    if not feats:
        raise InputError(f"{path}: no usable rows")
    y = np.array(labels)
    if np.all(y > 0) or np.all(y < 0):
        raise InputError(f"{path}: only one class present after filtering")
    return LabeledDataset(np.array(feats), y)


def split(ds, spec):
    """Deterministic train/test partition, optionally stratified by class."""
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    if spec.stratified:
        train_rows, test_rows = [], []
        for idx in (ds.idx_A, ds.idx_B):
            if len(idx) < 2:
                raise InputError("stratified split needs at least two members per class")
            perm = idx[rng.permutation(len(idx))]
            k = min(max(int(round(spec.train_fraction * len(idx))), 1), len(idx) - 1)
            train_rows.append(perm[:k])
            test_rows.append(perm[k:])
        train_rows = np.sort(np.concatenate(train_rows))
        test_rows = np.sort(np.concatenate(test_rows))
    else:
        perm = rng.permutation(ds.n)
        k = min(max(int(round(spec.train_fraction * ds.n)), 1), ds.n - 1)
        train_rows, test_rows = np.sort(perm[:k]), np.sort(perm[k:])
    train = ds.subset(train_rows)
    if len(train.idx_A) == 0 or len(train.idx_B) == 0:
        raise InputError("split left a class empty in the training set")
    return train, ds.subset(test_rows)


def standardize(train, test):
    """Center and scale features with training statistics.

    Zero-variance features are only centered.
    """
    if train.n == 0:
        raise InputError("empty training set")
    mean = train.X.mean(axis=0)
    scale = train.X.std(axis=0)
    scale[scale == 0] = 1.0
    return (
        LabeledDataset((train.X - mean) / scale, train.y),
        LabeledDataset((test.X - mean) / scale, test.y),
        mean,
        scale,
    )


def unstandardize(ds, mean, scale):
    return LabeledDataset(ds.X * scale + mean, ds.y)
