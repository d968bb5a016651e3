"""Trained classifier: decision function, prediction and persistence.

The model file is line-oriented UTF-8::

    munk-model v1
    family=gaussian sigma=3.0
    # meta dim=9 support_threshold=1e-08 algo=munk iterations=812 objective=-12.5 ...
    alpha y f1 f2 ... fd
    ...

Numbers are written with 17 significant digits so that they round-trip
exactly.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ModelFormatError
from .kernels import KernelSpec, gram

MAGIC = "munk-model v1"


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TrainedModel:
    kernel: KernelSpec
    support_X: np.ndarray  # (s, d)
    support_alpha: np.ndarray  # (s,), > 0
    support_y: np.ndarray  # (s,), +1 / -1
    support_threshold: float = 1e-8
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_alpha(cls, kernel, X, y, alpha, cutoff=1e-8, meta=None):
        keep = np.asarray(alpha) > cutoff
        return cls(
            kernel,
            np.asarray(X, dtype=float)[keep],
            np.asarray(alpha, dtype=float)[keep],
            np.asarray(y, dtype=float)[keep],
            float(cutoff),
            dict(meta or {}),
        )

    @property
    def dim(self):
        return self.support_X.shape[1]

    @property
    def n_support(self):
        return self.support_alpha.size

    def decision_function(self, X):
        """f(x) = sum_i alpha_i y_i k(x_i, x) for each row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise InputError(f"expected {self.dim} features, got {X.shape[1]}")
        if self.n_support == 0:
            return np.zeros(X.shape[0])
        return gram(self.kernel, X, self.support_X) @ (self.support_alpha * self.support_y)

    def scaled(self, c):
        return TrainedModel(self.kernel, self.support_X, self.support_alpha * c, self.support_y,
                            self.support_threshold, dict(self.meta))


def decision(m, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("decision() takes a single feature vector")
    return float(m.decision_function(x)[0])


def predict(m, X):
    """Labels in {+1, -1}; a decision value of exactly 0 maps to +1."""
    return np.where(m.decision_function(X) >= 0, 1.0, -1.0)


def misclassification_rate(m, test):
    if test.n == 0:
        raise InputError("empty test set")
    return float(np.mean(predict(m, test.X) != test.y))


def save_model(m, path):
    meta = {"dim": m.dim, "support_threshold": _fmt(m.support_threshold)}
    for k, v in m.meta.items():
        meta[k] = _fmt(v) if isinstance(v, float) else v
    lines = [MAGIC, m.kernel.to_tokens(), "# meta " + " ".join(f"{k}={v}" for k, v in meta.items())]
    for a, yy, x in zip(m.support_alpha, m.support_y, m.support_X):
        lines.append(" ".join([_fmt(a), str(int(yy))] + [_fmt(v) for v in x]))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _meta_value(v):
    if v in ("True", "False"):
        return v == "True"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from exc
    if not text.endswith("\n"):
        raise ModelFormatError(f"{path}: truncated model file")
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        found = lines[0] if lines else ""
        raise ModelFormatError(f"{path}: expected header {MAGIC!r}, found {found!r}")
    if len(lines) < 3 or not lines[2].startswith("# meta "):
        raise ModelFormatError(f"{path}: missing kernel or metadata line")
    try:
        kernel = KernelSpec.from_tokens(lines[1])
    except ValueError as exc:
        raise ModelFormatError(f"{path}: bad kernel line: {exc}") from exc
    meta = {}
    for tok in lines[2][len("# meta "):].split():
        k, sep, v = tok.partition("=")
        if not sep:
            raise ModelFormatError(f"{path}: bad metadata token {tok!r}")
        meta[k] = _meta_value(v)
    try:
        dim = int(meta.pop("dim"))
        threshold = float(meta.pop("support_threshold"))
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: incomplete metadata") from exc

    rows = []
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split()
        if len(parts) != dim + 2:
            raise ModelFormatError(f"{path}:{lineno}: expected {dim + 2} fields, found {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ModelFormatError(f"{path}:{lineno}: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(len(rows), dim + 2)
    if np.any(data[:, 0] <= 0) or not np.all(np.isin(data[:, 1], (-1.0, 1.0))):
        raise ModelFormatError(f"{path}: support coefficients must be > 0 with labels +-1")
    if not np.all(np.isfinite(data)):
        raise ModelFormatError(f"{path}: non-finite values")
    return TrainedModel(kernel, data[:, 2:].copy(), data[:, 0].copy(), data[:, 1].copy(), threshold, meta)
