"""Non-negative kernels, Gram matrices and class-partitioned Gram blocks.

Points are rows: a dataset with ``n`` points in ``d`` dimensions is an
``(n, d)`` array.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, InputError

FAMILIES = ("gaussian", "polynomial_even", "linear_nonneg")

# k(x, y) = exp(-||x - y||^2 / (GAUSSIAN_WIDTH_FACTOR * sigma^2))
GAUSSIAN_WIDTH_FACTOR = 2.0


@dataclass(frozen=True)
class KernelSpec:
    family: str
    sigma: float = 1.0
    degree: int = 2
    coef0: float = 1.0
    # constant added to every evaluation; stands in for a bias term
    offset: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}")
        if self.family == "gaussian" and not self.sigma > 0:
            raise ConfigError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
        if self.family == "polynomial_even":
            if int(self.degree) != self.degree or self.degree < 2 or self.degree % 2:
                raise ConfigError(f"polynomial degree must be even and >= 2, got {self.degree}")
            if not self.coef0 >= 0:
                raise ConfigError(f"coef0 must be >= 0, got {self.coef0}")
        if not self.offset >= 0:
            raise ConfigError(f"kernel offset must be >= 0, got {self.offset}")

    @classmethod
    def gaussian(cls, sigma, offset=0.0):
        return cls("gaussian", sigma=float(sigma), offset=float(offset))

    @classmethod
    def polynomial(cls, degree, coef0=1.0, offset=0.0):
        return cls("polynomial_even", degree=int(degree), coef0=float(coef0), offset=float(offset))

    @classmethod
    def linear(cls, offset=0.0):
        return cls("linear_nonneg", offset=float(offset))

    def to_tokens(self):
        """Serialize as space-separated ``key=value`` tokens."""
        parts = [f"family={self.family}"]
        if self.family == "gaussian":
            parts.append(f"sigma={float(self.sigma)!r}")
        elif self.family == "polynomial_even":
            parts.append(f"degree={int(self.degree)}")
            parts.append(f"coef0={float(self.coef0)!r}")
        if self.offset:
            parts.append(f"offset={float(self.offset)!r}")
        return " ".join(parts)

    @classmethod
    def from_tokens(cls, text):
        fields = {}
        for tok in text.split():
            key, sep, value = tok.partition("=")
            if not sep or not value:
                raise ConfigError(f"malformed kernel token {tok!r}")
            fields[key] = value
        family = fields.pop("family", None)
        if family is None:
            raise ConfigError("kernel spec is missing family=")
        allowed = {"gaussian": {"sigma"}, "polynomial_even": {"degree", "coef0"}, "linear_nonneg": set()}
        if family not in allowed:
            raise ConfigError(f"unknown kernel family {family!r}")
        unknown = set(fields) - allowed[family] - {"offset"}
        if unknown:
            raise ConfigError(f"unexpected kernel tokens for {family}: {sorted(unknown)}")
        try:
            kwargs = {k: (int(v) if k == "degree" else float(v)) for k, v in fields.items()}
        except ValueError as exc:
            raise ConfigError(f"bad kernel value in {text!r}") from exc
        return cls(family, **kwargs)


@dataclass(frozen=True)
class GramBlocks:
    K_AA: np.ndarray
    K_AB: np.ndarray
    K_BB: np.ndarray

    @property
    def K_BA(self):
        return self.K_AB.T

    @property
    def n_A(self):
        return self.K_AA.shape[0]

    @property
    def n_B(self):
        return self.K_BB.shape[0]

    def full(self):
        """Gram matrix of the stacked points ``[X_A; X_B]``."""
        return np.block([[self.K_AA, self.K_AB], [self.K_BA, self.K_BB]])

    def labels(self):
        return np.concatenate([np.ones(self.n_A), -np.ones(self.n_B)])

    def diagonal(self):
        return np.concatenate([np.diag(self.K_AA), np.diag(self.K_BB)])


def _as_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError(f"expected a 1-d feature vector, got shape {x.shape}")
    return x


def eval_kernel(spec, x, y):
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.family == "gaussian":
        diff = x - y
        value = float(np.exp(-np.dot(diff, diff) / (GAUSSIAN_WIDTH_FACTOR * spec.sigma**2)))
    elif spec.family == "polynomial_even":
        value = float((np.dot(x, y) + spec.coef0) ** spec.degree)
    else:
        value = float(np.dot(x, y))
    return value + spec.offset


def _as_points(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InputError(f"expected an (n, d) point matrix, got shape {X.shape}")
    return X


def gram(spec, X, Y=None):
    """Kernel matrix with entry ``(i, j) = k(X[i], Y[j])``."""
    X = _as_points(X)
    Y = X if Y is None else _as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.family == "gaussian":
        # cdist works on explicit differences, so k(x, x) is exactly 1 and the result is symmetric
        sq = cdist(X, Y, "sqeuclidean")
        K = np.exp(-sq / (GAUSSIAN_WIDTH_FACTOR * spec.sigma**2))
    elif spec.family == "polynomial_even":
        K = (X @ Y.T + spec.coef0) ** spec.degree
    else:
        K = X @ Y.T
    if Y is X and spec.family != "gaussian":
        K = 0.5 * (K + K.T)
    return K + spec.offset


def gram_blocks(spec, X_A, X_B):
    X_A, X_B = _as_points(X_A), _as_points(X_B)
    if X_A.shape[0] == 0 or X_B.shape[0] == 0:
        raise InputError("both classes need at least one point")
    return GramBlocks(K_AA=gram(spec, X_A), K_AB=gram(spec, X_A, X_B), K_BB=gram(spec, X_B))


@dataclass(frozen=True)
class NonnegReport:
    passed: bool
    min_value: float
    n_pairs: int


def validate_nonneg(spec, points):
    """Evaluate the kernel on every pair of ``points`` and report the minimum."""
    P = _as_points(points)
    if P.shape[0] < 2:
        raise InputError("need at least two sample points")
    K = gram(spec, P)
    lo = float(K.min())
    return NonnegReport(passed=lo >= 0.0, min_value=lo, n_pairs=P.shape[0] * (P.shape[0] + 1) // 2)
