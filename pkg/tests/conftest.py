import numpy as np
import pytest

from munk import KernelSpec, LabeledDataset, gram_blocks

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]
BREAST = ROOT / "data" / "breast-cancer-wisconsin.csv"
SONAR = ROOT / "data" / "sonar.csv"

LINEAR = KernelSpec.linear()


@pytest.fixture
def two_point():
    return gram_blocks(LINEAR, [[1.0, 0.0]], [[0.0, 1.0]])


@pytest.fixture
def three_point():
    return gram_blocks(LINEAR, [[1.0, 0.0]], [[0.0, 1.0], [0.0, 2.0]])


def random_instance(rng, n=None, dim=None, kernel=None):
    """Random two-class dataset with both classes present."""
    n = n or int(rng.integers(4, 31))
    dim = dim or int(rng.integers(2, 5))
    X = rng.uniform(-1, 1, size=(n, dim))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    if kernel is None:
        if rng.random() < 0.5:
            kernel = KernelSpec.gaussian(float(rng.uniform(0.5, 2.0)))
        else:
            kernel = KernelSpec.polynomial(int(rng.choice([2, 4])), coef0=1.0)
    return LabeledDataset(X, y), kernel


def random_blocks(rng, **kw):
    ds, kernel = random_instance(rng, **kw)
    return gram_blocks(kernel, ds.X_A, ds.X_B), ds, kernel


def separable_instance(rng, n=None, dim=None, kernel=None, gap=0.3):
    """Points split by a random hyperplane with an empty band of half-width ``gap``."""
    n = n or int(rng.integers(4, 31))
    dim = dim or int(rng.integers(2, 5))
    w = rng.normal(size=dim)
    w /= np.linalg.norm(w)
    X = np.empty((0, dim))
    while len(X) < n:
        cand = rng.uniform(-1, 1, size=(4 * n, dim))
        X = np.vstack([X, cand[np.abs(cand @ w) >= gap]])
    X = X[:n]
    X[0], X[1] = 1.5 * gap * w, -1.5 * gap * w
    y = np.where(X @ w > 0, 1.0, -1.0)
    kernel = kernel or KernelSpec.gaussian(float(rng.uniform(0.5, 2.0)))
    return LabeledDataset(X, y), kernel


def separable_blocks(rng, **kw):
    ds, kernel = separable_instance(rng, **kw)
    return gram_blocks(kernel, ds.X_A, ds.X_B), ds, kernel


@pytest.fixture
def four_point():
    # like three_point plus a non-support +1 point with a positive cross-class kernel sum
    return gram_blocks(LINEAR, [[1.0, 0.0], [2.0, 0.5]], [[0.0, 1.0], [0.0, 2.0]])
