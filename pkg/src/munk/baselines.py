"""Baseline dual solvers: the M3 multiplicative update and Kernel Adatron.

Both act on the label-signed Gram matrix ``A_ij = y_i y_j k_ij`` over the
concatenated coefficient vector (class A first, then class B).
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError


@dataclass(frozen=True)
class SignedGram:
    A: np.ndarray
    pos: np.ndarray  # max(A, 0)
    neg: np.ndarray  # max(-A, 0)

    @classmethod
    def from_matrix(cls, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError(f"signed Gram must be square, got {A.shape}")
        return cls(A, np.maximum(A, 0.0), np.maximum(-A, 0.0))

    @classmethod
    def from_gram(cls, K, y):
        y = np.asarray(y, dtype=float)
        return cls.from_matrix(np.outer(y, y) * K)

    @classmethod
    def from_blocks(cls, blocks):
        return cls.from_gram(blocks.full(), blocks.labels())

    @property
    def n(self):
        return self.A.shape[0]


def m3_step(sg, alpha, denom_guard=1e-300, counter=None):
    """One M3 update with linear coefficient -1.

    alpha_i <- alpha_i * (1 + sqrt(1 + 4 (A+ alpha)_i (A- alpha)_i)) / (2 (A+ alpha)_i)
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (sg.n,):
        raise InputError(f"expected {sg.n} coefficients, got {alpha.shape}")
    a = sg.pos @ alpha
    c = sg.neg @ alpha
    factor_num = 1.0 + np.sqrt(1.0 + 4.0 * a * c)
    if counter is not None:
        n = alpha.size
        counter["sqrt"] += n
        counter["mul"] += 3 * n
        counter["div"] += n
    return alpha * factor_num / np.maximum(2.0 * a, denom_guard)


def ka_step(sg, alpha, eta, C=math.inf):
    """One Kernel Adatron sweep, coefficients updated in index order.

    alpha_i <- clamp(alpha_i + eta * (1 - (A alpha)_i), 0, C), with ``A alpha``
    refreshed after every coordinate.
    """
    if not eta > 0:
        raise ConfigError("eta must be > 0")
    alpha = np.array(alpha, dtype=float)
    if alpha.shape != (sg.n,):
        raise InputError(f"expected {sg.n} coefficients, got {alpha.shape}")
    A = sg.A
    margin = A @ alpha
    for i in range(alpha.size):
        new = min(max(alpha[i] + eta * (1.0 - margin[i]), 0.0), C)
        delta = new - alpha[i]
        if delta != 0.0:
            margin += delta * A[:, i]
            alpha[i] = new
    return alpha
