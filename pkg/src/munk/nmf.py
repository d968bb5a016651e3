"""Frobenius-norm NMF with Lee-Seung multiplicative updates.

Minimizes E = 1/2 ||X - W H||_F^2 over non-negative W (m x r), H (r x n).
"""
import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InputError

GUARD = 1e-12


@dataclass(frozen=True)
class NmfState:
    X: np.ndarray
    W: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        m, n = self.X.shape
        if self.W.shape[0] != m or self.H.shape[1] != n or self.W.shape[1] != self.H.shape[0]:
            raise InputError(f"shapes do not chain: X{self.X.shape} W{self.W.shape} H{self.H.shape}")

    @property
    def rank(self):
        return self.W.shape[1]


def nmf_objective(st):
    R = st.X - st.W @ st.H
    return 0.5 * float(np.sum(R * R))


def nmf_step(st, guard=GUARD):
    """W update followed by an H update that already sees the new W."""
    X, W, H = st.X, st.W, st.H
    W = W * (X @ H.T) / (W @ (H @ H.T) + guard)
    H = H * (W.T @ X) / ((W.T @ W) @ H + guard)
    return NmfState(X, W, H)


def nmf_run(X, r, iters, seed=0):
    """Factor ``X`` from a uniform (0, 1] start; returns the final state and objective trace."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError("X must be a matrix")
    if np.any(X < 0) or not np.all(np.isfinite(X)):
        raise InputError("NMF input must be finite and non-negative")
    m, n = X.shape
    if not 1 <= r <= min(m, n):
        raise InputError(f"rank must lie in [1, {min(m, n)}], got {r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    # 1 - U[0, 1) lies in (0, 1]
    st = NmfState(X, 1.0 - rng.random((m, r)), 1.0 - rng.random((r, n)))
    trace = [nmf_objective(st)]
    for _ in range(iters):
        st = nmf_step(st)
        trace.append(nmf_objective(st))
    return st, trace


def trace_csv(trace, preamble=()):
    out = io.StringIO()
    for line in preamble:
        out.write(f"# {line}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["iter", "frobenius_objective"])
    for i, e in enumerate(trace):
        w.writerow([i, repr(float(e))])
    return out.getvalue()


def matrix_csv(M, preamble=()):
    return "".join(f"# {line}\n" for line in preamble) + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in np.atleast_2d(M))
