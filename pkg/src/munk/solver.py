"""Dual SVM objective and the MUNK multiplicative update.

The coefficient vector is kept class-partitioned, ``alpha_A`` for the +1
points and ``alpha_B`` for the -1 points, in the same order as the rows of the
corresponding Gram blocks. With a non-negative kernel the gradient of the
dual splits into two entrywise non-negative parts,

    dS/d alpha_A = K_AA alpha_A - (K_AB alpha_B + 1)
    dS/d alpha_B = K_BB alpha_B - (K_BA alpha_A + 1)

and each coefficient is multiplied by the ratio negative/positive part.
"""
import csv
import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InputError
from .kernels import gram_blocks

ALGORITHMS = ("munk", "m3", "ka")
# smallest normal double; coefficients that decay below it are set to 0 (arithmetic on
# subnormals is very slow, and such a coefficient would keep shrinking to 0 anyway)
TINY = np.finfo(float).tiny
TRACE_HEADER = ("iter", "objective", "kkt_violation", "n_support", "elapsed_s")


@dataclass(frozen=True)
class AlphaState:
    alpha_A: np.ndarray
    alpha_B: np.ndarray
    C: float = math.inf

    @property
    def alpha(self):
        return np.concatenate([self.alpha_A, self.alpha_B])

    @classmethod
    def initial(cls, n_A, n_B, value=1.0, C=math.inf):
        if not value > 0:
            raise ConfigError("initial coefficients must be strictly positive")
        start = min(value, C)
        return cls(np.full(n_A, start), np.full(n_B, start), C)

    @classmethod
    def from_vector(cls, alpha, n_A, C=math.inf):
        alpha = np.asarray(alpha, dtype=float)
        return cls(alpha[:n_A].copy(), alpha[n_A:].copy(), C)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10**6
    rel_obj_tol: float = 1e-10
    patience: int = 10
    kkt_tol: float = 1e-6
    init_alpha: float = 1.0
    denom_guard: float = 1e-300
    trace_every: int = 1
    C: float = math.inf
    alternating: bool = False
    # Kernel Adatron learning rate; None -> 1 / max_i k_ii
    eta: float = None
    # measured in units of 1 / max_i k_ii, see support_cutoff()
    support_threshold: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1 or self.trace_every < 1 or self.patience < 1:
            raise ConfigError("max_iters, trace_every and patience must be positive")
        if self.rel_obj_tol < 0 or not self.kkt_tol > 0:
            raise ConfigError("tolerances must be positive")
        if not self.init_alpha > 0:
            raise ConfigError("init_alpha must be > 0")
        if self.denom_guard < 0:
            raise ConfigError("denom_guard must be >= 0")
        if not self.C > 0:
            raise ConfigError(f"C must be > 0, got {self.C}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("eta must be > 0")


@dataclass
class ConvergenceTrace:
    iters: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    kkt_violation: list = field(default_factory=list)
    n_support: list = field(default_factory=list)
    elapsed_s: list = field(default_factory=list)
    algo: str = "munk"
    # False when max_iters was reached or the iterates blew up
    converged: bool = False
    stop_reason: str = ""
    # set when an iterate raised the objective (only possible for an unstable KA rate)
    diverged: bool = False

    def record(self, it, obj, kkt, n_sup, elapsed):
        self.iters.append(int(it))
        self.objective.append(float(obj))
        self.kkt_violation.append(float(kkt))
        self.n_support.append(int(n_sup))
        self.elapsed_s.append(float(elapsed))

    def __len__(self):
        return len(self.iters)

    @property
    def final_objective(self):
        return self.objective[-1]

    def is_monotone(self, slack=1e-12):
        s = np.asarray(self.objective)
        return bool(np.all(s[1:] <= s[:-1] + slack * (1 + np.abs(s[:-1]))))

    def to_csv(self, preamble=(), timing=True):
        """Render as CSV text; ``preamble`` lines are emitted as ``#`` comments."""
        out = io.StringIO()
        for line in preamble:
            out.write(f"# {line}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in zip(self.iters, self.objective, self.kkt_violation, self.n_support, self.elapsed_s):
            it, obj, kkt, nsup, el = row
            w.writerow([it, repr(obj), repr(kkt), nsup, f"{el:.6f}" if timing else "0"])
        return out.getvalue()


def _check(blocks, st):
    if st.alpha_A.shape != (blocks.n_A,) or st.alpha_B.shape != (blocks.n_B,):
        raise InputError(
            f"coefficient sizes ({st.alpha_A.shape}, {st.alpha_B.shape}) do not match "
            f"Gram blocks ({blocks.n_A}, {blocks.n_B})"
        )


def objective(blocks, st):
    _check(blocks, st)
    a, b = st.alpha_A, st.alpha_B
    quad = a @ (blocks.K_AA @ a) - 2.0 * (a @ (blocks.K_AB @ b)) + b @ (blocks.K_BB @ b)
    return float(0.5 * quad - a.sum() - b.sum())


def gradient_split(blocks, st):
    """Positive and negative parts of the gradient for each class."""
    _check(blocks, st)
    a, b = st.alpha_A, st.alpha_B
    pos_A = blocks.K_AA @ a
    neg_A = blocks.K_AB @ b + 1.0
    pos_B = blocks.K_BB @ b
    neg_B = blocks.K_BA @ a + 1.0
    return pos_A, neg_A, pos_B, neg_B


def _scale(alpha, num, den, guard):
    # multiply before dividing so that alpha == 0 stays 0 even when den is tiny
    return alpha * num / np.maximum(den, guard)


def munk_step(blocks, st, denom_guard=1e-300, alternating=False, counter=None):
    """One multiplicative update of both coefficient vectors.

    Both classes are updated from the incoming state unless ``alternating`` is
    set, in which case ``alpha_B`` is updated with the new ``alpha_A``.
    No clipping is applied here; see ``clip_box``.
    """
    pos_A, neg_A, pos_B, neg_B = gradient_split(blocks, st)
    a = _scale(st.alpha_A, neg_A, pos_A, denom_guard)
    if alternating:
        pos_B = blocks.K_BB @ st.alpha_B
        neg_B = blocks.K_BA @ a + 1.0
    b = _scale(st.alpha_B, neg_B, pos_B, denom_guard)
    if counter is not None:
        n = a.size + b.size
        counter["mul"] += n
        counter["div"] += n
    return AlphaState(a, b, st.C)


def clip_box(st, C=None):
    C = st.C if C is None else C
    if not C > 0:
        raise ConfigError(f"C must be > 0, got {C}")
    if math.isinf(C):
        return st
    return AlphaState(np.minimum(st.alpha_A, C), np.minimum(st.alpha_B, C), st.C)


def _flush(st):
    return AlphaState(np.where(st.alpha_A < TINY, 0.0, st.alpha_A),
                      np.where(st.alpha_B < TINY, 0.0, st.alpha_B), st.C)


def support_cutoff(blocks, threshold):
    """Absolute coefficient cutoff: ``threshold`` over the largest squared feature norm."""
    return threshold / max(float(blocks.diagonal().max()), np.finfo(float).tiny)


def kkt_violation(grad, alpha, C, cutoff):
    """Largest violation of the box-constrained first-order conditions."""
    at_zero = alpha <= cutoff
    at_top = alpha >= C - cutoff if not math.isinf(C) else np.zeros_like(at_zero)
    free = ~(at_zero | at_top)
    v = np.zeros_like(grad)
    v[free] = np.abs(grad[free])
    v[at_zero] = np.maximum(-grad[at_zero], 0.0)
    v[at_top] = np.maximum(grad[at_top], 0.0)
    return float(v.max()) if v.size else 0.0


def default_eta(blocks):
    return 1.0 / float(blocks.diagonal().max())


def train_blocks(blocks, cfg, algo="munk", counter=None):
    """Run a solver on precomputed Gram blocks.

    Returns the final ``AlphaState`` and its ``ConvergenceTrace``. Stops when
    the KKT violation drops below ``cfg.kkt_tol`` (converged), when the
    relative objective change stays below ``cfg.rel_obj_tol`` for
    ``cfg.patience`` consecutive iterations (stalled), at ``cfg.max_iters``, or
    when the objective stops being finite (diverged).
    """
    from .baselines import SignedGram, ka_step, m3_step

    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algo!r}")
    C = cfg.C
    st = AlphaState.initial(blocks.n_A, blocks.n_B, cfg.init_alpha, C)
    n_A = blocks.n_A
    sg = SignedGram.from_blocks(blocks) if algo != "munk" else None
    eta = (cfg.eta or default_eta(blocks)) if algo == "ka" else None
    cutoff = support_cutoff(blocks, cfg.support_threshold)

    trace = ConvergenceTrace(algo=algo)
    t0 = time.perf_counter()
    prev = None
    quiet = 0
    it = 0
    while True:
        pos_A, neg_A, pos_B, neg_B = gradient_split(blocks, st)
        alpha = st.alpha
        grad = np.concatenate([pos_A - neg_A, pos_B - neg_B])
        # S = 1/2 alpha.(grad + 1) - sum(alpha)
        with np.errstate(over="ignore", invalid="ignore"):
            obj = float(0.5 * (alpha @ grad) - 0.5 * alpha.sum())
        kkt = kkt_violation(grad, alpha, C, cutoff)
        done = ""
        if not math.isfinite(obj):
            trace.diverged = True
            done = "diverged"
        elif kkt <= cfg.kkt_tol:
            done = "kkt"
        elif prev is not None:
            if obj > prev + 1e-12 * (1 + abs(prev)):
                trace.diverged = True
            quiet = quiet + 1 if abs(prev - obj) <= cfg.rel_obj_tol * max(1.0, abs(obj)) else 0
            if cfg.rel_obj_tol > 0 and quiet >= cfg.patience:
                done = "stalled"
        if not done and it >= cfg.max_iters:
            done = "max_iters"
        if done or it % cfg.trace_every == 0:
            trace.record(it, obj, kkt, int((alpha > cutoff).sum()), time.perf_counter() - t0)
        if done:
            trace.stop_reason = done
            trace.converged = done not in ("max_iters", "diverged")
            return st, trace
        prev = obj

        if algo == "munk":
            a = _scale(st.alpha_A, neg_A, pos_A, cfg.denom_guard)
            if cfg.alternating:
                pos_B = blocks.K_BB @ st.alpha_B
                neg_B = blocks.K_BA @ a + 1.0
            b = _scale(st.alpha_B, neg_B, pos_B, cfg.denom_guard)
            if counter is not None:
                counter["mul"] += a.size + b.size
                counter["div"] += a.size + b.size
            st = _flush(clip_box(AlphaState(a, b, C)))
        elif algo == "m3":
            st = _flush(clip_box(AlphaState.from_vector(m3_step(sg, alpha, cfg.denom_guard, counter), n_A, C)))
        else:
            st = AlphaState.from_vector(ka_step(sg, alpha, eta, C), n_A, C)
        it += 1


def train(ds, spec, cfg=None, algo="munk", counter=None):
    """Train on a labeled dataset; returns ``(TrainedModel, ConvergenceTrace)``."""
    from .model import TrainedModel

    cfg = cfg or SolverConfig()
    blocks = gram_blocks(spec, ds.X_A, ds.X_B)
    if algo in ("munk", "m3"):
        lo = min(blocks.K_AA.min(), blocks.K_AB.min(), blocks.K_BB.min())
        if lo < 0:
            raise NonNegativityError(
                f"kernel {spec.to_tokens()} produced a negative value ({lo:.3g}) on the training data; "
                f"{algo} needs a non-negative kernel"
            )
    st, trace = train_blocks(blocks, cfg, algo, counter)
    order = np.concatenate([ds.idx_A, ds.idx_B])
    alpha = np.empty(ds.n)
    alpha[order] = st.alpha
    model = TrainedModel.from_alpha(
        spec,
        ds.X,
        ds.y,
        alpha,
        cutoff=support_cutoff(blocks, cfg.support_threshold),
        meta={
            "algo": algo,
            "iterations": trace.iters[-1],
            "objective": trace.final_objective,
            "kkt_violation": trace.kkt_violation[-1],
            "converged": trace.converged,
        },
    )
    return model, trace


class NonNegativityError(ConfigError):
    """The kernel produced negative values where a non-negative kernel is required."""


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
