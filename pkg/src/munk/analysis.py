"""Margin geometry and asymptotic contraction rates of non-support coefficients.

Near the fixed point, a non-support coefficient that is nudged off zero is
multiplied by a nearly constant factor per iteration. For point ``i`` with
signed margin ``m_i = y_i sum_j alpha*_j y_j k_ij``, ``K_ww = sum_ij alpha*_i
alpha*_j y_i y_j k_ij``, ``d = 1/sqrt(K_ww)``, ``d_i = m_i d``,
``l_i = sqrt(k_ii)`` and ``l = max_i l_i``, the factors obey

    MUNK:  gamma_i <= 1 / (1 + (d_i - d) d / (l_i l))
    M3:    gamma_i <= 1 / (1 + (d_i - d) d / (2 l_i l))

Indices are positions in the concatenated coefficient vector: class A
(label +1) first, then class B.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import SignedGram, m3_step
from .errors import InputError, NotConvergedError
from .kernels import gram_blocks
from .solver import AlphaState, kkt_violation, munk_step, support_cutoff

# the perturbation argument assumes alpha*_i == 0; anything above this counts as support
NONSUPPORT_THRESHOLD = 1e-10
FIXED_POINT_KKT = 1e-9
REPORT_HEADER = (
    "index", "class", "alpha_star", "d_i", "l_i",
    "gamma_munk_bound", "gamma_m3_bound", "gamma_munk_measured", "gamma_m3_measured",
)


@dataclass(frozen=True)
class MarginGeometry:
    alpha_star: np.ndarray
    labels: np.ndarray
    K_ww: float
    signed_margin: np.ndarray  # K(x_i, w), sign-adjusted per class
    l_i: np.ndarray
    nonsupport_cutoff: float

    @property
    def d(self):
        return 1.0 / math.sqrt(self.K_ww)

    @property
    def d_i(self):
        return self.signed_margin * self.d

    @property
    def l(self):
        return float(self.l_i.max())

    def is_nonsupport(self, i):
        return self.alpha_star[i] < self.nonsupport_cutoff

    def nonsupport_indices(self):
        return np.flatnonzero(self.alpha_star < self.nonsupport_cutoff)


def _grad(blocks, alpha):
    pos_A, neg_A, pos_B, neg_B = _split(blocks, alpha)
    return np.concatenate([pos_A - neg_A, pos_B - neg_B])


def _split(blocks, alpha):
    a, b = alpha[: blocks.n_A], alpha[blocks.n_A:]
    return (blocks.K_AA @ a, blocks.K_AB @ b + 1.0, blocks.K_BB @ b, blocks.K_BA @ a + 1.0)


def fixed_point_residual(blocks, alpha_star):
    return kkt_violation(_grad(blocks, alpha_star), alpha_star, math.inf, support_cutoff(blocks, 1e-8))


def _require_converged(blocks, alpha_star, tol):
    r = fixed_point_residual(blocks, alpha_star)
    if r > tol:
        raise NotConvergedError(
            f"KKT residual {r:.3g} exceeds {tol:.3g}; the rate bounds only hold at the fixed point"
        )


def geometry_from_blocks(blocks, alpha_star, kkt_tol=FIXED_POINT_KKT):
    alpha_star = np.asarray(alpha_star, dtype=float)
    if alpha_star.shape != (blocks.n_A + blocks.n_B,):
        raise InputError("alpha_star does not match the Gram blocks")
    _require_converged(blocks, alpha_star, kkt_tol)
    g = _grad(blocks, alpha_star)
    margin = g + 1.0
    K_ww = float(alpha_star @ margin)
    return MarginGeometry(
        alpha_star=alpha_star,
        labels=blocks.labels(),
        K_ww=K_ww,
        signed_margin=margin,
        l_i=np.sqrt(blocks.diagonal()),
        nonsupport_cutoff=support_cutoff(blocks, NONSUPPORT_THRESHOLD),
    )


def margin_geometry(model, train, kkt_tol=FIXED_POINT_KKT):
    """Geometry of a trained model over its training set.

    Training points that are not stored as support vectors get alpha* = 0.
    Dropping coefficients below the model's support threshold shifts the
    residual by about that threshold, so models meant for this analysis should
    be trained with a support threshold well under ``kkt_tol``.
    """
    if not model.meta.get("converged", False) or model.meta.get("kkt_violation", math.inf) > kkt_tol:
        raise NotConvergedError(
            f"model is not converged to KKT residual {kkt_tol:.3g} "
            f"(recorded {model.meta.get('kkt_violation')}); retrain with a tighter kkt_tol"
        )
    blocks, alpha = _blocks_and_alpha(model, train)
    return geometry_from_blocks(blocks, alpha, kkt_tol)


def _blocks_and_alpha(model, train):
    lookup = {(tuple(x), yy): a for x, yy, a in zip(model.support_X, model.support_y, model.support_alpha)}
    alpha = np.array([lookup.get((tuple(x), yy), 0.0) for x, yy in zip(train.X, train.y)])
    order = np.concatenate([train.idx_A, train.idx_B])
    blocks = gram_blocks(model.kernel, train.X_A, train.X_B)
    return blocks, alpha[order]


def _check_nonsupport(geom, i):
    if not 0 <= i < geom.alpha_star.size:
        raise InputError(f"index {i} out of range")
    if not geom.is_nonsupport(i):
        raise InputError(f"index {i} is a support vector (alpha* = {geom.alpha_star[i]:.3g})")


def _gap_term(geom, i):
    return (geom.d_i[i] - geom.d) * geom.d / (geom.l_i[i] * geom.l)


def bound_munk(geom, i):
    _check_nonsupport(geom, i)
    return 1.0 / (1.0 + _gap_term(geom, i))


def bound_m3(geom, i):
    _check_nonsupport(geom, i)
    return 1.0 / (1.0 + 0.5 * _gap_term(geom, i))


@dataclass(frozen=True)
class AppendixChain:
    z_plus: float  # same-class kernel sum at alpha*
    z_minus: float  # cross-class kernel sum at alpha*
    margin: float  # z_plus - z_minus
    z_plus_bound: float  # sqrt(k_ii) * max_k sqrt(k_kk) * K(w, w)
    K_ww: float


def appendix_chain(blocks, alpha_star, i):
    """Intermediate quantities of the perturbation argument, from the Gram blocks alone."""
    alpha_star = np.asarray(alpha_star, dtype=float)
    pos_A, neg_A, pos_B, neg_B = _split(blocks, alpha_star)
    z_plus = np.concatenate([pos_A, pos_B])[i]
    z_minus = np.concatenate([neg_A, neg_B])[i] - 1.0
    diag = blocks.diagonal()
    K_ww = float(alpha_star @ (np.concatenate([pos_A - neg_A, pos_B - neg_B]) + 1.0))
    return AppendixChain(
        z_plus=float(z_plus),
        z_minus=float(z_minus),
        margin=float(z_plus - z_minus),
        z_plus_bound=float(math.sqrt(diag[i]) * math.sqrt(diag.max()) * K_ww),
        K_ww=K_ww,
    )


def lower_bound_appendix(geom, blocks, alpha_star, i):
    """Lower bound on 1/gamma_i in its raw kernel form.

    1 + (K(x_i, w) - 1) / (sqrt(k_ii) max_k sqrt(k_kk) K(w, w)); algebraically
    equal to ``1 / bound_munk(geom, i)``.
    """
    _check_nonsupport(geom, i)
    ch = appendix_chain(blocks, alpha_star, i)
    diag = blocks.diagonal()
    return 1.0 + (ch.margin - 1.0) / (math.sqrt(diag[i]) * math.sqrt(diag.max()) * ch.K_ww)


def measured_rate(blocks, alpha_star, i, delta=1e-8, algo="munk", force=False,
                  kkt_tol=FIXED_POINT_KKT):
    """One-step contraction factor alpha'_i / delta after setting alpha_i = delta.

    All other coefficients stay at alpha*. ``force`` allows perturbing a
    support coefficient (its factor is then close to 1).
    """
    alpha = np.array(alpha_star, dtype=float)
    if not 0 <= i < alpha.size:
        raise InputError(f"index {i} out of range")
    if not delta > 0:
        raise InputError("delta must be > 0")
    _require_converged(blocks, alpha, kkt_tol)
    if not force and alpha[i] >= support_cutoff(blocks, NONSUPPORT_THRESHOLD):
        raise InputError(f"index {i} is a support vector; pass force=True to perturb it anyway")
    alpha[i] = delta
    if algo == "munk":
        new = munk_step(blocks, AlphaState.from_vector(alpha, blocks.n_A)).alpha
    elif algo == "m3":
        new = m3_step(SignedGram.from_blocks(blocks), alpha)
    else:
        raise InputError(f"rate measurement supports munk and m3, not {algo!r}")
    return float(new[i] / delta)


def rate_estimate(blocks, alpha_star, i, algo="munk", deltas=(1e-6, 1e-8), **kw):
    """Contraction factors at two perturbation sizes: ``(coarse, fine)``."""
    return tuple(measured_rate(blocks, alpha_star, i, d, algo, **kw) for d in deltas)


def limit_factors(blocks, alpha_star):
    """delta -> 0 one-step factors for every coefficient: ``(munk, m3)``.

    MUNK multiplies by (z- + 1) / z+ and M3 by (1 + sqrt(1 + 4 z+ z-)) / (2 z+).
    """
    pos_A, neg_A, pos_B, neg_B = _split(blocks, np.asarray(alpha_star, dtype=float))
    zp = np.concatenate([pos_A, pos_B])
    zm = np.concatenate([neg_A, neg_B]) - 1.0
    return (zm + 1.0) / zp, (1.0 + np.sqrt(1.0 + 4.0 * zp * zm)) / (2.0 * zp)


def polish_hard_margin(blocks, alpha, max_rounds=50):
    """Exact hard-margin optimum seeded by an approximate solution.

    Guesses the support set from ``alpha`` and solves ``A_SS alpha_S = 1``,
    then moves indices in or out until the KKT conditions hold. Returns
    ``alpha`` unchanged if no consistent support set is found.
    """
    alpha = np.asarray(alpha, dtype=float)
    A = SignedGram.from_blocks(blocks).A
    g = A @ alpha - 1.0
    scale = max(alpha.max(), np.finfo(float).tiny)
    support = (alpha > 1e-6 * scale) | (np.abs(g) < 1e-9)
    for _ in range(max_rounds):
        S = np.flatnonzero(support)
        if S.size == 0:
            return alpha
        sol, *_ = np.linalg.lstsq(A[np.ix_(S, S)], np.ones(S.size), rcond=None)
        cand = np.zeros_like(alpha)
        cand[S] = sol
        grad = A @ cand - 1.0
        neg = S[sol < 0]
        viol = np.flatnonzero(~support & (grad < -1e-12))
        if neg.size == 0 and viol.size == 0:
            return cand
        if neg.size:
            support[neg[np.argmin(sol[sol < 0])]] = False
        if viol.size:
            support[viol[np.argmin(grad[viol])]] = True
    return alpha


@dataclass
class RateRow:
    index: int
    cls: str
    alpha_star: float
    d_i: float
    l_i: float
    gamma_munk_bound: float
    gamma_m3_bound: float
    gamma_munk_measured: float
    gamma_m3_measured: float


@dataclass
class RateBoundReport:
    rows: list = field(default_factory=list)
    geometry: MarginGeometry = None
    delta: float = 1e-8

    def measured_within_bound(self, tol=1e-4):
        return all(r.gamma_munk_measured <= r.gamma_munk_bound + tol
                   and r.gamma_m3_measured <= r.gamma_m3_bound + tol for r in self.rows)

    def ordering_holds(self):
        return all(r.gamma_munk_bound <= r.gamma_m3_bound for r in self.rows)

    def max_ratio(self):
        if not self.rows:
            return float("nan")
        return max(r.gamma_munk_measured / r.gamma_munk_bound for r in self.rows)

    def to_csv(self, preamble=()):
        out = io.StringIO()
        for line in preamble:
            out.write(f"# {line}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow([r.index, r.cls] + [repr(float(v)) for v in (
                r.alpha_star, r.d_i, r.l_i, r.gamma_munk_bound, r.gamma_m3_bound,
                r.gamma_munk_measured, r.gamma_m3_measured)])
        return out.getvalue()


def rate_report(blocks, alpha_star, delta=1e-8, kkt_tol=FIXED_POINT_KKT, index_map=None):
    """Bounds and measured factors for every non-support coefficient.

    ``index_map`` translates concatenated positions into caller indices (e.g.
    rows of the original dataset) for the ``index`` column.
    """
    geom = geometry_from_blocks(blocks, alpha_star, kkt_tol)
    report = RateBoundReport(geometry=geom, delta=delta)
    for i in geom.nonsupport_indices():
        report.rows.append(RateRow(
            index=int(index_map[i]) if index_map is not None else int(i),
            cls="A" if geom.labels[i] > 0 else "B",
            alpha_star=float(geom.alpha_star[i]),
            d_i=float(geom.d_i[i]),
            l_i=float(geom.l_i[i]),
            gamma_munk_bound=bound_munk(geom, i),
            gamma_m3_bound=bound_m3(geom, i),
            gamma_munk_measured=measured_rate(blocks, alpha_star, i, delta, "munk", kkt_tol=kkt_tol),
            gamma_m3_measured=measured_rate(blocks, alpha_star, i, delta, "m3", kkt_tol=kkt_tol),
        ))
    return report
