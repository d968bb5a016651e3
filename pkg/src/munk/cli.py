"""Command-line front end.

Exit codes: 0 success, 2 I/O failure, 3 invalid configuration or data,
4 non-convergence (``--on-nonconvergence warn`` downgrades it to a warning).
Verbosity comes from the ``MUNK_LOG`` environment variable (e.g. ``DEBUG``).
"""
import argparse
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analysis import fixed_point_residual, polish_hard_margin, rate_report
from .data import SplitSpec, load_csv, split, standardize
from .errors import ConfigError, InputError, ModelFormatError, NotConvergedError
from .kernels import KernelSpec, gram_blocks
from .model import misclassification_rate, save_model
from .nmf import matrix_csv, nmf_run, trace_csv
from .plot import write_convergence_svg
from .solver import SolverConfig, train, train_blocks

log = logging.getLogger("munk")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3, 4
KERNEL_NAMES = {"gaussian": "gaussian", "poly": "polynomial_even", "linear": "linear_nonneg"}


class NonConvergence(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    data: str = None
    label_col: str = "-1"
    positive_label: str = "1"
    drop_cols: list = field(default_factory=list)
    kernel: str = "family=gaussian sigma=1.0"
    C: float = math.inf
    algo: str = "munk"
    eta: float = None
    split: float = 0.8
    seeds: list = field(default_factory=lambda: [0])
    standardize: bool = True
    max_iters: int = 10**6
    tol: float = 1e-10
    kkt_tol: float = 1e-6
    init_alpha: float = 1.0
    alternating: bool = False
    out_model: str = None
    out_trace: str = None
    out_plot: str = None
    out_report: str = None

    def describe(self):
        parts = []
        for k, v in asdict(self).items():
            if isinstance(v, list):
                v = ",".join(str(x) for x in v)
            parts.append(f"{k}={v}")
        return " ".join(parts)

    def preamble(self, kind):
        return [f"{kind} v1 munk {__version__}", "config " + self.describe()]

    def solver_config(self, **kw):
        return SolverConfig(max_iters=self.max_iters, rel_obj_tol=self.tol, kkt_tol=self.kkt_tol,
                            init_alpha=self.init_alpha, C=self.C, alternating=self.alternating,
                            eta=self.eta, **kw)


def parse_seeds(text):
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"empty seed list {text!r}")
    return seeds


def _kernel_from_args(args):
    family = KERNEL_NAMES[args.kernel]
    if family == "gaussian":
        return KernelSpec(family, sigma=args.sigma, offset=args.kernel_offset)
    if family == "polynomial_even":
        return KernelSpec(family, degree=args.degree, coef0=args.coef0, offset=args.kernel_offset)
    return KernelSpec(family, offset=args.kernel_offset)


def resolve(args):
    """Validate flags and build a fully resolved ``RunConfig``."""
    spec = _kernel_from_args(args)
    if args.seeds and args.seed is not None:
        raise ConfigError("use either --seed or --seeds, not both")
    seeds = parse_seeds(args.seeds) if args.seeds else [args.seed if args.seed is not None else 0]
    std = args.standardize
    if std is None:
        std = "on" if spec.family == "gaussian" else "off"
    if not args.C > 0:
        raise ConfigError("--C must be > 0")
    cfg = RunConfig(
        subcommand=args.command,
        data=args.data,
        label_col=args.label_col,
        positive_label=args.positive_label,
        drop_cols=[c for c in (args.drop_cols or "").split(",") if c],
        kernel=spec.to_tokens(),
        C=args.C,
        algo=getattr(args, "algo", "munk"),
        eta=args.eta,
        split=args.split,
        seeds=seeds,
        standardize=std == "on",
        max_iters=args.max_iters,
        tol=args.tol,
        kkt_tol=args.kkt_tol,
        init_alpha=args.init_alpha,
        alternating=args.alternating,
        out_model=args.out_model,
        out_trace=args.out_trace,
        out_plot=args.out_plot,
        out_report=args.out_report,
    )
    SplitSpec(cfg.split, seeds[0])
    cfg.solver_config()
    if len(seeds) > 1 and (cfg.out_model or cfg.out_trace or cfg.out_plot):
        raise ConfigError("--out-model/--out-trace/--out-plot need a single seed; use --out-report with --seeds")
    return cfg


def _load(cfg):
    if not cfg.data:
        raise ConfigError("--data is required")
    if not os.path.isfile(cfg.data):
        raise FileNotFoundError(cfg.data)
    return load_csv(cfg.data, cfg.label_col, cfg.positive_label, drop_columns=cfg.drop_cols)


def _prepare(cfg, ds, seed):
    tr, te = split(ds, SplitSpec(cfg.split, seed))
    if cfg.standardize:
        tr, te, _, _ = standardize(tr, te)
    return tr, te


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_train(cfg, out):
    ds = _load(cfg)
    spec = KernelSpec.from_tokens(cfg.kernel)
    rows = []
    pending = {}
    unconverged = []
    for seed in cfg.seeds:
        tr, te = _prepare(cfg, ds, seed)
        model, trace = train(tr, spec, cfg.solver_config(), cfg.algo)
        train_err = misclassification_rate(model, tr)
        test_err = misclassification_rate(model, te)
        rows.append((seed, train_err, test_err, trace.iters[-1], trace.final_objective, model.n_support))
        print(f"seed={seed} algo={cfg.algo} iterations={trace.iters[-1]} stop={trace.stop_reason} "
              f"objective={trace.final_objective:.12g} support={model.n_support} "
              f"train_error={100 * train_err:.2f}% test_error={100 * test_err:.2f}%", file=out)
        if trace.diverged:
            print(f"warning: seed {seed}: objective increased during training (unstable step size?)", file=out)
        if not trace.converged:
            unconverged.append(seed)
        if cfg.out_model:
            pending["model"] = model
        if cfg.out_trace:
            pending[cfg.out_trace] = trace.to_csv(cfg.preamble("munk-trace"))
    if len(rows) > 1:
        errs = np.array([r[2] for r in rows])
        print(f"test_error mean={100 * errs.mean():.2f}% std={100 * errs.std():.2f}% over {len(rows)} seeds",
              file=out)
    if cfg.out_report:
        lines = [f"# {p}" for p in cfg.preamble("munk-eval")]
        lines.append("seed,train_error,test_error,iterations,objective,n_support")
        lines += [f"{s},{a!r},{b!r},{i},{o!r},{n}" for s, a, b, i, o, n in rows]
        pending[cfg.out_report] = "\n".join(lines) + "\n"
    if "model" in pending:
        save_model(pending.pop("model"), cfg.out_model)
    for path, text in pending.items():
        _write(path, text)
    if unconverged:
        raise NonConvergence(f"did not converge within --max-iters (seeds {unconverged})")


def _iters_to_gap(objs, target, start, frac=0.999999):
    """First iteration closing ``frac`` of the gap between ``start`` and ``target``."""
    need = start - frac * (start - target)
    for t, s in enumerate(objs):
        if s <= need:
            return t
    return None


def cmd_compare(cfg, out):
    ds = _load(cfg)
    spec = KernelSpec.from_tokens(cfg.kernel)
    tr, _ = _prepare(cfg, ds, cfg.seeds[0])
    blocks = gram_blocks(spec, tr.X_A, tr.X_B)
    traces = {}
    for algo in ("munk", "m3"):
        _, trace = train_blocks(blocks, cfg.solver_config(trace_every=1), algo)
        traces[algo] = trace
        print(f"{algo}: iterations={trace.iters[-1]} stop={trace.stop_reason} "
              f"objective={trace.final_objective:.12g}", file=out)
    best = min(t.final_objective for t in traces.values())
    for algo, trace in traces.items():
        n = _iters_to_gap(trace.objective, best, trace.objective[0])
        print(f"{algo}: iterations to close 99.9999% of the objective gap: {n}", file=out)
    n = max(len(t) for t in traces.values())
    lines = [f"# {p}" for p in cfg.preamble("munk-compare")]
    lines.append("iter,objective_munk,objective_m3")
    for i in range(n):
        cells = [str(i)]
        for algo in ("munk", "m3"):
            obj = traces[algo].objective
            cells.append(repr(obj[i]) if i < len(obj) else "")
        lines.append(",".join(cells))
    if cfg.out_trace:
        _write(cfg.out_trace, "\n".join(lines) + "\n")
    if cfg.out_plot:
        write_convergence_svg(
            {"MUNK": (traces["munk"].iters, traces["munk"].objective),
             "M3": (traces["m3"].iters, traces["m3"].objective)},
            cfg.out_plot,
            title=f"{os.path.basename(cfg.data)}: {cfg.kernel}",
            comments=cfg.preamble("munk-plot"),
        )
    if not all(t.converged for t in traces.values()):
        raise NonConvergence("at least one solver hit --max-iters")


def demo_instance(name):
    """Tiny analytic instances: (X_A, X_B) under the linear kernel."""
    if name == "two-point":
        return np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])
    if name == "three-point":
        return np.array([[1.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 2.0]])
    raise ConfigError(f"unknown demo instance {name!r}")


def cmd_bounds(cfg, out, demo=None, delta=1e-8):
    if not math.isinf(cfg.C):
        raise ConfigError("rate bounds are defined for the hard-margin problem only (omit --C)")
    if demo:
        X_A, X_B = demo_instance(demo)
        blocks = gram_blocks(KernelSpec.from_tokens(cfg.kernel), X_A, X_B)
        index_map = np.arange(X_A.shape[0] + X_B.shape[0])
    else:
        ds = _load(cfg)
        tr, _ = _prepare(cfg, ds, cfg.seeds[0])
        blocks = gram_blocks(KernelSpec.from_tokens(cfg.kernel), tr.X_A, tr.X_B)
        index_map = np.concatenate([tr.idx_A, tr.idx_B])
    st, trace = train_blocks(blocks, cfg.solver_config(), "munk")
    alpha = polish_hard_margin(blocks, st.alpha)
    residual = fixed_point_residual(blocks, alpha)
    print(f"munk: iterations={trace.iters[-1]} stop={trace.stop_reason} fixed-point residual={residual:.3g}",
          file=out)
    try:
        report = rate_report(blocks, alpha, delta=delta, index_map=index_map)
    except NotConvergedError as exc:
        raise NonConvergence(str(exc)) from exc
    if cfg.out_report:
        _write(cfg.out_report, report.to_csv(cfg.preamble("munk-bounds")))
    if not report.rows:
        print("warning: no non-support coefficients; the report is empty", file=out)
        return
    ok = report.measured_within_bound() and report.ordering_holds()
    print(f"non-support coefficients: {len(report.rows)}", file=out)
    print(f"max measured/bound ratio (MUNK): {report.max_ratio():.6f}", file=out)
    print(f"bound ordering munk <= m3: {'yes' if report.ordering_holds() else 'no'}", file=out)
    print("PASS" if ok else "FAIL", file=out)


def cmd_nmf(args, out):
    if not os.path.isfile(args.data or ""):
        raise FileNotFoundError(args.data)
    try:
        X = np.loadtxt(args.data, delimiter=",", ndmin=2, comments="#")
    except ValueError as exc:
        raise InputError(f"{args.data}: {exc}") from exc
    st, trace = nmf_run(X, args.rank, args.iters, args.seed)
    resid = math.sqrt(2 * trace[-1]) / max(np.linalg.norm(X), np.finfo(float).tiny)
    print(f"rank={args.rank} iterations={args.iters} objective={trace[-1]:.12g} "
          f"relative_residual={resid:.3g}", file=out)
    pre = [f"munk-nmf v1 munk {__version__}",
           f"config data={args.data} rank={args.rank} iters={args.iters} seed={args.seed}"]
    if args.out_w:
        _write(args.out_w, matrix_csv(st.W, pre))
    if args.out_h:
        _write(args.out_h, matrix_csv(st.H, pre))
    if args.out_trace:
        _write(args.out_trace, trace_csv(trace, pre))


def _common(p):
    p.add_argument("--data")
    p.add_argument("--label-col", default="-1", help="label column name or index (default: last)")
    p.add_argument("--positive-label", default="1", help="label value mapped to +1")
    p.add_argument("--drop-cols", default="", help="comma-separated columns to ignore (e.g. an id column)")
    p.add_argument("--kernel", choices=sorted(KERNEL_NAMES), default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--coef0", type=float, default=1.0)
    p.add_argument("--kernel-offset", type=float, default=0.0)
    p.add_argument("--C", type=float, default=math.inf)
    p.add_argument("--eta", type=float, default=None, help="Kernel Adatron rate (default 1/max k_ii)")
    p.add_argument("--split", type=float, default=0.8, help="training fraction")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", default=None, help="e.g. 1..10 or 1,4,7")
    p.add_argument("--standardize", choices=("on", "off"), default=None,
                   help="default: on for gaussian, off otherwise")
    p.add_argument("--max-iters", type=int, default=10**6)
    p.add_argument("--tol", type=float, default=1e-10, help="relative objective change tolerance")
    p.add_argument("--kkt-tol", type=float, default=1e-6)
    p.add_argument("--init-alpha", type=float, default=1.0, help="starting value of every coefficient")
    p.add_argument("--alternating", action="store_true", help="update class B with the new class A coefficients")
    p.add_argument("--out-model")
    p.add_argument("--out-trace")
    p.add_argument("--out-plot")
    p.add_argument("--out-report")
    p.add_argument("--on-nonconvergence", choices=("error", "warn"), default="error")


def build_parser():
    parser = argparse.ArgumentParser(prog="munk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"munk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train, evaluate and save a model")
    _common(p)
    p.add_argument("--algo", choices=("munk", "m3", "ka"), default="munk")

    p = sub.add_parser("compare", help="MUNK vs M3 convergence on one split")
    _common(p)

    p = sub.add_parser("bounds", help="asymptotic rate bounds vs measured contraction")
    _common(p)
    p.add_argument("--demo", choices=("two-point", "three-point"),
                   help="use a built-in analytic instance (linear kernel) instead of --data")
    p.add_argument("--delta", type=float, default=1e-8)

    p = sub.add_parser("nmf", help="factor a non-negative CSV matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-w")
    p.add_argument("--out-h")
    p.add_argument("--out-trace")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    logging.basicConfig(level=os.environ.get("MUNK_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "nmf":
            cmd_nmf(args, out)
            return EXIT_OK
        if args.command == "bounds" and args.demo:
            args.kernel = "linear"
            args.standardize = "off"
        cfg = resolve(args)
        log.info("resolved config: %s", cfg.describe())
        if args.command == "train":
            cmd_train(cfg, out)
        elif args.command == "compare":
            cmd_compare(cfg, out)
        else:
            cmd_bounds(cfg, out, demo=args.demo, delta=args.delta)
    except NonConvergence as exc:
        if getattr(args, "on_nonconvergence", "error") == "warn":
            print(f"warning: {exc}", file=sys.stderr)
            return EXIT_OK
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: cannot read {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InputError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
