import io
import shutil
import subprocess
import sys

import numpy as np
import pytest

from munk import load_model
from munk.cli import EXIT_INVALID, EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, main, parse_seeds
from munk.errors import ConfigError
from conftest import ROOT, separable_instance


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def csv_data(tmp_path):
    ds, _ = separable_instance(np.random.default_rng(60), n=40, dim=3)
    p = tmp_path / "toy.csv"
    with open(p, "w") as fh:
        fh.write("f1,f2,f3,label\n")
        for x, y in zip(ds.X, ds.y):
            fh.write(",".join(f"{v:.6f}" for v in x) + f",{'pos' if y > 0 else 'neg'}\n")
    return p


def base(csv_data):
    return ["--data", csv_data, "--label-col", "label", "--positive-label", "pos"]


def test_train_writes_outputs(tmp_path, csv_data):
    model, trace = tmp_path / "m.txt", tmp_path / "t.csv"
    code, out = run("train", *base(csv_data), "--kernel", "gaussian", "--sigma", "1", "--seed", "3",
                    "--out-model", model, "--out-trace", trace)
    assert code == EXIT_OK
    assert "test_error=" in out and "support=" in out
    m = load_model(model)
    assert m.kernel.to_tokens() == "family=gaussian sigma=1.0"
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("# munk-trace v1") and lines[1].startswith("# config ")
    assert "seed" in lines[1] and "kernel=family=gaussian sigma=1.0" in lines[1]
    assert lines[2] == "iter,objective,kkt_violation,n_support,elapsed_s"


def test_missing_file_no_outputs(tmp_path):
    model = tmp_path / "m.txt"
    code, _ = run("train", "--data", tmp_path / "nope.csv", "--out-model", model, "--out-trace", tmp_path / "t.csv")
    assert code == EXIT_IO
    assert list(tmp_path.iterdir()) == []


def test_negative_kernel_rejected(tmp_path, csv_data):
    code, _ = run("train", *base(csv_data), "--kernel", "linear", "--standardize", "on",
                  "--out-model", tmp_path / "m.txt")
    assert code == EXIT_INVALID
    assert not (tmp_path / "m.txt").exists()


def test_bad_flags(csv_data):
    assert run("train", *base(csv_data), "--kernel", "poly", "--degree", "3")[0] == EXIT_INVALID
    assert run("train", *base(csv_data), "--C", "-1")[0] == EXIT_INVALID
    assert run("train", *base(csv_data), "--seed", "1", "--seeds", "1..2")[0] == EXIT_INVALID
    assert run("train", *base(csv_data), "--split", "1.5")[0] == EXIT_INVALID


def test_nonconvergence_exit(csv_data):
    assert run("train", *base(csv_data), "--max-iters", "2")[0] == EXIT_NOT_CONVERGED
    assert run("train", *base(csv_data), "--max-iters", "2", "--on-nonconvergence", "warn")[0] == EXIT_OK


def test_seeds_summary(tmp_path, csv_data):
    report = tmp_path / "r.csv"
    code, out = run("train", *base(csv_data), "--seeds", "1..3", "--out-report", report)
    assert code == EXIT_OK
    assert "over 3 seeds" in out and "mean=" in out and "std=" in out
    rows = [l for l in report.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("seed,") and [r.split(",")[0] for r in rows[1:]] == ["1", "2", "3"]


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("7, 2") == [7, 2]
    with pytest.raises(ConfigError):
        parse_seeds(",")


def test_compare_deterministic(tmp_path, csv_data):
    outs = []
    t, p = tmp_path / "c.csv", tmp_path / "c.svg"
    for _ in range(2):
        code, text = run("compare", *base(csv_data), "--sigma", "1", "--seed", "2", "--kkt-tol", "1e-8",
                         "--out-trace", t, "--out-plot", p)
        assert code == EXIT_OK
        outs.append((t.read_bytes(), p.read_bytes()))
    assert outs[0] == outs[1]
    lines = outs[0][0].decode().splitlines()
    assert lines[2] == "iter,objective_munk,objective_m3"
    svg = outs[0][1].decode()
    assert svg.count("<polyline") == 2 and ">MUNK<" in svg and ">M3<" in svg
    assert "iterations to close 99.9999% of the objective gap" in text


def test_bounds_demo(tmp_path):
    rep = tmp_path / "b.csv"
    code, out = run("bounds", "--demo", "three-point", "--kkt-tol", "1e-12", "--out-report", rep)
    assert code == EXIT_OK and out.strip().endswith("PASS")
    rows = [l.split(",") for l in rep.read_text().splitlines() if not l.startswith("#")]
    assert rows[0][0] == "index"
    idx, cls, a, d_i, l_i, bm, b3, mm, m3 = rows[1]
    assert (idx, cls) == ("2", "B")
    assert float(bm) == pytest.approx(8 / 9, abs=1e-12) and float(b3) == pytest.approx(16 / 17, abs=1e-12)
    assert float(mm) == pytest.approx(0.5, abs=1e-6)


def test_bounds_empty(tmp_path):
    code, out = run("bounds", "--demo", "two-point")
    assert code == EXIT_OK and "warning" in out


def test_bounds_rejects_soft_margin():
    assert run("bounds", "--demo", "three-point", "--C", "1")[0] == EXIT_INVALID


def test_nmf(tmp_path):
    X = np.outer([1.0, 2.0, 3.0], [0.5, 1.0, 2.0, 4.0])
    src = tmp_path / "x.csv"
    np.savetxt(src, X, delimiter=",")
    w1, w2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    code, out = run("nmf", "--data", src, "--rank", "1", "--iters", "500", "--seed", "4", "--out-w", w1,
                    "--out-h", tmp_path / "h.csv", "--out-trace", tmp_path / "e.csv")
    assert code == EXIT_OK
    resid = float(out.split("relative_residual=")[1].split()[0])
    assert resid < 1e-8
    run("nmf", "--data", src, "--rank", "1", "--iters", "500", "--seed", "4", "--out-w", w2)
    assert w1.read_bytes() == w2.read_bytes()
    W = np.loadtxt(w1, delimiter=",", ndmin=2)
    assert W.shape == (3, 1)
    assert (tmp_path / "e.csv").read_text().splitlines()[2] == "iter,frobenius_objective"


def test_nmf_rejects_negative(tmp_path):
    src = tmp_path / "x.csv"
    src.write_text("1,2\n-1,3\n")
    assert run("nmf", "--data", src, "--rank", "1")[0] == EXIT_INVALID
    assert run("nmf", "--data", tmp_path / "missing.csv", "--rank", "1")[0] == EXIT_IO


@pytest.mark.skipif(shutil.which("munk") is None, reason="console script not installed")
def test_entry_point(tmp_path):
    out = subprocess.run(["munk", "bounds", "--demo", "three-point"], capture_output=True, text=True, cwd=ROOT)
    assert out.returncode == 0 and "PASS" in out.stdout


def test_module_entry(tmp_path, csv_data):
    out = subprocess.run([sys.executable, "-m", "munk.cli", "train", "--data", str(tmp_path / "none.csv")],
                         capture_output=True, text=True, cwd=ROOT)
    assert out.returncode == EXIT_IO and "error:" in out.stderr
