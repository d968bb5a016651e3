import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from munk import ConfigError, InputError, LabeledDataset, SplitSpec, load_csv, split, standardize, unstandardize
from conftest import BREAST, SONAR


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_breast_drops_missing_rows():
    ds = load_csv(BREAST, label_column=-1, positive_label="4", drop_columns=[0])
    assert ds.n == 683
    assert ds.dim == 9
    assert len(ds.idx_A) == 239 and len(ds.idx_B) == 444


def test_sonar_loads():
    ds = load_csv(SONAR, label_column=-1, positive_label="M")
    assert (ds.n, ds.dim) == (208, 60)
    assert len(ds.idx_A) == 111


def test_label_mapping_with_header(tmp_path):
    p = write(tmp_path, "f1,f2,cls\n1,2,a\n3,4,a\n5,6,b\n7,8,b\n")
    ds = load_csv(p, label_column="cls", positive_label="a")
    assert ds.y.tolist() == [1, 1, -1, -1]
    assert ds.X.tolist() == [[1, 2], [3, 4], [5, 6], [7, 8]]


def test_header_detected_with_index_label(tmp_path):
    p = write(tmp_path, "f1,f2,cls\n1,2,a\n3,4,b\n")
    assert load_csv(p, label_column=2, positive_label="a").n == 2


def test_missing_policy_error(tmp_path):
    p = write(tmp_path, "1,2,a\n?,4,b\n5,6,b\n")
    with pytest.raises(InputError):
        load_csv(p, positive_label="a", missing_policy="error")
    assert load_csv(p, positive_label="a").n == 2


@pytest.mark.parametrize("text,kwargs", [
    ("1,2,a\n3,4,a\n", dict(positive_label="a")),
    ("f1,f2,c\n1,2,a\n3,4,b\n", dict(label_column="nope")),
    ("1,2,a\n3,x,b\n", dict(positive_label="a")),
    ("1,2,a\n3,b\n", dict(positive_label="a")),
])
def test_load_errors(tmp_path, text, kwargs):
    with pytest.raises(InputError):
        load_csv(write(tmp_path, text), **kwargs)


def test_missing_file():
    with pytest.raises(InputError):
        load_csv("/nonexistent/file.csv")


def test_load_is_pure(tmp_path):
    text = SONAR.read_text()
    a = load_csv(write(tmp_path, text, "a.csv"), positive_label="M")
    b = load_csv(write(tmp_path, text, "b.csv"), positive_label="M")
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)


def test_split_sizes_paper_protocols():
    sonar = load_csv(SONAR, positive_label="M")
    tr, te = split(sonar, SplitSpec(0.5, 7))
    assert (tr.n, te.n) == (104, 104)
    breast = load_csv(BREAST, positive_label="4", drop_columns=[0])
    tr, te = split(breast, SplitSpec(0.8, 7))
    assert abs(tr.n - 546) <= 1 and abs(te.n - 137) <= 1


def _rows(ds):
    return {tuple(r) for r in np.column_stack([ds.X, ds.y])}


def test_split_deterministic():
    ds = load_csv(SONAR, positive_label="M")
    a, _ = split(ds, SplitSpec(0.5, 11))
    b, _ = split(ds, SplitSpec(0.5, 11))
    c, _ = split(ds, SplitSpec(0.5, 12))
    np.testing.assert_array_equal(a.X, b.X)
    assert not np.array_equal(a.X, c.X)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 80), st.floats(0.1, 0.9), st.integers(0, 2**64 - 1), st.booleans())
def test_split_partition_and_ratio(n, frac, seed, stratified):
    rng = np.random.default_rng(n)
    y = np.where(rng.random(n) < 0.4, 1.0, -1.0)
    y[:2], y[2:4] = 1.0, -1.0
    X = np.arange(n, dtype=float)[:, None]  # row ids
    ds = LabeledDataset(X, y)
    try:
        tr, te = split(ds, SplitSpec(frac, seed, stratified))
    except InputError:
        assert not stratified
        return
    ids_tr, ids_te = set(tr.X[:, 0]), set(te.X[:, 0])
    assert ids_tr.isdisjoint(ids_te) and ids_tr | ids_te == set(range(n))
    if stratified:
        p = np.mean(y > 0)
        for part in (tr, te):
            assert abs(np.mean(part.y > 0) - p) <= 1.0 / part.n + 1e-12


def test_split_rejects_bad_fraction():
    with pytest.raises(ConfigError):
        SplitSpec(1.0, 0)
    with pytest.raises(ConfigError):
        SplitSpec(0.5, -1)


def test_stratified_needs_two_per_class():
    ds = LabeledDataset(np.zeros((4, 1)), np.array([1.0, -1.0, -1.0, -1.0]))
    with pytest.raises(InputError):
        split(ds, SplitSpec(0.5, 0))


def test_standardize():
    rng = np.random.default_rng(0)
    X = rng.normal(3, 5, size=(20, 3))
    X[:, 1] = 4.0
    y = np.where(np.arange(20) % 2, 1.0, -1.0)
    tr, te = LabeledDataset(X[:15], y[:15]), LabeledDataset(X[15:], y[15:])
    tr2, te2, mean, scale = standardize(tr, te)
    np.testing.assert_allclose(tr2.X.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(tr2.X[:, [0, 2]].std(axis=0), 1, atol=1e-12)
    assert scale[1] == 1.0 and np.all(tr2.X[:, 1] == 0)
    np.testing.assert_allclose(te2.X, (te.X - mean) / scale)
    np.testing.assert_allclose(unstandardize(tr2, mean, scale).X, tr.X, atol=1e-12)
