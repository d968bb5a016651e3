import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from munk import ConfigError, InputError, KernelSpec, eval_kernel, gram, gram_blocks, validate_nonneg


def test_gaussian_self_is_one():
    x = np.array([0.3, -2.0, 7.5])
    assert eval_kernel(KernelSpec.gaussian(3), x, x) == 1.0


def test_even_polynomial_orthogonal_homogeneous():
    assert eval_kernel(KernelSpec.polynomial(4, coef0=0.0), [1, 0], [0, 1]) == 0.0


def test_gaussian_hand_value():
    # ||x - y||^2 = 2, 2 sigma^2 = 2
    assert eval_kernel(KernelSpec.gaussian(1), [0, 0], [1, 1]) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert eval_kernel(KernelSpec.gaussian(1), [0, 0], [1, 1]) == pytest.approx(0.367879, abs=1e-6)


def test_gram_orthonormal_linear():
    np.testing.assert_array_equal(gram(KernelSpec.linear(), [[1, 0], [0, 1]], [[1, 0], [0, 1]]), np.eye(2))


def test_gram_gaussian_unit_diagonal():
    X = np.random.default_rng(0).normal(size=(7, 3))
    np.testing.assert_array_equal(np.diag(gram(KernelSpec.gaussian(3), X)), np.ones(7))


def test_gram_polynomial_inhomogeneous():
    np.testing.assert_array_equal(gram(KernelSpec.polynomial(2, coef0=1.0), [[1, 0]], [[0, 1]]), [[1.0]])


def test_blocks_two_point():
    b = gram_blocks(KernelSpec.linear(), [[1, 0]], [[0, 1]])
    assert b.K_AA.tolist() == [[1.0]] and b.K_AB.tolist() == [[0.0]] and b.K_BB.tolist() == [[1.0]]


@pytest.mark.parametrize("spec", [KernelSpec.gaussian(0.7), KernelSpec.polynomial(4), KernelSpec.linear()])
def test_blocks_identical_classes(spec):
    X = np.random.default_rng(1).uniform(0, 1, size=(4, 3))
    b = gram_blocks(spec, X, X)
    np.testing.assert_array_equal(b.K_AA, b.K_BB)
    np.testing.assert_allclose(b.K_AB, b.K_AA, rtol=1e-14)


def test_blocks_match_pointwise():
    rng = np.random.default_rng(2)
    spec = KernelSpec.gaussian(1)
    XA, XB = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    b = gram_blocks(spec, XA, XB)
    for M, P, Q in ((b.K_AA, XA, XA), (b.K_AB, XA, XB), (b.K_BB, XB, XB)):
        for i in range(3):
            for j in range(3):
                assert M[i, j] == pytest.approx(eval_kernel(spec, P[i], Q[j]), rel=1e-14)


def test_blocks_reject_empty_class():
    with pytest.raises(InputError):
        gram_blocks(KernelSpec.linear(), np.zeros((0, 2)), [[1, 0]])


def test_dimension_mismatch():
    with pytest.raises(InputError):
        eval_kernel(KernelSpec.gaussian(1), [1, 2], [1, 2, 3])
    with pytest.raises(InputError):
        gram(KernelSpec.gaussian(1), np.zeros((2, 2)), np.zeros((2, 3)))


@pytest.mark.parametrize("kwargs", [
    dict(family="gaussian", sigma=0.0),
    dict(family="gaussian", sigma=-1.0),
    dict(family="polynomial_even", degree=3),
    dict(family="polynomial_even", degree=0),
    dict(family="polynomial_even", degree=2, coef0=-1.0),
    dict(family="cosine"),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        KernelSpec(**kwargs)


def test_validate_nonneg():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(10, 3))
    assert validate_nonneg(KernelSpec.gaussian(2), pts).passed
    assert validate_nonneg(KernelSpec.polynomial(4), -np.abs(pts)).passed
    # (1, 0) . (-1, 0) = -1
    rep = validate_nonneg(KernelSpec.linear(), [[1.0, 0.0], [-1.0, 0.0]])
    assert not rep.passed and rep.min_value == -1.0


@pytest.mark.parametrize("spec,text", [
    (KernelSpec.gaussian(3.0), "family=gaussian sigma=3.0"),
    (KernelSpec.polynomial(4, 1.0), "family=polynomial_even degree=4 coef0=1.0"),
    (KernelSpec.linear(), "family=linear_nonneg"),
    (KernelSpec.gaussian(0.1, offset=1.0), "family=gaussian sigma=0.1 offset=1.0"),
])
def test_token_round_trip(spec, text):
    assert spec.to_tokens() == text
    assert KernelSpec.from_tokens(text) == spec


@pytest.mark.parametrize("text", ["sigma=3", "family=gaussian sigma", "family=gaussian degree=4", "family=poly"])
def test_bad_tokens(text):
    with pytest.raises(ConfigError):
        KernelSpec.from_tokens(text)


def test_offset_adds_constant():
    base, shifted = KernelSpec.gaussian(1), KernelSpec.gaussian(1, offset=0.5)
    assert eval_kernel(shifted, [0, 1], [1, 0]) == pytest.approx(eval_kernel(base, [0, 1], [1, 0]) + 0.5)


vectors = st.integers(1, 6).flatmap(
    lambda d: st.tuples(*[arrays(np.float64, d, elements=st.floats(-10, 10)) for _ in range(2)]))
specs = st.one_of(
    st.floats(0.05, 10).map(KernelSpec.gaussian),
    st.tuples(st.sampled_from([2, 4, 6]), st.floats(0, 3)).map(lambda t: KernelSpec.polynomial(*t)),
)


@settings(max_examples=1000, deadline=None)
@given(specs, vectors)
def test_symmetric_and_nonnegative(spec, xy):
    x, y = xy
    v = eval_kernel(spec, x, y)
    assert v >= 0
    assert v == eval_kernel(spec, y, x)


@settings(max_examples=100, deadline=None)
@given(specs, st.integers(1, 20), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_gram_symmetric_psd(spec, n, d, seed):
    X = np.random.default_rng(seed).uniform(-2, 2, size=(n, d))
    K = gram(spec, X)
    assert np.all(K >= 0)
    np.testing.assert_allclose(K, K.T, rtol=1e-12, atol=0)
    ev = np.linalg.eigvalsh(K)
    assert ev.min() >= -1e-8 * max(ev.max(), 0.0)
