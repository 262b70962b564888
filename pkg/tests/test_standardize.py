import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinmvn import InvalidArgumentError, SingularCovarianceError, StandardizedSample, scaled_residuals
from steinmvn.standardize import (
    as_data_matrix,
    sample_cov,
    scaled_residuals_batch,
    standardized,
    sym_inv_sqrt,
)

from conftest import random_sample
from oracles import whiten


@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (10, 3), (50, 5)])
def test_residuals_are_centred_and_white(rng, n, d):
    Y = scaled_residuals(random_sample(rng, n, d)).residuals
    assert np.allclose(Y.sum(axis=0), 0.0, atol=1e-10)
    assert np.allclose(Y.T @ Y / n, np.eye(d), atol=1e-10)


def test_matches_independent_whitening(rng):
    X = random_sample(rng, 12, 3)
    assert np.allclose(scaled_residuals(X).residuals, whiten(X), atol=1e-12)


def test_covariance_uses_divisor_n():
    X = np.array([[0.0], [2.0]])
    assert sample_cov(X)[0, 0] == pytest.approx(1.0)


def test_two_points_in_one_dimension():
    Y = scaled_residuals([3.0, 7.0]).residuals
    assert np.allclose(np.sort(Y.ravel()), [-1.0, 1.0])


def test_inverse_sqrt_is_symmetric_root(rng):
    A = rng.normal(size=(4, 4))
    S = A @ A.T + 0.1 * np.eye(4)
    M = sym_inv_sqrt(S)
    assert np.allclose(M, M.T)
    assert np.allclose(M @ S @ M, np.eye(4), atol=1e-10)


def test_too_few_rows_is_singular():
    with pytest.raises(SingularCovarianceError):
        scaled_residuals(np.ones((2, 2)) + np.eye(2))


def test_collinear_data_is_singular(rng):
    x = rng.normal(size=20)
    with pytest.raises(SingularCovarianceError):
        scaled_residuals(np.column_stack([x, 2 * x + 1]))


def test_constant_column_is_singular():
    with pytest.raises(SingularCovarianceError):
        scaled_residuals(np.column_stack([np.arange(5.0), np.ones(5)]))


@pytest.mark.parametrize("bad", [np.array([[1.0, np.nan], [2.0, 3.0], [0.0, 1.0]]),
                                 np.zeros((0, 2)), np.zeros((2, 2, 2))])
def test_invalid_input(bad):
    with pytest.raises(InvalidArgumentError):
        as_data_matrix(bad)


def test_one_dimensional_input_is_a_column():
    assert as_data_matrix([1.0, 2.0, 3.0]).shape == (3, 1)


def test_standardized_accepts_both_forms(rng):
    s = scaled_residuals(random_sample(rng, 6, 2))
    assert isinstance(s, StandardizedSample)
    assert s.n == 6 and s.d == 2
    assert standardized(s) is s.residuals


def test_batch_matches_single(rng):
    X = np.stack([random_sample(rng, 15, 3) for _ in range(4)])
    Y, ok = scaled_residuals_batch(X)
    assert ok.all()
    for i in range(4):
        assert np.allclose(Y[i], scaled_residuals(X[i]).residuals, atol=1e-12)


def test_batch_flags_singular(rng):
    X = np.stack([random_sample(rng, 6, 2), np.ones((6, 2))])
    Y, ok = scaled_residuals_batch(X)
    assert ok.tolist() == [True, False]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4), extra=st.integers(1, 20))
def test_affine_maps_give_orthogonally_equivalent_residuals(seed, d, extra):
    rng = np.random.default_rng(seed)
    n = d + extra
    X = random_sample(rng, n, d)
    A = rng.normal(size=(d, d)) + 3 * np.eye(d)
    Y1 = scaled_residuals(X).residuals
    Y2 = scaled_residuals(X @ A.T + rng.normal(size=d)).residuals
    # residuals agree up to a rotation, so the Gram matrices coincide
    assert np.allclose(Y1 @ Y1.T, Y2 @ Y2.T, atol=1e-8)
