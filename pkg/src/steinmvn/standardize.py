"""Scaled residuals: centring and whitening by the sample covariance.

Every statistic in this package depends on the data only through the
scaled residuals ``Y_j = S^{-1/2} (X_j - mean)``, which makes the tests
invariant under full-rank affine maps of the raw data.

Note that the sample covariance uses divisor ``n`` (not ``n - 1``).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularCovarianceError

#: Relative eigenvalue threshold below which a covariance counts as singular.
SINGULAR_RTOL = 1e-12


def as_data_matrix(X):
    """Validate raw data and return it as a float ``(n, d)`` array.

    A 1-D input is read as ``n`` univariate observations.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidArgumentError(f"data must be 2-D (n, d), got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise InvalidArgumentError("data matrix is empty")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("data contains non-finite entries")
    return X


def sample_mean(X):
    X = as_data_matrix(X)
    return X.mean(axis=0)


def sample_cov(X):
    """Sample covariance with divisor ``n``."""
    X = as_data_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InvalidArgumentError("sample covariance needs at least 2 rows")
    C = X - X.mean(axis=0)
    S = C.T @ C / n
    return 0.5 * (S + S.T)


def sym_inv_sqrt(S):
    """Symmetric positive definite inverse square root via eigendecomposition.

    Raises
    ------
    SingularCovarianceError
        If the smallest eigenvalue is at most ``1e-12`` times the largest.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {S.shape}")
    S = 0.5 * (S + S.T)
    lam, Q = np.linalg.eigh(S)
    if not lam[-1] > 0 or lam[0] <= SINGULAR_RTOL * lam[-1]:
        raise SingularCovarianceError(
            "covariance matrix is singular (need n >= d + 1 and non-degenerate data)"
        )
    M = (Q / np.sqrt(lam)) @ Q.T
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class StandardizedSample:
    """Scaled residuals of a data matrix.

    Attributes
    ----------
    residuals : (n, d) ndarray
        Rows ``Y_j``; they sum to zero and have identity second-moment matrix.
    """

    residuals: np.ndarray

    @property
    def n(self):
        return self.residuals.shape[0]

    @property
    def d(self):
        return self.residuals.shape[1]


def scaled_residuals(X):
    """Return the :class:`StandardizedSample` of raw data ``X``."""
    X = as_data_matrix(X)
    n, d = X.shape
    if n < d + 1:
        raise SingularCovarianceError(
            f"n = {n} observations in dimension d = {d}: need n >= d + 1"
        )
    M = sym_inv_sqrt(sample_cov(X))
    Y = (X - X.mean(axis=0)) @ M
    if __debug__:
        _check_invariants(Y, M)
    return StandardizedSample(Y)


def _check_invariants(Y, M):
    n, d = Y.shape
    # roundoff grows like eps * cond(S)
    cond = np.linalg.cond(M) ** 2
    slack = max(1.0, cond * 1e-5)
    assert np.all(np.abs(Y.sum(axis=0)) <= 1e-10 * n * slack)
    assert np.all(np.abs(Y.T @ Y / n - np.eye(d)) <= 1e-10 * slack)


def standardized(Y):
    """Coerce ``Y`` (a StandardizedSample or an array of residuals) to an array."""
    if isinstance(Y, StandardizedSample):
        return Y.residuals
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    return Y


def scaled_residuals_batch(X):
    """Vectorised scaled residuals for a stack of samples ``(m, n, d)``.

    Returns ``(Y, ok)`` where ``ok[i]`` is False for samples whose covariance
    failed the singularity check (their residuals are left as NaN).
    """
    X = np.asarray(X, dtype=float)
    m, n, d = X.shape
    C = X - X.mean(axis=1, keepdims=True)
    S = np.einsum("mni,mnj->mij", C, C) / n
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    lam, Q = np.linalg.eigh(S)
    ok = (lam[:, -1] > 0) & (lam[:, 0] > SINGULAR_RTOL * lam[:, -1])
    lam = np.where(ok[:, None], lam, 1.0)
    M = np.einsum("mij,mj,mkj->mik", Q, 1.0 / np.sqrt(lam), Q)
    Y = np.einsum("mni,mij->mnj", C, M)
    Y[~ok] = np.nan
    return Y, ok
