"""Competing affine invariant normality statistics: BHEP, HZ, HV and energy.

All functions take scaled residuals.  BHEP carries no factor ``n``; its
critical values are simulated with the same convention.
"""

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InvalidArgumentError, NumericOverflowError
from .standardize import standardized
from .statistic import _pair_sum, check_a, clamp_nonnegative, pair_sq_dist

HV_DEFAULT_A = 5.0
BHEP_DEFAULT_A = 1.0

# exp() arguments above this raise instead of overflowing to inf
_EXP_GUARD = 700.0
# the alternating series is used up to this norm; beyond, the
# positive-term (Kummer-transformed) series avoids cancellation
_SERIES_MAX_NORM = 4.0
_SERIES_RTOL = 1e-12
_SERIES_MAX_TERMS = 500


def bhep_stat(Y, a=BHEP_DEFAULT_A):
    """BHEP statistic with bandwidth ``a`` (no factor ``n``)."""
    a = check_a(a)
    Y = standardized(Y)
    n, d = Y.shape
    r = np.einsum("ij,ij->i", Y, Y)
    D = pair_sq_dist(Y)
    pair = _pair_sum(np.exp(-0.5 * a * a * D)) / n**2
    single = 2.0 * (1 + a * a) ** (-d / 2) * math.fsum(
        np.exp(-a * a * r / (2 * (1 + a * a)))
    ) / n
    const = (1 + 2 * a * a) ** (-d / 2)
    return clamp_nonnegative(math.fsum([pair, -single, const]))


def hz_bandwidth(n, d):
    """Henze-Zirkler choice ``a = ((2d + 1) n / 4)^{1/(d+4)} / sqrt(2)``."""
    return ((2 * d + 1) * n / 4) ** (1 / (d + 4)) / math.sqrt(2)


def hz_stat(Y):
    Y = standardized(Y)
    n, d = Y.shape
    return bhep_stat(Y, hz_bandwidth(n, d))


def hv_stat(Y, a=HV_DEFAULT_A):
    """Henze-Visagie moment generating function statistic.

    Raises
    ------
    NumericOverflowError
        If an exponent ``||Y_i + Y_j||^2 / (4a)`` exceeds 700.
    """
    a = check_a(a)
    Y = standardized(Y)
    n, d = Y.shape
    r = np.einsum("ij,ij->i", Y, Y)
    G = Y @ Y.T
    S = r[:, None] + r[None, :] + 2.0 * G
    if S.max() / (4 * a) > _EXP_GUARD:
        raise NumericOverflowError(
            f"HV exponent overflow for a = {a}; use a larger weight parameter"
        )
    M = np.exp(S / (4 * a)) * (G + S * (1 / (4 * a * a) - 1 / (2 * a)) + d / (2 * a))
    return (math.pi / a) ** (d / 2) * _pair_sum(M) / n


def mean_gaussian_distance(d):
    """``E||Z1 - Z2||`` for independent standard normal ``Z1, Z2`` in R^d."""
    return 2.0 * math.exp(gammaln((d + 1) / 2) - gammaln(d / 2))


def _alternating_series(r, d):
    # sum_k (-1)^k / (k! 2^k) r^{2k+2} / ((2k+1)(2k+2)) * G((d+1)/2) G(k+3/2) / G(k+d/2+1)
    r = np.asarray(r, dtype=float)
    total = np.zeros_like(r)
    logr = np.log(np.where(r > 0, r, 1.0))
    base = gammaln((d + 1) / 2)
    active = r > 0
    for k in range(_SERIES_MAX_TERMS):
        logt = (
            base - gammaln(k + 1) - k * math.log(2.0) + (2 * k + 2) * logr
            - math.log((2 * k + 1) * (2 * k + 2)) + gammaln(k + 1.5)
            - gammaln(k + d / 2 + 1)
        )
        term = (-1) ** k * np.exp(logt)
        term = np.where(active, term, 0.0)
        total += term
        active = active & (np.abs(term) >= _SERIES_RTOL * np.abs(total))
        if not active.any():
            break
    return math.sqrt(2 / math.pi) * total


def _kummer_series(r, d):
    # E||a - Z|| = c_d exp(-x) 1F1((d+1)/2; d/2; x), x = ||a||^2 / 2; all terms positive
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = 0.5 * r * r
    kmax = int(np.max(x) + 12 * math.sqrt(np.max(x)) + 60)
    k = np.arange(kmax)[:, None]
    b, c = (d + 1) / 2, d / 2
    logt = (
        gammaln(b + k) - gammaln(b) - gammaln(c + k) + gammaln(c)
        - gammaln(k + 1) + k * np.log(x)[None, :]
    )
    return math.sqrt(2) * math.exp(gammaln(b) - gammaln(c)) * np.exp(
        logsumexp(logt, axis=0) - x
    )


def expected_norm_to_gaussian(r, d):
    """``E||a - Z||`` for ``Z ~ N_d(0, I)`` as a function of ``r = ||a||``.

    Vectorised over ``r``.  Small norms use the alternating power series in
    ``||a||^2``; larger norms switch to a positive-term representation of the
    same function, which is free of cancellation.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.empty_like(r)
    small = r <= _SERIES_MAX_NORM
    if small.any():
        lead = math.sqrt(2) * math.exp(gammaln((d + 1) / 2) - gammaln(d / 2))
        out[small] = lead + _alternating_series(r[small], d)
    if (~small).any():
        out[~small] = _kummer_series(r[~small], d)
    return float(out[0]) if scalar else out


def energy_stat(Y):
    """Szekely-Rizzo energy statistic for normality on scaled residuals."""
    Y = standardized(Y)
    n, d = Y.shape
    if n < 2:
        raise InvalidArgumentError("energy statistic needs n >= 2")
    Yt = math.sqrt(n / (n - 1)) * Y
    r = np.sqrt(np.einsum("ij,ij->i", Yt, Yt))
    e1 = math.fsum(expected_norm_to_gaussian(r, d))
    diff = Yt[:, None, :] - Yt[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    value = n * (2 * e1 / n - mean_gaussian_distance(d) - _pair_sum(dist) / n**2)
    return clamp_nonnegative(value, n)


# --- batched versions used by the Monte Carlo engine -------------------------


def _batch_parts(Y):
    Y = np.asarray(Y, dtype=float)
    r = np.einsum("mnk,mnk->mn", Y, Y)
    G = np.einsum("mik,mjk->mij", Y, Y)
    return Y, r, G


def bhep_batch(Y, a):
    Y, r, G = _batch_parts(Y)
    m, n, d = Y.shape
    D = pair_sq_dist(Y)
    pair = np.sum(np.exp(-0.5 * a * a * D), axis=(1, 2)) / n**2
    single = 2 * (1 + a * a) ** (-d / 2) * np.mean(
        np.exp(-a * a * r / (2 * (1 + a * a))), axis=1
    )
    return np.maximum(pair - single + (1 + 2 * a * a) ** (-d / 2), 0.0)


def hv_batch(Y, a):
    Y, r, G = _batch_parts(Y)
    m, n, d = Y.shape
    S = r[:, :, None] + r[:, None, :] + 2.0 * G
    if S.max() / (4 * a) > _EXP_GUARD:
        raise NumericOverflowError(f"HV exponent overflow for a = {a}")
    M = np.exp(S / (4 * a)) * (G + S * (1 / (4 * a * a) - 1 / (2 * a)) + d / (2 * a))
    return (math.pi / a) ** (d / 2) * np.sum(M, axis=(1, 2)) / n


def energy_batch(Y):
    Y = np.asarray(Y, dtype=float)
    m, n, d = Y.shape
    Yt = math.sqrt(n / (n - 1)) * Y
    r = np.sqrt(np.einsum("mnk,mnk->mn", Yt, Yt))
    e1 = expected_norm_to_gaussian(r.ravel(), d).reshape(m, n).sum(axis=1)
    D = np.sqrt(pair_sq_dist(Yt))
    value = n * (2 * e1 / n - mean_gaussian_distance(d) - D.sum(axis=(1, 2)) / n**2)
    return np.maximum(value, 0.0)
