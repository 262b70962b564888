"""Inference under fixed alternatives.

For data that are not normal, ``T_{n,a} / n`` estimates the population
distance ``Delta_a = int ||grad psi_X(t) + t psi(t)||^2 w_a(t) dt`` and is
asymptotically normal around it.  This module provides the integral-free
variance estimator ``sigma_hat``, the resulting confidence interval, exact
``Delta_a`` values for three analytic alternatives, and Monte Carlo estimates
of the boundary limits of ``Delta_a``.

Notation: ``CS+(t, x) = cos(t'x) + sin(t'x)`` and ``CS-(t, x) = cos(t'x) - sin(t'x)``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erfinv

from .errors import InvalidArgumentError, TooLargeForNaiveError, UnsupportedDimensionError
from .montecarlo import DELTA_STREAM
from .quadrature import composite_tensor_grid, default_radius
from .samplers import AlternativeSpec, RngStream, draw_rows, population_logpdf, standardizer
from .standardize import as_data_matrix, scaled_residuals, standardized
from .statistic import check_a, pair_sq_dist, t_stat

NAIVE_MAX_N = 12
DELTA_TAIL = 35.0
DELTA_ATOL = 1e-7
DELTA_MIN_NODES = 8  # per panel
DELTA_MAX_NODES = 64  # per panel
DELTA_PANEL = 4.0
SERIES_CUTOFF = 1e-4


# --- variance estimator ------------------------------------------------------


@dataclass
class SigmaHatResult:
    """Variance estimate with its block decomposition.

    ``blocks[(i, k)]`` for ``1 <= i <= k <= 5`` holds the block sum
    ``sigma^{i,k}``; off-diagonal blocks enter ``value`` twice.
    """

    value: float
    blocks: dict = field(default_factory=dict)
    raw: float = 0.0

    @property
    def sd(self):
        return math.sqrt(self.value)


def _finish(h):
    """Assemble the estimate from per-observation vectors ``h[m, j]``, ``m = 0..4``.

    ``value`` is ``(4/n) sum_j (sum_m h[m, j])^2``, a sum of squares, so it is
    nonnegative and free of the cancellation that recombining the block sums
    suffers when the estimate is small against its blocks.  ``raw`` is that
    recombination, kept as a diagnostic.
    """
    n = h.shape[1]
    blocks = {}
    for i in range(5):
        for k in range(i, 5):
            blocks[(i + 1, k + 1)] = 4.0 / n * math.fsum(h[i] * h[k])
    raw = math.fsum(v if i == k else 2.0 * v for (i, k), v in blocks.items())
    total = h.sum(axis=0)
    return SigmaHatResult(value=4.0 / n * math.fsum(total * total), blocks=blocks, raw=raw)


def helper_integrals(a, x, y=None):
    """Closed forms of the four weighted integrals used by the variance estimator.

    Returns ``(L1(x), L2(x), I1(x, y), I2(x, y))`` with

    * ``L1(x) = int t psi(t) CS+(t, x) w_a(t) dt``
    * ``L2(x) = int t t'x psi(t) CS-(t, x) w_a(t) dt``
    * ``I1(x, y) = int CS+(t, x) CS+(t, y) w_a(t) dt``
    * ``I2(x, y) = int t CS+(t, x) CS-(t, y) w_a(t) dt``

    ``y`` defaults to ``x``.
    """
    a = check_a(a)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = x if y is None else np.atleast_1d(np.asarray(y, dtype=float))
    d = x.shape[-1]
    r = float(x @ x)
    e = math.exp(-r / (4 * a + 2))
    c = (2 * math.pi) ** (d / 2)
    L1 = c / (2 * a + 1) ** (d / 2 + 1) * x * e
    L2 = c / (2 * a + 1) ** (d / 2 + 2) * ((2 * a + 1) * x - r * x) * e
    diff = x - y
    I1 = (math.pi / a) ** (d / 2) * math.exp(-float(diff @ diff) / (4 * a))
    I2 = I1 * diff / (2 * a)
    return L1, L2, I1, I2


def _pieces(Y, a):
    n, d = Y.shape
    r = np.einsum("ij,ij->i", Y, Y)
    G = Y @ Y.T
    D = pair_sq_dist(Y)
    E = (math.pi / a) ** (d / 2) * np.exp(-D / (4 * a))
    e = np.exp(-r / (4 * a + 2))
    c = (2 * math.pi) ** (d / 2)
    L1 = c / (2 * a + 1) ** (d / 2 + 1) * Y * e[:, None]
    L2 = c / (2 * a + 1) ** (d / 2 + 2) * ((2 * a + 1) - r)[:, None] * Y * e[:, None]
    return r, G, E, L1, L2


def _p_tensors(Y, a):
    """Literal P-terms: ``P1[i, j]`` and ``Pm[i, j, k]`` for ``m = 2..5``."""
    n, d = Y.shape
    r, G, E, L1, L2 = _pieces(Y, a)
    eye = np.eye(d)
    diff = Y[:, None, :] - Y[None, :, :]  # (i, k, d)
    I2 = E[:, :, None] * diff / (2 * a)
    YY = np.einsum("ja,jb->jab", Y, Y)
    Mp = YY + eye  # Y_j Y_j' + I
    Mm = YY - eye

    P1 = G * E - np.einsum("jc,jc->j", L1, Y)[None, :]
    P2 = G[:, :, None] * E[:, None, :] - np.einsum("kc,jc->jk", L1, Y)[None, :, :]
    P3 = G[:, None, :] * np.einsum("jc,ikc->ijk", Y, I2) - np.einsum("jc,kc->jk", Y, L2)[None]
    P4 = np.einsum("ia,jab,kb->ijk", Y, Mp, Y) * E[:, None, :] - np.einsum(
        "ka,jab,kb->jk", Y, Mp, L1
    )[None]
    P5 = G[:, None, :] * np.einsum("ka,jab,ikb->ijk", Y, Mm, I2) - np.einsum(
        "ka,jab,kb->jk", Y, Mm, L2
    )[None]
    return P1, P2, P3, P4, P5


def sigma_hat_naive(Y, a):
    """Variance estimator by literal evaluation of every multi-index block sum.

    Cost is ``O(n^5)``; intended as a reference for :func:`sigma_hat`.

    Raises
    ------
    TooLargeForNaiveError
        If ``n > 12``.
    """
    a = check_a(a)
    Y = standardized(Y)
    n = Y.shape[0]
    if n > NAIVE_MAX_N:
        raise TooLargeForNaiveError(f"naive evaluation limited to n <= {NAIVE_MAX_N}, got {n}")
    P1, P2, P3, P4, P5 = _p_tensors(Y, a)
    # literal sums over the free indices i and k; P4, P5 carry an extra 1/2 each
    h = np.stack([
        P1.sum(axis=0) / n,
        -P2.sum(axis=(0, 2)) / n**2,
        -P3.sum(axis=(0, 2)) / n**2,
        -P4.sum(axis=(0, 2)) / (2 * n**2),
        -P5.sum(axis=(0, 2)) / (2 * n**2),
    ])
    return _finish(h)


def _g_vectors(Y, a):
    """Per-observation contributions ``g_m[j]`` with ``sigma^2 = (4/n) sum_j (sum_m g_m[j])^2``."""
    n, d = Y.shape
    r, G, E, L1, L2 = _pieces(Y, a)
    quad = lambda M: np.einsum("ja,ab,jb->j", Y, M, Y)  # noqa: E731

    g1 = (G * E).sum(axis=0) / n - np.einsum("jc,jc->j", L1, Y)

    u = Y.T @ E.sum(axis=1)
    s2 = Y @ (u - n * L1.sum(axis=0))
    g2 = -s2 / n**2

    M = G * E / (2 * a)
    w = Y.T @ M.sum(axis=1) - Y.T @ M.sum(axis=0)  # sum_ik G_ik I2(Y_i, Y_k)
    s3 = Y @ (w - n * L2.sum(axis=0))
    g3 = -s3 / n**2

    A4 = Y.T @ E @ Y
    B4 = L1.T @ Y
    s4 = quad(A4 - n * B4) + np.sum(E * G) - n * np.sum(Y * L1)
    g4 = -s4 / (2 * n**2)

    colsum = M.sum(axis=0)
    C5 = Y.T @ M @ Y - (Y * colsum[:, None]).T @ Y
    c5 = np.sum(M * G) - colsum @ r
    B5 = L2.T @ Y
    s5 = quad(C5) - c5 - n * (quad(B5) - np.sum(Y * L2))
    g5 = -s5 / (2 * n**2)
    return np.stack([g1, g2, g3, g4, g5])


def sigma_hat(Y, a):
    """Integral-free estimator of the asymptotic variance of ``sqrt(n)(T/n - Delta_a)``.

    Every block sum is evaluated in ``O(n^2)`` time by contracting the free
    indices into length-``n`` vectors before the shared index.

    Parameters
    ----------
    Y : StandardizedSample or (n, d) array_like
    a : float

    Returns
    -------
    SigmaHatResult
    """
    a = check_a(a)
    Y = standardized(Y)
    n = Y.shape[0]
    return _finish(_g_vectors(Y, a))


# --- confidence interval ---------------------------------------------------


def normal_quantile(p):
    """Standard normal quantile via the inverse error function."""
    if not 0 < p < 1:
        raise InvalidArgumentError("probability must lie in (0, 1)")
    return math.sqrt(2.0) * float(erfinv(2 * p - 1))


@dataclass(frozen=True)
class ConfidenceInterval:
    """Symmetric asymptotic interval ``center +- halfwidth`` with confidence ``level``."""

    lower: float
    upper: float
    level: float
    center: float
    halfwidth: float

    def __contains__(self, value):
        return self.lower <= value <= self.upper


def confidence_interval(X, a, alpha=0.05):
    """Asymptotic ``1 - alpha`` confidence interval for ``Delta_a`` from raw data ``X``."""
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    Y = scaled_residuals(as_data_matrix(X))
    return _interval(Y.residuals, a, alpha)


def _interval(Y, a, alpha):
    n = Y.shape[0]
    center = t_stat(Y, a) / n
    half = sigma_hat(Y, a).sd / math.sqrt(n) * normal_quantile(1 - alpha / 2)
    return ConfidenceInterval(center - half, center + half, 1 - alpha, center, half)


# --- Delta_a for analytic alternatives --------------------------------------

_DELTA_KINDS = ("normal", "uniform", "laplace", "logistic")


def _uniform_cf(t):
    x = math.sqrt(3) * t
    small = np.abs(x) < SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    x2 = x * x
    phi = np.where(small, 1 - x2 / 6 + x2 * x2 / 120 - x2**3 / 5040 + x2**4 / 362880, np.sin(xs) / xs)
    dphi = np.where(
        small,
        math.sqrt(3) * x * (-1 / 3 + x2 / 30 - x2 * x2 / 840 + x2**3 / 45360),
        (3 * np.cos(xs) * t - math.sqrt(3) * np.sin(xs)) / (3 * np.where(small, 1.0, t) ** 2),
    )
    return phi, dphi


def _laplace_cf(t):
    return 2 / (2 + t * t), -4 * t / (2 + t * t) ** 2


def _logistic_cf(t):
    x = math.sqrt(3) * t
    small = np.abs(x) < SERIES_CUTOFF
    # beyond |x| = 300 both factors are below 1e-120
    xs = np.clip(np.where(small, 1.0, x), -300.0, 300.0)
    x2 = x * x
    sh = np.sinh(xs)
    phi = np.where(
        small, 1 - x2 / 6 + 7 * x2 * x2 / 360 - 31 * x2**3 / 15120 + 127 * x2**4 / 604800, xs / sh
    )
    dphi = np.where(
        small,
        math.sqrt(3) * x * (-1 / 3 + 7 * x2 / 90 - 31 * x2 * x2 / 2520 + 127 * x2**3 / 75600),
        math.sqrt(3) * (sh - xs * np.cosh(xs)) / sh**2,
    )
    return phi, dphi


def _normal_cf(t):
    p = np.exp(-0.5 * t * t)
    return p, -t * p


_CF = {"uniform": _uniform_cf, "laplace": _laplace_cf, "logistic": _logistic_cf, "normal": _normal_cf}


def marginal_cf(kind, t):
    """Characteristic function of a unit-variance marginal and its derivative."""
    return _CF[kind](np.asarray(t, dtype=float))


def cf_gradient(kind, t):
    """Gradient of the product characteristic function at the rows of ``t``."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    phi, dphi = marginal_cf(kind, t)
    n, d = t.shape
    grad = np.empty_like(t)
    for j in range(d):
        others = np.prod(np.delete(phi, j, axis=1), axis=1) if d > 1 else 1.0
        grad[:, j] = dphi[:, j] * others
    return grad


def _delta_on_grid(kind, a, d, nodes_per_panel):
    R = default_radius(a, DELTA_TAIL)
    t, w = composite_tensor_grid(nodes_per_panel, R, d, DELTA_PANEL)
    tt = np.einsum("ij,ij->i", t, t)
    diff = cf_gradient(kind, t) + t * np.exp(-0.5 * tt)[:, None]
    return float(np.dot(w * np.exp(-a * tt), np.einsum("ij,ij->i", diff, diff)))


@dataclass(frozen=True)
class DeltaValue:
    value: float
    a: float
    alternative: AlternativeSpec
    method: str = "quadrature"
    nodes_per_panel: Optional[int] = None


def delta_numeric(alt, a, d=None):
    """``Delta_a`` by adaptive tensor Gauss-Legendre quadrature.

    The box ``[-R, R]^d`` with ``R = sqrt(35 / a)`` is cut into panels of
    width at most 4 per axis, so small ``a`` (wide boxes) keep the resolution
    near the origin.  Nodes per panel double from 8 until successive values
    differ by less than 1e-7 (at most 64 per panel).

    Parameters
    ----------
    alt : AlternativeSpec or str
        ``uniform``, ``laplace``, ``logistic`` (i.i.d. unit-variance marginals)
        or ``normal``.
    a : float
    d : int, optional
        Overrides ``alt.d``; must be 1 or 2.
    """
    a = check_a(a)
    if isinstance(alt, str):
        alt = AlternativeSpec(alt, d or 1)
    d = d or alt.d
    if alt.kind not in _DELTA_KINDS:
        raise InvalidArgumentError(f"no analytic characteristic function for {alt.label}")
    if d not in (1, 2):
        raise UnsupportedDimensionError("delta_numeric supports d = 1, 2")
    if d != alt.d:
        alt = AlternativeSpec(alt.kind, d, alt.params)
    if alt.kind == "normal":
        return DeltaValue(0.0, a, alt, "quadrature", 0)
    m = DELTA_MIN_NODES
    prev = _delta_on_grid(alt.kind, a, d, m)
    while m < DELTA_MAX_NODES:
        m *= 2
        cur = _delta_on_grid(alt.kind, a, d, m)
        if abs(cur - prev) < DELTA_ATOL:
            return DeltaValue(max(cur, 0.0), a, alt, "quadrature", m)
        prev = cur
    return DeltaValue(max(prev, 0.0), a, alt, "quadrature", m)


# --- boundary limits of Delta_a ---------------------------------------------


@dataclass(frozen=True)
class DeltaLimits:
    """Monte Carlo estimates of the two boundary limits of ``Delta_a``.

    ``lim_inf``: limit of ``16 a^2 (a/pi)^{d/2} Delta_a`` as ``a -> inf``.
    ``lim_zero``: limit of ``pi^{-d/2} Delta_a`` as ``a -> 0``.
    """

    lim_inf: float
    se_inf: float
    lim_zero: float
    se_zero: float
    samples: int


def delta_limits(alt, d=None, cfg=None, pairs=200_000):
    """Estimate the boundary limits of ``Delta_a`` for a standardized alternative.

    The ``a -> inf`` limit is the population skewness combination
    ``E[X1'X2 ||X1||^2 ||X2||^2] + 2 E[(X1'X2)^3]``.  The ``a -> 0`` limit is
    ``(4 pi)^{d/2} E[||X||^2 f(X)] + d/2 - 2^{d/2+1} E[||X||^2 exp(-||X||^2/2)]``
    with ``f`` the density of the standardized ``X``; the first term comes
    from the pair-kernel integral concentrating on the diagonal.

    Draws use population standardisation.  One stream of ``2 * pairs``
    observations is split in half to form independent pairs.
    """
    if isinstance(alt, str):
        alt = AlternativeSpec(alt, d or 1)
    if d is not None and d != alt.d:
        alt = AlternativeSpec(alt.kind, d, alt.params)
    d = alt.d
    if cfg is not None:
        pairs, seed = cfg.reps, cfg.seed
    else:
        seed = 0
    rng = RngStream(seed, DELTA_STREAM).generator()
    transform, logdet = standardizer(alt)
    raw = draw_rows(alt, 2 * pairs, rng)
    X = transform(raw)
    X1, X2 = X[:pairs], X[pairs:]
    r1 = np.einsum("ij,ij->i", X1, X1)
    r2 = np.einsum("ij,ij->i", X2, X2)
    c = np.einsum("ij,ij->i", X1, X2)
    h_inf = c * r1 * r2 + 2 * c**3

    r = np.concatenate([r1, r2])
    dens = np.exp(population_logpdf(alt, raw) + logdet)
    h_zero = (4 * math.pi) ** (d / 2) * r * dens - 2 ** (d / 2 + 1) * r * np.exp(-r / 2)

    m = len(h_zero)
    return DeltaLimits(
        lim_inf=float(h_inf.mean()),
        se_inf=float(h_inf.std(ddof=1) / math.sqrt(pairs)),
        lim_zero=float(d / 2 + h_zero.mean()),
        se_zero=float(h_zero.std(ddof=1) / math.sqrt(m)),
        samples=pairs,
    )
