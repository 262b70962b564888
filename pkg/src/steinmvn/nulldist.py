"""Null distribution of the statistic: simulation and limiting theory.

Finite-sample critical values and p-values come from Monte Carlo.  The
limiting law of ``T_{n,a}`` is a weighted sum of independent chi-square(1)
variables whose weights are the eigenvalues of the covariance operator with
kernel :func:`kernel_K`; :func:`cumulants_numeric` and
:func:`nystrom_eigenvalues` approximate it on a quadrature grid.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AccuracyError, InvalidArgumentError, UnsupportedDimensionError
from .montecarlo import NULL_STREAM, simulate_statistics, statistic_key
from .quadrature import QuadratureSpec, tensor_grid
from .samplers import AlternativeSpec
from .standardize import as_data_matrix, scaled_residuals
from .statistic import check_a, scaled_statistic

#: Radius parameter for the cumulant and eigenvalue grids, ``R = sqrt(35 / a)``.
KERNEL_TAIL = 35.0
KAPPA1_RTOL = 1e-6
MIN_QUANTILE_REPS = 100


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo settings.

    ``level`` is the quantile level for critical values (e.g. 0.95).
    ``workers=None`` defers to ``$STEINMVN_WORKERS`` (default 1); the result
    never depends on it.
    """

    reps: int
    seed: int = 0
    level: float = 0.95
    workers: Optional[int] = None

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise InvalidArgumentError("reps must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
        if not 0 < self.level < 1:
            raise InvalidArgumentError("level must lie in (0, 1)")


@dataclass
class CumulantSet:
    """First four cumulants of the limiting null distribution (``d = 1``)."""

    kappa: Sequence[float]
    a: float
    beta1: float = field(init=False)
    beta2: float = field(init=False)

    def __post_init__(self):
        k1, k2, k3, k4 = self.kappa
        if not k2 > 0:
            raise AccuracyError("second cumulant must be positive")
        self.beta1 = k3 / k2**1.5
        self.beta2 = 3.0 + k4 / k2**2

    @property
    def mean(self):
        return self.kappa[0]

    @property
    def variance(self):
        return self.kappa[1]


# --- Monte Carlo -------------------------------------------------------------


def _check_n(n, d):
    if n < d + 1:
        raise InvalidArgumentError(f"need n >= d + 1, got n = {n}, d = {d}")


def null_statistics(n, d, avals, cfg, extra=(), progress=None):
    """Simulated null values of the scaled statistic for each ``a`` (and extra keys).

    All statistics share one set of draws, so quantiles at different levels
    or weights are computed on identical samples.
    """
    _check_n(n, d)
    keys = [statistic_key("T", a) for a in avals] + list(extra)
    return simulate_statistics(
        AlternativeSpec("normal", d), n, keys, cfg.reps, cfg.seed, NULL_STREAM,
        cfg.workers, progress,
    )


def empirical_quantile(values, level):
    """Lower order-statistic quantile (``numpy`` method ``'lower'``)."""
    return float(np.quantile(np.asarray(values), level, method="lower"))


def mc_critical_value(n, d, a, cfg):
    """Empirical ``cfg.level`` quantile of the scaled statistic under the null.

    ``a = inf`` gives the skewness-limit statistic ``n (b~ + 2 b)``.
    """
    if cfg.reps < MIN_QUANTILE_REPS:
        raise InvalidArgumentError(f"quantile estimation needs reps >= {MIN_QUANTILE_REPS}")
    sims = null_statistics(n, d, [a], cfg)
    return empirical_quantile(sims[statistic_key("T", a)], cfg.level)


def mc_pvalue(X, a, cfg):
    """Monte Carlo p-value ``(k + 1) / (reps + 1)`` of the observed statistic.

    ``k`` counts simulated null statistics at least as large as the observed one.
    """
    return mc_pvalues(X, [a], cfg)[float(a)]


def mc_pvalues(X, avals, cfg, progress=None):
    """p-values for several weights from a single null simulation."""
    X = as_data_matrix(X)
    n, d = X.shape
    Y = scaled_residuals(X)
    sims = null_statistics(n, d, avals, cfg, progress=progress)
    out = {}
    for a in avals:
        obs = scaled_statistic(Y, a)
        null = sims[statistic_key("T", a)]
        out[float(a)] = (int(np.sum(null >= obs)) + 1) / (cfg.reps + 1)
    return out


# --- limiting distribution --------------------------------------------------


def mean_limit(a, d):
    """Expectation of the limiting null distribution ``T_{inf,a}``."""
    a = check_a(a)
    poly = 16 * a**3 + (8 * d + 48) * a**2 + (12 * d + 40) * a + d * d + 10 * d + 16
    return (math.pi / a) ** (d / 2) * d - (math.pi / (a + 1)) ** (d / 2) * poly * d / (
        16 * (a + 1) ** 3
    )


def kernel_K(s, t):
    """Covariance matrix kernel ``K(s, t)`` of the limiting Gaussian process."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if s.shape != t.shape or s.ndim != 1:
        raise InvalidArgumentError("s and t must be vectors of equal length")
    return kernel_K_grid(s[None, :], t[None, :])[0, 0]


def kernel_K_grid(S, T):
    """``K(S_i, T_k)`` for all pairs; returns an ``(p, q, d, d)`` array."""
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    d = S.shape[1]
    eye = np.eye(d)
    diff = S[:, None, :] - T[None, :, :]
    dd = np.einsum("pqi,pqj->pqij", diff, diff)
    psi_diff = np.exp(-0.5 * np.einsum("pqi,pqi->pq", diff, diff))
    first = (eye - dd) * psi_diff[..., None, None]

    ss = np.einsum("pi,pj->pij", S, S)[:, None]
    tt = np.einsum("qi,qj->qij", T, T)[None, :]
    st = np.einsum("pi,qj->pqij", S, T)
    ts = np.swapaxes(st, -1, -2)
    c = np.einsum("pi,qi->pq", S, T)[..., None, None]
    inner = ss + tt - ts - st - eye + c * (ss + tt - st - eye) - 0.5 * c * c * st
    psi_s = np.exp(-0.5 * np.einsum("pi,pi->p", S, S))
    psi_t = np.exp(-0.5 * np.einsum("qi,qi->q", T, T))
    return first + inner * np.outer(psi_s, psi_t)[..., None, None]


def trace_K_diag(t):
    """``tr K(t, t)`` evaluated at the rows of ``t``."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    d = t.shape[1]
    r = np.einsum("ij,ij->i", t, t)
    return d - (d + d * r - r * r + r**3 / 2) * np.exp(-r)


def _weighted_operator(a, d, grid):
    """Symmetrised Nystrom matrix ``W^{1/2} K W^{1/2}`` on a tensor grid."""
    R = grid.radius(a, KERNEL_TAIL)
    nodes, weights = tensor_grid(grid.nodes_per_axis, R, d)
    w = weights * np.exp(-a * np.einsum("ij,ij->i", nodes, nodes))
    K = kernel_K_grid(nodes, nodes)  # (N, N, d, d)
    N = len(nodes)
    A = K.transpose(0, 2, 1, 3).reshape(N * d, N * d)
    sw = np.repeat(np.sqrt(w), d)
    A = sw[:, None] * A * sw[None, :]
    return 0.5 * (A + A.T)


def cumulants_numeric(a, grid=None):
    """First four cumulants of ``T_{inf,a}`` for ``d = 1``.

    The iterated kernels are discretised on a Gauss-Legendre grid, which turns
    ``kappa_m = 2^{m-1} (m-1)! int h_m(t, t) w_a(t) dt`` into
    ``2^{m-1} (m-1)! tr(A^m)`` for the weighted kernel matrix ``A``.

    Raises
    ------
    AccuracyError
        If the grid reproduces the closed-form mean only to worse than 1e-6.
    """
    a = check_a(a)
    grid = grid or QuadratureSpec(nodes_per_axis=256)
    A = _weighted_operator(a, 1, grid)
    lam = np.linalg.eigvalsh(A)
    kappa = [2 ** (m - 1) * math.factorial(m - 1) * float(np.sum(lam**m)) for m in range(1, 5)]
    exact = mean_limit(a, 1)
    if abs(kappa[0] - exact) > KAPPA1_RTOL * abs(exact):
        raise AccuracyError(
            f"grid too coarse: kappa_1 = {kappa[0]!r} vs closed form {exact!r}"
        )
    return CumulantSet(kappa=kappa, a=a)


def nystrom_eigenvalues(a, d, grid=None):
    """Approximate eigenvalues of the covariance operator, descending.

    Negative roundoff eigenvalues are clamped to zero.  ``d`` must be 1 or 2;
    the default grid has 256 nodes for ``d = 1`` and 32 per axis for ``d = 2``.
    """
    a = check_a(a)
    if d not in (1, 2):
        raise UnsupportedDimensionError("Nystrom eigenvalues are available for d = 1, 2")
    grid = grid or QuadratureSpec(nodes_per_axis=256 if d == 1 else 32)
    lam = np.linalg.eigvalsh(_weighted_operator(a, d, grid))[::-1]
    return np.maximum(lam, 0.0)
