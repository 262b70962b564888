"""The weighted L2 statistic T_{n,a} and its boundary limits.

``T_{n,a} = n * int || grad psi_n(t) + t psi(t) ||^2 exp(-a ||t||^2) dt`` where
``psi_n`` is the empirical characteristic function of the scaled residuals
and ``psi(t) = exp(-||t||^2 / 2)``.  Large values indicate non-normality.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import AccuracyError, InvalidArgumentError, UnsupportedDimensionError
from .quadrature import QuadratureSpec, tensor_grid
from .standardize import standardized

#: Tolerance for treating tiny negative values of a squared-norm integral as 0.
NEG_CLAMP = 1e-9


@dataclass
class TestOutcome:
    """Value of a test statistic together with its context.

    ``a`` is ``math.inf`` for the boundary statistic.  ``p_value`` and
    ``critical_value`` are filled in only when a Monte Carlo null run was done.
    """

    __test__ = False  # not a pytest class

    statistic: float
    a: Optional[float]
    n: int
    d: int
    label: str
    scaled: Optional[float] = None
    p_value: Optional[float] = None
    critical_value: Optional[float] = None
    extra: dict = field(default_factory=dict)


def check_a(a):
    a = float(a)
    if not a > 0 or math.isnan(a):
        raise InvalidArgumentError(f"weight parameter a must be positive, got {a}")
    return a


def clamp_nonnegative(value, scale=1.0):
    """Map roundoff negatives to zero; anything clearly negative is a bug."""
    if value >= 0:
        return value
    if value >= -NEG_CLAMP * max(1.0, abs(scale)):
        return 0.0
    raise AccuracyError(f"squared-norm statistic came out negative: {value!r}")


def _pair_sum(M):
    """Compensated sum of a symmetric matrix using its upper triangle."""
    iu = np.triu_indices(M.shape[0], k=1)
    return 2.0 * math.fsum(M[iu]) + math.fsum(np.diag(M))


def pair_sq_dist(Y):
    """Squared distances ``||Y_i - Y_j||^2`` from coordinate differences.

    Differencing directly keeps close pairs accurate and the diagonal exactly
    zero, which matters once the distances are divided by a small ``a``.
    """
    Y = np.asarray(Y, dtype=float)
    D = np.zeros(Y.shape[:-1] + Y.shape[-2:-1])
    for k in range(Y.shape[-1]):
        diff = Y[..., :, None, k] - Y[..., None, :, k]
        D += diff * diff
    return D


def t_stat(Y, a):
    """Closed-form value of ``T_{n,a}`` for scaled residuals ``Y``.

    Parameters
    ----------
    Y : StandardizedSample or (n, d) array_like
        Scaled residuals.
    a : float
        Weight parameter, ``a > 0``.

    Returns
    -------
    float
        Nonnegative statistic (roundoff negatives clamped to 0).
    """
    a = check_a(a)
    Y = standardized(Y)
    n, d = Y.shape
    r = np.einsum("ij,ij->i", Y, Y)
    G = Y @ Y.T
    D = pair_sq_dist(Y)

    first = n * (math.pi / (a + 1)) ** (d / 2) * d / (2 * (a + 1))
    second = 2 * (2 * math.pi / (2 * a + 1)) ** (d / 2) * math.fsum(
        r / (2 * a + 1) * np.exp(-r / (4 * a + 2))
    )
    third = (math.pi / a) ** (d / 2) / n * _pair_sum(G * np.exp(-D / (4 * a)))
    return clamp_nonnegative(math.fsum([first, -second, third]), first)


def t_stat_batch(Y, avals):
    """``T_{n,a}`` for a stack of residual samples and several ``a`` at once.

    Parameters
    ----------
    Y : (m, n, d) ndarray
    avals : sequence of float

    Returns
    -------
    (len(avals), m) ndarray
    """
    Y = np.asarray(Y, dtype=float)
    m, n, d = Y.shape
    r = np.einsum("mnk,mnk->mn", Y, Y)
    G = np.einsum("mik,mjk->mij", Y, Y)
    D = pair_sq_dist(Y)
    out = np.empty((len(avals), m))
    for i, a in enumerate(avals):
        a = check_a(a)
        first = n * (math.pi / (a + 1)) ** (d / 2) * d / (2 * (a + 1))
        second = 2 * (2 * math.pi / (2 * a + 1)) ** (d / 2) * np.sum(
            r / (2 * a + 1) * np.exp(-r / (4 * a + 2)), axis=1
        )
        third = (math.pi / a) ** (d / 2) / n * np.sum(
            G * np.exp(-D / (4 * a)), axis=(1, 2)
        )
        out[i] = np.maximum(first - second + third, 0.0)
    return out


def t_stat_quadrature(Y, a, grid=None):
    """Reference value of ``T_{n,a}`` by tensor Gauss-Legendre quadrature.

    Integrates ``||Z_n(t)||^2 w_a(t)`` with
    ``Z_n(t) = n^{-1/2} sum_j (Y_j (cos + sin)(t'Y_j) - t psi(t))`` over the box
    ``[-R, R]^d``, ``R = sqrt(30 / a)`` unless the grid fixes ``R``.
    Intended for testing only; supports ``d <= 3``.
    """
    a = check_a(a)
    Y = standardized(Y)
    n, d = Y.shape
    if d > 3:
        raise UnsupportedDimensionError("quadrature oracle supports d <= 3 only")
    grid = grid or QuadratureSpec()
    nodes, weights = tensor_grid(grid.nodes_per_axis, grid.radius(a), d)
    total = []
    for lo in range(0, len(nodes), 8192):
        t = nodes[lo:lo + 8192]
        w = weights[lo:lo + 8192] * np.exp(-a * np.einsum("ij,ij->i", t, t))
        tt = np.einsum("ij,ij->i", t, t)
        arg = t @ Y.T
        cs = np.cos(arg) + np.sin(arg)
        Z = (cs @ Y - n * t * np.exp(-tt / 2)[:, None]) / math.sqrt(n)
        total.append(np.dot(np.einsum("ij,ij->i", Z, Z), w))
    return math.fsum(total)


def scaled_stat(T, a, d):
    """Tabulation scale ``16 a^{d/2+2} pi^{-d/2} T``."""
    a = check_a(a)
    return 16.0 * a ** (d / 2 + 2) * math.pi ** (-d / 2) * T


def skewness_measures(Y):
    """Mardia skewness ``b_{1,d}`` and Mori-Rohatgi-Szekely skewness.

    Returns
    -------
    (b_mardia, b_mrs) : tuple of float
    """
    Y = standardized(Y)
    n = Y.shape[0]
    G = Y @ Y.T
    r = np.diag(G)
    b_mardia = _pair_sum(G**3) / n**2
    # sum_ij G_ij r_i r_j = || sum_i r_i Y_i ||^2
    v = r @ Y
    b_mrs = math.fsum(v * v) / n**2
    return clamp_nonnegative(b_mardia), clamp_nonnegative(b_mrs)


def kurtosis_mardia(Y):
    """Mardia kurtosis ``b_{2,d} = n^{-1} sum ||Y_j||^4``."""
    Y = standardized(Y)
    r = np.einsum("ij,ij->i", Y, Y)
    return math.fsum(r * r) / Y.shape[0]


def limit_stat_inf(Y):
    """Limit of ``16 a^{d/2+2} T_{n,a} / (n pi^{d/2})`` as ``a -> inf``."""
    b1, b1_mrs = skewness_measures(Y)
    return b1_mrs + 2.0 * b1


def limit_stat_inf_batch(Y):
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[1]
    G = np.einsum("mik,mjk->mij", Y, Y)
    r = np.einsum("mii->mi", G)
    b1 = np.sum(G**3, axis=(1, 2)) / n**2
    v = np.einsum("mn,mnk->mk", r, Y)
    return np.einsum("mk,mk->m", v, v) / n**2 + 2.0 * b1


def limit_stat_zero(Y):
    """Limit of ``((a/pi)^{d/2} T_{n,a} - d) / (n a^{d/2})`` as ``a -> 0``."""
    Y = standardized(Y)
    n, d = Y.shape
    r = np.einsum("ij,ij->i", Y, Y)
    return d / 2 - 2 ** (d / 2 + 1) * math.fsum(r * np.exp(-r / 2)) / n


def scaled_statistic(Y, a):
    """Tabulated form of the statistic, including the ``a = inf`` boundary.

    For finite ``a`` this is ``scaled_stat(t_stat(Y, a), a, d)``; for
    ``a = inf`` it is ``n * limit_stat_inf(Y)``, the limit of the same
    scaled quantity.
    """
    Y = standardized(Y)
    n, d = Y.shape
    if math.isinf(a):
        return n * limit_stat_inf(Y)
    return scaled_stat(t_stat(Y, a), a, d)


def evaluate(Y, a):
    """Convenience wrapper returning a :class:`TestOutcome`."""
    Y = standardized(Y)
    n, d = Y.shape
    if math.isinf(a):
        s = n * limit_stat_inf(Y)
        return TestOutcome(statistic=s, a=math.inf, n=n, d=d, label="T_inf", scaled=s)
    T = t_stat(Y, a)
    return TestOutcome(
        statistic=T, a=a, n=n, d=d, label=f"T_{a:g}", scaled=scaled_stat(T, a, d)
    )
