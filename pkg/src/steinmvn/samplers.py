"""Random variates for the null model and the alternatives used in the studies.

Alternatives are described by an :class:`AlternativeSpec`; the short text
form accepted by :func:`parse_alternative` is ``name[:p1[,p2]]``::

    normal  nmix1  nmix2  mvt:3  t:3  chi2:5  gamma:4,2
    logistic  uniform  laplace  pearson7:5

``mvt``/``t`` is the spherical multivariate t; every name from ``chi2`` on
means i.i.d. coordinates.  Uniform, Laplace and logistic marginals have
mean 0 and variance 1.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError

_IID = ("chi2", "gamma", "logistic", "uniform", "laplace", "pearson7")
_JOINT = ("normal", "nmix1", "nmix2", "mvt")
_ALIASES = {"t": "mvt", "n": "normal", "gaussian": "normal", "p7": "pearson7"}
_NPARAMS = {"chi2": 1, "gamma": 2, "mvt": 1, "pearson7": 1}

NMIX1_SHIFT = 3.0
NMIX1_WEIGHT = 0.1  # probability of the shifted component
NMIX2_RHO = 0.9
NMIX2_WEIGHT = 0.9  # probability of the correlated component


@dataclass(frozen=True)
class AlternativeSpec:
    """A sampling distribution on R^d.

    Attributes
    ----------
    kind : str
        One of ``normal, nmix1, nmix2, mvt, chi2, gamma, logistic, uniform,
        laplace, pearson7``.
    d : int
    params : tuple of float
        ``(nu,)`` for mvt, ``(k,)`` for chi2, ``(shape, rate)`` for gamma,
        ``(m,)`` for pearson7, empty otherwise.
    """

    kind: str
    d: int = 1
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _IID + _JOINT:
            raise InvalidArgumentError(f"unknown alternative {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidArgumentError(f"dimension must be a positive integer, got {self.d}")
        want = _NPARAMS.get(self.kind, 0)
        if len(self.params) != want:
            raise InvalidArgumentError(
                f"{self.kind} takes {want} parameter(s), got {len(self.params)}"
            )
        if any(not (p > 0 and math.isfinite(p)) for p in self.params):
            raise InvalidArgumentError(f"{self.kind} parameters must be positive")

    @property
    def iid(self):
        return self.kind in _IID

    @property
    def label(self):
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(f"{p:g}" for p in self.params)

    @property
    def is_null(self):
        return self.kind == "normal"


def parse_alternative(text, d=1):
    """Parse ``name[:p1[,p2]]`` into an :class:`AlternativeSpec`."""
    name, _, rest = str(text).strip().lower().partition(":")
    name = _ALIASES.get(name, name)
    try:
        params = tuple(float(p) for p in rest.split(",")) if rest else ()
    except ValueError:
        raise InvalidArgumentError(f"bad parameters in alternative {text!r}") from None
    if name == "gamma" and len(params) == 1:
        params = (params[0], 1.0)
    return AlternativeSpec(name, int(d), params)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    ``generator(*keys)`` returns a fresh PCG64 generator for a sub-stream;
    the same keys always give the same sequence, different keys give
    statistically independent ones (``SeedSequence`` spawn keys).
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for v in (self.seed, self.stream_id):
            if int(v) != v or not 0 <= v < 2**64:
                raise InvalidArgumentError("seed and stream id must be 64-bit unsigned integers")

    def generator(self, *keys):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),) + tuple(int(k) for k in keys))
        return np.random.Generator(np.random.PCG64(ss))


def cholesky_correlated(B, z):
    """Return ``L z`` with ``L`` the lower Cholesky factor of ``B``.

    ``z`` may be a vector or a stack of row vectors ``(m, d)``.
    Raises ``numpy.linalg.LinAlgError`` if ``B`` is not positive definite.
    """
    L = np.linalg.cholesky(np.asarray(B, dtype=float))
    z = np.asarray(z, dtype=float)
    return z @ L.T if z.ndim > 1 else L @ z


def equicorrelation(d, rho=NMIX2_RHO):
    return np.full((d, d), rho) + (1 - rho) * np.eye(d)


def _marginal(spec):
    k = spec.kind
    if k == "chi2":
        return stats.chi2(spec.params[0])
    if k == "gamma":
        shape, rate = spec.params
        return stats.gamma(shape, scale=1 / rate)
    if k == "logistic":
        return stats.logistic(scale=math.sqrt(3) / math.pi)
    if k == "uniform":
        return stats.uniform(-math.sqrt(3), 2 * math.sqrt(3))
    if k == "laplace":
        return stats.laplace(scale=1 / math.sqrt(2))
    if k == "pearson7":
        return stats.t(spec.params[0])
    raise AssertionError(k)


def _draw_iid(spec, size, rng):
    k, p = spec.kind, spec.params
    if k == "chi2":
        return rng.chisquare(p[0], size)
    if k == "gamma":
        return rng.gamma(p[0], 1 / p[1], size)
    if k == "logistic":
        return rng.logistic(0.0, math.sqrt(3) / math.pi, size)
    if k == "uniform":
        return rng.uniform(-math.sqrt(3), math.sqrt(3), size)
    if k == "laplace":
        return rng.laplace(0.0, 1 / math.sqrt(2), size)
    if k == "pearson7":
        return rng.standard_t(p[0], size)
    raise AssertionError(k)


def draw_rows(spec, rows, rng):
    """``rows`` i.i.d. observations from ``spec`` as a ``(rows, d)`` array."""
    d = spec.d
    if spec.iid:
        return _draw_iid(spec, (rows, d), rng)
    z = rng.standard_normal((rows, d))
    if spec.kind == "normal":
        return z
    if spec.kind == "nmix1":
        return z + NMIX1_SHIFT * (rng.random(rows) < NMIX1_WEIGHT)[:, None]
    if spec.kind == "nmix2":
        corr = rng.random(rows) < NMIX2_WEIGHT
        return np.where(corr[:, None], cholesky_correlated(equicorrelation(d), z), z)
    if spec.kind == "mvt":
        nu = spec.params[0]
        w = rng.chisquare(nu, rows)
        return z / np.sqrt(w / nu)[:, None]
    raise AssertionError(spec.kind)


def draw(spec, n, stream):
    """Draw an ``(n, d)`` sample; ``stream`` is an :class:`RngStream` or a Generator."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    return draw_rows(spec, n, rng)


def draw_batch(spec, m, n, rng):
    """``m`` independent samples of size ``n`` as an ``(m, n, d)`` array."""
    return draw_rows(spec, m * n, rng).reshape(m, n, spec.d)


# --- population quantities -------------------------------------------------


def population_moments(spec):
    """Mean vector and covariance matrix, or ``None`` if the covariance is infinite."""
    d = spec.d
    k, p = spec.kind, spec.params
    one = np.ones(d)
    if k == "normal":
        return np.zeros(d), np.eye(d)
    if k == "nmix1":
        w, s = NMIX1_WEIGHT, NMIX1_SHIFT
        return w * s * one, np.eye(d) + w * (1 - w) * s * s * np.outer(one, one)
    if k == "nmix2":
        return np.zeros(d), (1 - NMIX2_WEIGHT) * np.eye(d) + NMIX2_WEIGHT * equicorrelation(d)
    if k in ("mvt", "pearson7"):
        nu = p[0]
        if nu <= 2:
            return None
        return np.zeros(d), nu / (nu - 2) * np.eye(d)
    dist = _marginal(spec)
    return dist.mean() * one, dist.var() * np.eye(d)


def population_logpdf(spec, x):
    """Log density of ``spec`` at the rows of ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = spec.d
    k = spec.kind
    if k == "normal":
        return stats.multivariate_normal(np.zeros(d), np.eye(d)).logpdf(x).reshape(-1)
    if k == "nmix1":
        lp0 = stats.multivariate_normal(np.zeros(d)).logpdf(x)
        lp1 = stats.multivariate_normal(np.full(d, NMIX1_SHIFT)).logpdf(x)
        w = NMIX1_WEIGHT
        return np.logaddexp(math.log(1 - w) + lp0, math.log(w) + lp1).reshape(-1)
    if k == "nmix2":
        lp0 = stats.multivariate_normal(np.zeros(d)).logpdf(x)
        lp1 = stats.multivariate_normal(np.zeros(d), equicorrelation(d)).logpdf(x)
        w = NMIX2_WEIGHT
        return np.logaddexp(math.log(1 - w) + lp0, math.log(w) + lp1).reshape(-1)
    if k == "mvt":
        return np.atleast_1d(stats.multivariate_t(np.zeros(d), np.eye(d), df=spec.params[0]).logpdf(x))
    return _marginal(spec).logpdf(x).sum(axis=1)


def standardizer(spec):
    """Affine map ``x -> Sigma^{-1/2} (x - mu)`` using population moments.

    Returns ``(transform, logdet)`` where ``logdet`` is ``log|Sigma^{1/2}|``,
    the log-Jacobian needed to carry densities over to the standardized scale.
    """
    mom = population_moments(spec)
    if mom is None:
        raise InvalidArgumentError(f"{spec.label} has no finite covariance")
    mu, S = mom
    lam, Q = np.linalg.eigh(S)
    M = (Q / np.sqrt(lam)) @ Q.T

    def transform(x):
        return (np.asarray(x, dtype=float) - mu) @ M

    return transform, 0.5 * float(np.sum(np.log(lam)))
