"""Simulation harnesses for power and confidence-interval coverage studies."""

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict

import numpy as np

from .errors import InvalidArgumentError
from .inference import _interval, delta_numeric
from .montecarlo import (
    ALT_STREAM,
    COVERAGE_STREAM,
    NULL_STREAM,
    SIZE_STREAM,
    block_size,
    key_label,
    run_blocks,
    simulate_statistics,
    standardized_draws,
    statistic_key,
)
from .nulldist import empirical_quantile
from .samplers import AlternativeSpec, RngStream
from .statistic import check_a

DEFAULT_COMPETITORS = ("BHEP", "HZ", "HV", "EN")


@dataclass
class PowerResult:
    """Rejection percentages keyed by statistic label (``T_1``, ``HZ`` ...)."""

    alternative: str
    n: int
    d: int
    alpha: float
    reps: int
    critical_values: Dict[str, float] = field(default_factory=dict)
    power: Dict[str, float] = field(default_factory=dict)
    size: Dict[str, float] = field(default_factory=dict)


def power_study(alt, n, avals, alpha=0.05, reps=5000, seed=0, competitors=(),
                workers=None, check_size=True, progress=None):
    """Empirical power of the T family (and competitors) against ``alt``.

    Critical values are the lower ``1 - alpha`` quantiles of an independent
    null simulation with the same ``n``, ``d`` and ``reps``; a test rejects
    when its statistic exceeds the critical value.  With ``check_size`` a
    third independent null run reports the realised size.

    Returns
    -------
    PowerResult
        Percentages in ``[0, 100]``.
    """
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    d = alt.d
    keys = [statistic_key("T", a) for a in avals]
    keys += [statistic_key(c) for c in competitors]
    null_spec = AlternativeSpec("normal", d)

    def sim(spec, stream, tag):
        cb = progress(tag) if progress else None
        return simulate_statistics(spec, n, keys, reps, seed, stream, workers, cb)

    null = sim(null_spec, NULL_STREAM, "null")
    crit = {k: empirical_quantile(null[k], 1 - alpha) for k in keys}
    alt_stats = sim(alt, ALT_STREAM, alt.label)
    res = PowerResult(alt.label, n, d, alpha, reps)
    for k in keys:
        label = key_label(k)
        res.critical_values[label] = crit[k]
        res.power[label] = 100.0 * float(np.mean(alt_stats[k] > crit[k]))
    if check_size:
        size = sim(null_spec, SIZE_STREAM, "size")
        for k in keys:
            res.size[key_label(k)] = 100.0 * float(np.mean(size[k] > crit[k]))
    return res


@dataclass
class CoverageResult:
    alternative: str
    n: int
    d: int
    a: float
    alpha: float
    reps: int
    delta: float
    coverage: float  # percent
    stderr: float  # percent
    mean_halfwidth: float


def _coverage_block(spec, n, a, alpha, delta, seed, job):
    block, size = job
    rng = RngStream(seed, COVERAGE_STREAM).generator(block)
    Y = standardized_draws(spec, size, n, rng)
    hits = np.empty(size)
    half = np.empty(size)
    for i in range(size):
        ci = _interval(Y[i], a, alpha)
        hits[i] = delta in ci
        half[i] = ci.halfwidth
    return np.stack([hits, half])


def coverage_study(alt, n, a, alpha=0.05, reps=2000, seed=0, delta=None,
                   workers=None, progress=None):
    """Fraction of asymptotic confidence intervals that contain ``Delta_a``.

    ``delta`` defaults to :func:`delta_numeric` for the analytic alternatives.
    """
    a = check_a(a)
    if delta is None:
        delta = delta_numeric(alt, a).value
    func = partial(_coverage_block, alt, n, a, alpha, float(delta), seed)
    # sigma_hat is O(n^2) per sample, so use smaller blocks than for statistics
    table = run_blocks(func, reps, max(8, block_size(n) // 5), workers, progress)
    p = float(np.mean(table[0]))
    return CoverageResult(
        alternative=alt.label, n=n, d=alt.d, a=a, alpha=alpha, reps=reps,
        delta=float(delta), coverage=100.0 * p,
        stderr=100.0 * math.sqrt(p * (1 - p) / reps),
        mean_halfwidth=float(np.mean(table[1])),
    )
