"""Block-structured Monte Carlo engine.

Replications are cut into fixed-size blocks.  Block ``b`` of a run draws its
random numbers from ``RngStream(seed, purpose).generator(b)``, so the output
does not depend on how blocks are distributed over worker processes.

Statistics are named by small tuples, see :func:`statistic_key`.
"""

import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .competitors import (
    BHEP_DEFAULT_A,
    HV_DEFAULT_A,
    bhep_batch,
    energy_batch,
    hv_batch,
    hz_bandwidth,
)
from .errors import InvalidArgumentError, SingularCovarianceError
from .samplers import RngStream, draw_batch
from .standardize import scaled_residuals_batch
from .statistic import check_a, limit_stat_inf_batch, t_stat_batch

WORKERS_ENV = "STEINMVN_WORKERS"
MAX_REDRAWS = 10

# stream ids, one per independent use of the same seed
NULL_STREAM = 1
ALT_STREAM = 2
SIZE_STREAM = 3
COVERAGE_STREAM = 4
DELTA_STREAM = 5

_FAMILIES = ("T", "BHEP", "HZ", "HV", "EN")


def statistic_key(family, a=None):
    """Canonical key ``(family, a)``; ``a`` is ``None`` for HZ and EN."""
    family = family.upper()
    if family not in _FAMILIES:
        raise InvalidArgumentError(f"unknown statistic family {family!r}")
    if family in ("HZ", "EN"):
        return (family, None)
    if a is None:
        a = {"BHEP": BHEP_DEFAULT_A, "HV": HV_DEFAULT_A}.get(family)
        if a is None:
            raise InvalidArgumentError("T needs a weight parameter")
    a = float(a)
    if not (family == "T" and math.isinf(a)):
        check_a(a)
    return (family, a)


def key_label(key):
    family, a = key
    if a is None:
        return family
    return f"{family}_{'inf' if math.isinf(a) else format(a, 'g')}"


def parse_key(text):
    """Inverse of :func:`key_label` (``"T_0.5"``, ``"T_inf"``, ``"HZ"`` ...)."""
    family, _, a = text.partition("_")
    return statistic_key(family, float(a) if a else None)


def batch_statistics(Y, keys):
    """Evaluate statistics on stacked residuals ``Y (m, n, d)``.

    T statistics are returned in the tabulated (scaled) form, ``n`` times the
    skewness combination for ``a = inf``.
    """
    m, n, d = Y.shape
    out = {}
    finite = sorted({a for f, a in keys if f == "T" and not math.isinf(a)})
    if finite:
        T = t_stat_batch(Y, finite)
        for a, row in zip(finite, T):
            out[("T", a)] = 16.0 * a ** (d / 2 + 2) * math.pi ** (-d / 2) * row
    for key in keys:
        if key in out:
            continue
        family, a = key
        if family == "T":
            out[key] = n * limit_stat_inf_batch(Y)
        elif family == "BHEP":
            out[key] = bhep_batch(Y, a)
        elif family == "HZ":
            out[key] = bhep_batch(Y, hz_bandwidth(n, d))
        elif family == "HV":
            out[key] = hv_batch(Y, a)
        elif family == "EN":
            out[key] = energy_batch(Y)
    return out


def block_size(n):
    """Replications per block; keeps the ``(m, n, n)`` work arrays near 4e6 entries."""
    return int(min(500, max(8, 4_000_000 // (n * n))))


def standardized_draws(spec, m, n, rng):
    """``m`` residual samples from ``spec``, redrawing singular ones.

    Raises
    ------
    SingularCovarianceError
        If a sample is still singular after ``MAX_REDRAWS`` redraws.
    """
    if n < spec.d + 1:
        raise SingularCovarianceError(f"n = {n} too small for d = {spec.d}; need n >= d + 1")
    Y, ok = scaled_residuals_batch(draw_batch(spec, m, n, rng))
    for i in np.flatnonzero(~ok):
        for _ in range(MAX_REDRAWS):
            Yi, oki = scaled_residuals_batch(draw_batch(spec, 1, n, rng))
            if oki[0]:
                Y[i] = Yi[0]
                break
        else:
            raise SingularCovarianceError(
                f"{MAX_REDRAWS} consecutive singular samples from {spec.label} (n={n})"
            )
    return Y


def _stat_block(spec, n, keys, seed, stream_id, job):
    block, size = job
    rng = RngStream(seed, stream_id).generator(block)
    Y = standardized_draws(spec, size, n, rng)
    res = batch_statistics(Y, keys)
    return np.stack([res[k] for k in keys])


def resolve_workers(workers=None):
    """Worker count: explicit value, else ``$STEINMVN_WORKERS``, else 1."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    if workers < 1:
        raise InvalidArgumentError("worker count must be >= 1")
    return workers


def run_blocks(func, reps, block, workers=None, progress=None):
    """Apply ``func((block_index, size))`` to every block and concatenate on the last axis."""
    jobs = []
    for b in range(math.ceil(reps / block)):
        jobs.append((b, min(block, reps - b * block)))
    workers = min(resolve_workers(workers), len(jobs))
    parts = []
    if workers == 1:
        for i, job in enumerate(jobs):
            parts.append(func(job))
            if progress:
                progress(i + 1, len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, part in enumerate(pool.map(func, jobs)):
                parts.append(part)
                if progress:
                    progress(i + 1, len(jobs))
    return np.concatenate(parts, axis=-1)


def simulate_statistics(spec, n, keys, reps, seed, stream_id, workers=None, progress=None):
    """Simulate ``reps`` values of each statistic in ``keys`` under ``spec``.

    Returns
    -------
    dict
        Maps each key to a length-``reps`` array.
    """
    keys = list(dict.fromkeys(keys))
    if reps < 1:
        raise InvalidArgumentError("reps must be >= 1")
    func = partial(_stat_block, spec, n, keys, seed, stream_id)
    table = run_blocks(func, reps, block_size(n), workers, progress)
    return dict(zip(keys, table))


def stderr_progress(label):
    """Progress callback writing a single updating line to standard error."""

    def report(done, total):
        sys.stderr.write(f"\r{label}: block {done}/{total}")
        if done == total:
            sys.stderr.write("\n")
        sys.stderr.flush()

    return report
