import math

import numpy as np
import pytest

from steinmvn import AlternativeSpec, InvalidArgumentError, SingularCovarianceError, t_stat
from steinmvn.competitors import bhep_stat, energy_stat, hv_stat, hz_stat
from steinmvn.montecarlo import (
    WORKERS_ENV,
    batch_statistics,
    block_size,
    key_label,
    parse_key,
    resolve_workers,
    run_blocks,
    simulate_statistics,
    standardized_draws,
    statistic_key,
)
from steinmvn.samplers import RngStream
from steinmvn.statistic import limit_stat_inf, scaled_stat

KEYS = [statistic_key("T", 0.5), statistic_key("T", math.inf), statistic_key("BHEP"),
        statistic_key("HZ"), statistic_key("HV"), statistic_key("EN")]


def test_keys_and_labels():
    assert statistic_key("t", 1) == ("T", 1.0)
    assert statistic_key("hv") == ("HV", 5.0)
    assert statistic_key("bhep") == ("BHEP", 1.0)
    assert statistic_key("hz", 3.0) == ("HZ", None)
    for k in KEYS:
        assert parse_key(key_label(k)) == k
    assert key_label(("T", math.inf)) == "T_inf"
    with pytest.raises(InvalidArgumentError):
        statistic_key("T")
    with pytest.raises(InvalidArgumentError):
        statistic_key("XX", 1.0)
    with pytest.raises(InvalidArgumentError):
        statistic_key("T", -1.0)


def test_batch_statistics_match_single():
    rng = RngStream(1, 99).generator()
    Y = standardized_draws(AlternativeSpec("chi2", 2, (5.0,)), 4, 15, rng)
    out = batch_statistics(Y, KEYS)
    for i in range(4):
        y = Y[i]
        assert out[KEYS[0]][i] == pytest.approx(scaled_stat(t_stat(y, 0.5), 0.5, 2), rel=1e-12)
        assert out[KEYS[1]][i] == pytest.approx(15 * limit_stat_inf(y), rel=1e-12)
        assert out[KEYS[2]][i] == pytest.approx(bhep_stat(y), rel=1e-12)
        assert out[KEYS[3]][i] == pytest.approx(hz_stat(y), rel=1e-12)
        assert out[KEYS[4]][i] == pytest.approx(hv_stat(y), rel=1e-12)
        assert out[KEYS[5]][i] == pytest.approx(energy_stat(y), rel=1e-11)


def test_block_size_bounds():
    assert block_size(10) == 500
    assert block_size(100) == 400
    assert block_size(5000) == 8


def test_singular_draws_are_redrawn():
    # n = d + 1 is the smallest admissible size; n = d is always singular
    rng = np.random.default_rng(0)
    Y = standardized_draws(AlternativeSpec("normal", 3), 50, 4, rng)
    assert np.all(np.isfinite(Y))
    with pytest.raises(SingularCovarianceError):
        standardized_draws(AlternativeSpec("normal", 3), 2, 3, rng)


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2
    with pytest.raises(InvalidArgumentError):
        resolve_workers(0)


def test_run_blocks_partition_and_progress():
    calls = []
    out = run_blocks(lambda job: np.full(job[1], job[0]), 23, 10, 1, lambda i, t: calls.append((i, t)))
    assert out.tolist() == [0] * 10 + [1] * 10 + [2] * 3
    assert calls == [(1, 3), (2, 3), (3, 3)]


def test_deterministic_and_worker_independent():
    spec = AlternativeSpec("nmix1", 2)
    one = simulate_statistics(spec, 12, KEYS, 1200, 5, 2, workers=1)
    again = simulate_statistics(spec, 12, KEYS, 1200, 5, 2, workers=1)
    two = simulate_statistics(spec, 12, KEYS, 1200, 5, 2, workers=2)
    for k in KEYS:
        assert one[k].shape == (1200,)
        assert np.array_equal(one[k], again[k])
        assert np.array_equal(one[k], two[k])


def test_streams_and_seeds_differ():
    spec = AlternativeSpec("normal", 1)
    k = [statistic_key("T", 1.0)]
    a = simulate_statistics(spec, 10, k, 100, 0, 1)[k[0]]
    b = simulate_statistics(spec, 10, k, 100, 0, 2)[k[0]]
    c = simulate_statistics(spec, 10, k, 100, 1, 1)[k[0]]
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_prefix_stability():
    # block seeding means a longer run extends a shorter one
    spec = AlternativeSpec("normal", 2)
    k = [statistic_key("T", 2.0)]
    short = simulate_statistics(spec, 20, k, 500, 3, 1)[k[0]]
    long = simulate_statistics(spec, 20, k, 1000, 3, 1)[k[0]]
    assert np.array_equal(short, long[:500])


def test_reps_must_be_positive():
    with pytest.raises(InvalidArgumentError):
        simulate_statistics(AlternativeSpec("normal"), 10, KEYS[:1], 0, 0, 1)
