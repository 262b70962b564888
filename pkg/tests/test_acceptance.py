"""Acceptance criteria 1 to 11, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; they are repeated in the terminal summary either way.
"""

import math

import numpy as np
import pytest

from steinmvn import (
    AlternativeSpec,
    SimulationConfig,
    cumulants_numeric,
    delta_numeric,
    kernel_K,
    limit_stat_inf,
    limit_stat_zero,
    mc_critical_value,
    mean_limit,
    nystrom_eigenvalues,
    scaled_residuals,
    sigma_hat,
    sigma_hat_naive,
    t_stat,
    t_stat_quadrature,
)
from steinmvn.competitors import bhep_stat, energy_stat, hv_stat
from steinmvn.experiments import coverage_study, power_study

from conftest import random_sample, separated_sample
from oracles import sigma_hat_definition

# expectation, variance, beta1, beta2 of the d = 1 limit law, four decimals
MOMENT_TABLE = {
    0.1: (3.0040, 2.8028, 1.3737, 6.0366),
    0.5: (0.6574, 0.2686, 1.9098, 8.8662),
    1.0: (0.2939, 0.0742, 2.1996, 10.7047),
    2.0: (0.1092, 0.0133, 2.4619, 12.5510),
    5.0: (0.0207, 0.0006, 2.7090, 14.3071),
}

DELTA_CELLS = {
    ("uniform", 1): (0.029273, 0.011432, 0.002911, 0.000259),
    ("uniform", 2): (0.090821, 0.027841, 0.005709, 0.000365),
    ("laplace", 1): (0.026076, 0.013968, 0.005230, 0.000778),
    ("laplace", 2): (0.071014, 0.032525, 0.010141, 0.001097),
    ("logistic", 1): (0.005014, 0.002688, 0.001005, 0.000144),
    ("logistic", 2): (0.013664, 0.006226, 0.001942, 0.000202),
}

# reference 0.95 quantiles of the scaled statistic, keyed by (d, n, a)
CRIT_CELLS = {
    (1, 20, 0.5): 2.57,
    (1, 50, 1.0): 7.42,
    (2, 20, 5.0): 70.27,
    (2, 50, 2.0): 37.16,
    (3, 100, 10.0): 190.30,
    (5, 50, 0.5): 18.03,
}


# --- property-based core ------------------------------------------------------------


def test_c1_statistic_matches_quadrature(acceptance):
    rng = np.random.default_rng(2024)
    worst, cases = 0.0, 0
    for d in (1, 2):
        for a in (0.5, 1.0, 2.0, 5.0):
            for _ in range(7):
                n = int(rng.integers(d + 1, 11))
                Y = scaled_residuals(random_sample(rng, n, d))
                exact = t_stat(Y, a)
                worst = max(worst, abs(t_stat_quadrature(Y, a) - exact) / exact)
                cases += 1
    acceptance("C1 statistic vs quadrature", cases >= 50 and worst <= 1e-6,
               f"{cases} cases, max rel. error {worst:.2e}")


def test_c2_affine_invariance(acceptance):
    rng = np.random.default_rng(77)
    funcs = {"T_1": lambda Y: t_stat(Y, 1.0), "BHEP": bhep_stat, "HV": hv_stat, "EN": energy_stat}
    worst = 0.0
    for k in range(20):
        d = 1 + k % 3
        X = random_sample(rng, 15, d)
        A = rng.normal(size=(d, d))
        while abs(np.linalg.det(A)) < 0.1:
            A = rng.normal(size=(d, d))
        b = rng.normal(size=d) * 5
        Y1, Y2 = scaled_residuals(X), scaled_residuals(X @ A.T + b)
        for f in funcs.values():
            v1, v2 = f(Y1), f(Y2)
            worst = max(worst, abs(v2 - v1) / abs(v1))
    acceptance("C2 affine invariance", worst <= 1e-8, f"20 maps x 4 statistics, max rel. change {worst:.2e}")


def test_c3_standardization(acceptance):
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(60):
        d = 1 + k % 4
        n = d + 1 + int(rng.integers(0, 40))
        Y = scaled_residuals(random_sample(rng, n, d)).residuals
        worst = max(worst, np.abs(Y.sum(axis=0)).max(), np.abs(Y.T @ Y / n - np.eye(d)).max())
    acceptance("C3 standardization", worst <= 1e-10, f"60 fixtures, max deviation {worst:.2e}")


def test_c4_boundary_limits(acceptance):
    rng = np.random.default_rng(31)
    ok, notes = True, []
    for d in (1, 2):
        Y = scaled_residuals(random_sample(rng, 15, d)).residuals
        n = len(Y)
        lim = limit_stat_inf(Y)
        s = [16 * a ** (d / 2 + 2) / (n * math.pi ** (d / 2)) * t_stat(Y, a) for a in (1e2, 1e3, 1e4)]
        e = [abs(v - lim) for v in s]
        good = e[2] < e[1] < e[0] and e[2] < 10 * e[1] and e[2] < 1e-2 * (1 + abs(lim))
        ok &= good
        notes.append(f"inf d={d} err {e[2]:.1e}")

        # the small-weight grid is checked on residuals with no close pairs
        Y = scaled_residuals(separated_sample(rng, d)).residuals
        n = len(Y)
        lim = limit_stat_zero(Y)
        s = [((a / math.pi) ** (d / 2) * t_stat(Y, a) - d) / (n * a ** (d / 2)) for a in (1e-2, 1e-3, 1e-4)]
        e = [abs(v - lim) for v in s]
        good = e[2] < e[1] < e[0] and e[2] < 1e-3 * (1 + abs(lim))
        ok &= good
        notes.append(f"zero d={d} err {e[2]:.1e}")
    acceptance("C4 boundary limits", ok, ", ".join(notes))


def test_c5_variance_estimator(acceptance):
    rng = np.random.default_rng(8)
    naive_err, def_err, minimum = 0.0, 0.0, math.inf
    for n, d, a in [(5, 1, 0.5), (8, 1, 1.0), (10, 2, 2.0), (7, 3, 1.0), (10, 2, 0.3), (9, 1, 5.0)]:
        Y = scaled_residuals(random_sample(rng, n, d)).residuals
        fast, slow = sigma_hat(Y, a).value, sigma_hat_naive(Y, a).value
        naive_err = max(naive_err, abs(fast - slow) / slow)
        minimum = min(minimum, fast, slow)
        if d == 1 and n <= 8:
            ref = sigma_hat_definition(Y, a)
            def_err = max(def_err, abs(fast - ref) / ref, abs(slow - ref) / ref)
    ok = naive_err <= 1e-10 and def_err <= 1e-4 and minimum >= 0
    acceptance("C5 variance estimator", ok,
               f"factored/naive {naive_err:.1e}, vs definition {def_err:.1e}, min {minimum:.3g}")


def test_c6_kernel_identities(acceptance):
    k1 = max(abs(cumulants_numeric(a).kappa[0] / mean_limit(a, 1) - 1) for a in (0.1, 0.5, 1, 2, 5, 10))
    tr = max(abs(nystrom_eigenvalues(a, d).sum() / mean_limit(a, d) - 1)
             for a in (0.5, 1.0, 2.0) for d in (1, 2))
    origin = max(np.abs(kernel_K(np.zeros(d), np.zeros(d))).max() for d in (1, 2, 3))
    ok = k1 <= 1e-6 and tr <= 0.01 and origin == 0.0
    acceptance("C6 kernel identities", ok, f"kappa1 {k1:.1e}, Nystrom trace {tr:.1e}, |K(0,0)| {origin}")


# --- reproduction of reference tables ------------------------------------------------


def test_c7_limit_law_moments(acceptance):
    ok, worst = True, 0.0
    for a, (mean, var, b1, b2) in MOMENT_TABLE.items():
        c = cumulants_numeric(a)
        ok &= round(mean_limit(a, 1), 4) == mean
        # a variance printed as 0.0006 only fixes the value to half a unit in the last place
        ok &= abs(c.kappa[1] - var) <= max(0.01 * var, 5e-5)
        for got, want in ((c.beta1, b1), (c.beta2, b2)):
            worst = max(worst, abs(got / want - 1))
    ok &= worst <= 0.01
    acceptance("C7 limit-law moments", ok, f"means to 4 dp, max rel. error in beta {worst:.2%}")


def test_c8_population_distance(acceptance):
    worst = 0.0
    for (kind, d), row in DELTA_CELLS.items():
        for a, ref in zip((0.5, 1.0, 2.0, 5.0), row):
            worst = max(worst, abs(delta_numeric(kind, a, d).value - ref))
    acceptance("C8 population distance", worst <= 5e-5, f"24 cells, max abs. error {worst:.1e}")


def _crit_check(acceptance, reps, tol, name):
    worst, cells = 0.0, []
    for (d, n, a), ref in CRIT_CELLS.items():
        q = mc_critical_value(n, d, a, SimulationConfig(reps=reps, seed=2020))
        rel = abs(q / ref - 1)
        worst = max(worst, rel)
        cells.append(f"({d},{n},{a:g}) {q:.2f}")
    acceptance(name, worst <= tol, f"max rel. diff {worst:.2%}; " + ", ".join(cells))


def test_c9_critical_values(acceptance):
    _crit_check(acceptance, 20000, 0.03, "C9 critical values (20000 reps)")


@pytest.mark.slow
def test_c9_critical_values_long(acceptance):
    _crit_check(acceptance, 100000, 0.02, "C9 critical values (100000 reps)")


def test_c10_power(acceptance):
    runs = [
        ("NMix1 d=1 n=50 T_1", AlternativeSpec("nmix1", 1), 50, 1.0, lambda p: abs(p - 60) <= 3),
        ("t3 d=2 n=50 T_5", AlternativeSpec("mvt", 2, (3.0,)), 50, 5.0, lambda p: abs(p - 83) <= 3),
        ("uniform d=2 n=100 T_5", AlternativeSpec("uniform", 2), 100, 5.0, lambda p: p <= 5),
    ]
    ok, notes, sizes = True, [], []
    for label, spec, n, a, check in runs:
        res = power_study(spec, n, [a], reps=5000, seed=10)
        p = res.power[f"T_{a:g}"]
        ok &= check(p)
        sizes.extend(res.size.values())
        notes.append(f"{label} {p:.1f}%")
    ok &= all(abs(s - 5) <= 1 for s in sizes)
    notes.append(f"size {min(sizes):.1f}-{max(sizes):.1f}%")
    acceptance("C10 power", ok, ", ".join(notes))


def test_c10_competitor_power(acceptance):
    # supplementary: competitor columns of the same tables
    runs = [
        ("BHEP t3 d=1 n=20", AlternativeSpec("mvt", 1, (3.0,)), 20, "BHEP", 33),
        ("HV t5 d=1 n=20", AlternativeSpec("mvt", 1, (5.0,)), 20, "HV", 22),
        ("EN NMix1 d=2 n=50", AlternativeSpec("nmix1", 2), 50, "EN", 82),
    ]
    ok, notes = True, []
    for label, spec, n, comp, want in runs:
        res = power_study(spec, n, [], reps=5000, seed=12, competitors=[comp], check_size=False)
        p = next(iter(res.power.values()))
        ok &= abs(p - want) <= 3
        notes.append(f"{label} {p:.1f}% (want {want})")
    acceptance("C10b competitor power", ok, ", ".join(notes))


def _coverage(alt, d, n, a):
    return coverage_study(AlternativeSpec(alt, d), n, a, reps=2000, seed=11).coverage


def test_c11_coverage_uniform(acceptance):
    c = _coverage("uniform", 1, 100, 0.5)
    acceptance("C11 coverage uniform d=1 a=0.5 n=100", abs(c - 94.5) <= 3, f"{c:.2f}% (target 94.5 +- 3)")


@pytest.mark.xfail(strict=True, reason="target 38 is the reference n = 10 cell; the n = 20 reference is 69.10")
def test_c11_coverage_logistic(acceptance):
    c = _coverage("logistic", 2, 20, 1.0)
    acceptance("C11 coverage logistic d=2 a=1 n=20", abs(c - 38) <= 4, f"{c:.2f}% (target 38 +- 4)")


def test_c11_coverage_logistic_reference_cells(acceptance):
    c10, c20 = _coverage("logistic", 2, 10, 1.0), _coverage("logistic", 2, 20, 1.0)
    ok = abs(c10 - 37.85) <= 4 and abs(c20 - 69.10) <= 4
    acceptance("C11b coverage logistic d=2 a=1", ok,
               f"n=10 {c10:.2f}% (reference 37.85), n=20 {c20:.2f}% (reference 69.10)")
