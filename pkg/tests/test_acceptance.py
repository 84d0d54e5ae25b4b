"""Acceptance suite: one test per shipped guarantee.

Run ``pytest tests/test_acceptance.py -v`` for one PASS/FAIL line per
criterion. The expensive sweeps are module-scoped fixtures shared by the
criteria that need them, so the whole suite stays well inside its budgets.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

import cuspdist.cli as cli
from cuspdist import (
    Cusp,
    RigidAdelicSpace,
    closest_cusps,
    estimate_hermite,
    height_mu_bridge_check,
    hermite_upper_bound,
    integral_mu1_t,
    partial_volume_g,
    sample_cusp_neighborhood,
    siegel_volume,
    verify_minkowski,
    vol_ball_unit,
)
from cuspdist.analytics import DEFAULT_PRIME_BOUND, DEFAULT_SAMPLES

from conftest import (
    coprime_pairs,
    mu_table,
    oracle_top2,
    pair_embedding_arrays,
    random_taus,
)

SWEEP_COUNT = 10_000


@pytest.fixture(scope="module")
def sweep_reports(fields):
    """10^4 verified random points per field, with per-field wall time."""
    out = {}
    for label, field in fields.items():
        start = time.monotonic()
        reports = [
            verify_minkowski(field, tau)
            for tau in random_taus(field, SWEEP_COUNT, seed=0)
        ]
        out[label] = (reports, time.monotonic() - start)
    return out


@pytest.fixture(scope="module")
def hermite_estimates(fields):
    """Default-resolution farthest-point searches, with per-field wall time."""
    out = {}
    for label, field in fields.items():
        start = time.monotonic()
        out[label] = (estimate_hermite(field), time.monotonic() - start)
    return out


def test_criterion_01_farthest_point(fields, hermite_estimates):
    est, elapsed = hermite_estimates["Q"]
    corner = (2.0 / math.sqrt(3.0)) ** 0.5
    assert abs(est.distance - corner) <= 1e-3
    assert abs(abs(float(est.tau_max.x[0])) - 0.5) <= 1e-3
    assert abs(float(est.tau_max.y[0]) - math.sqrt(3.0) / 2.0) <= 1e-3
    assert elapsed < 60.0
    # quadratic fields: the estimate must land inside the proven window
    for label in ("K2", "K5"):
        est, _ = hermite_estimates[label]
        ub = hermite_upper_bound(fields[label])
        assert 1.0 - 1e-9 <= est.c_estimate <= ub + 1e-9
    print("CRITERION 1 (farthest point, exact corner over Q + windows): PASS")


def test_criterion_02_volume_and_zeta(Q, K5):
    start = time.monotonic()
    report = siegel_volume(Q)
    assert abs(report.vol_gamma - math.pi / 3.0) <= 1e-6

    # independent double-Dirichlet-series value of zeta_K(2) for Q(sqrt 5):
    # zeta(2) * L(2, chi) with chi the quadratic residue character mod 5
    terms = 2_000_000
    k = np.arange(1, terms + 1, dtype=np.float64)
    chi = np.array([0.0, 1.0, -1.0, -1.0, 1.0])[np.arange(1, terms + 1) % 5]
    oracle = (math.pi**2 / 6.0) * float(np.sum(chi / k**2))
    z = K5.zeta_K_2(DEFAULT_PRIME_BOUND)
    assert abs(z.value - oracle) <= 1e-5
    assert time.monotonic() - start < 30.0
    print("CRITERION 2 (covolume pi/3 over Q, zeta_K(2) vs L-series): PASS")


def test_criterion_03_minkowski_sandwich(fields, sweep_reports):
    total = 0.0
    for label, field in fields.items():
        reports, elapsed = sweep_reports[label]
        total += elapsed
        assert len(reports) == SWEEP_COUNT
        n = field.degree
        c_upper = math.sqrt(2.0) * field.discriminant ** (1.0 / (2 * n))
        lower = c_upper ** (-4 * n) - 1e-9
        products = np.array([r.product for r in reports])
        assert np.all(products >= lower)
        assert np.all(products <= 1.0 + 1e-9)
        assert all(r.passed for r in reports)
    assert total < 600.0
    print("CRITERION 3 (mu1*mu2 sandwich, 10^4 points x 3 fields): PASS")


def test_criterion_04_height_mu_bridge(fields):
    rng = np.random.default_rng(2024)
    for field in fields.values():
        pairs = coprime_pairs(field, 8 if field.degree == 1 else 3)
        taus = random_taus(field, 100, seed=13)
        checked = 0
        for tau in taus:
            space = RigidAdelicSpace(field, tau)
            for idx in rng.choice(len(pairs), size=5, replace=False):
                a, b = pairs[idx]
                assert height_mu_bridge_check(space, Cusp(field, a, b), rtol=1e-9)
                checked += 1
        assert checked == 500
    print("CRITERION 4 (height vs mu bridge, 500 pairs x 3 fields): PASS")


def test_criterion_05_closest_matches_bruteforce(fields):
    boxes = {"Q": 12, "K2": 6, "K5": 6}
    for label, field in fields.items():
        bound = boxes[label]
        pairs = coprime_pairs(field, bound)
        pairs_big = coprime_pairs(field, bound + 2)
        A, B = pair_embedding_arrays(pairs)
        A2, B2 = pair_embedding_arrays(pairs_big)
        for tau in random_taus(field, 200, seed=5):
            values = mu_table(A, B, tau)
            best, m1, _, m2 = oracle_top2(field, pairs, values)
            _, m1_big, _, m2_big = oracle_top2(
                field, pairs_big, mu_table(A2, B2, tau)
            )
            # enlarging the box must not change the optima
            assert abs(m1_big - m1) <= 1e-11 * max(1.0, m1)
            assert abs(m2_big - m2) <= 1e-11 * max(1.0, m2)
            ranking = closest_cusps(field, tau)
            assert abs(ranking.mu1 - m1) <= 1e-10 * max(1.0, m1)
            assert abs(ranking.mu2 - m2) <= 1e-10 * max(1.0, m2)
            if m1 - m2 > 1e-9 * m1:
                assert ranking.best_cusp.same_point(best)
    print("CRITERION 5 (search vs brute force, 200 points x 3 fields): PASS")


def test_criterion_06_cusp_count_and_floor(fields, sweep_reports):
    for label, field in fields.items():
        reports, _ = sweep_reports[label]
        floor = 1.0 / (2**field.degree * field.discriminant)
        mu1 = np.array([r.mu1 for r in reports])
        mu2 = np.array([r.mu2 for r in reports])
        # at most one cusp can be closer than distance one
        assert np.all(mu2 <= 1.0 + 1e-9)
        assert np.all(mu1 >= floor)
    print("CRITERION 6 (single close cusp, mu1 floor 1/(2^n Delta)): PASS")


def test_criterion_07_integral_brackets(Q, K5, hermite_estimates):
    start = time.monotonic()
    cases = (
        (Q, math.sqrt(2.0 / math.sqrt(3.0))),
        (K5, hermite_estimates["K5"][0].c_estimate),
    )
    for field, c in cases:
        n = field.degree
        for t in (0.0, 0.25, 0.5, 0.75):
            est = integral_mu1_t(field, t, samples=DEFAULT_SAMPLES, seed=0)
            if t == 0.0:
                assert est.value == 1.0
                assert est.std_error == 0.0
                continue
            lower = c ** (-2 * n * t) + (t / (1.0 - t)) * c ** (-2 * n)
            upper = 1.0 / (1.0 - t)
            assert est.value + 3 * est.std_error >= lower
            assert est.value - 3 * est.std_error <= upper
    assert time.monotonic() - start < 900.0
    print("CRITERION 7 (normalized mu1^t integrals inside brackets): PASS")


def test_criterion_08_ball_volume_homogeneity(Q, K5):
    # degree one: closed formula equals the direct integral, exactly 1 at r=1
    tail, err = integrate.quad(lambda y: y**-2, 1.0, np.inf)
    assert err < 1e-10
    assert vol_ball_unit(Q) == 1.0
    assert abs(tail - vol_ball_unit(Q)) <= 1e-9

    for field in (Q, K5):
        unit = vol_ball_unit(field)
        half = partial_volume_g(field, 0.5)
        whole = partial_volume_g(field, 1.0)
        assert half.std_error == 0.0 and whole.std_error == 0.0
        assert abs(whole.value / half.value - 4.0) <= 1e-12 * 4.0
        for r in (0.5, 2.0):
            assert abs((unit * r**2) / unit - r**2) <= 1e-12 * r**2
            r_out = 2.0 * r
            count = DEFAULT_SAMPLES
            hits = sum(
                1
                for tau in sample_cusp_neighborhood(field, r_out, count, seed=3)
                if float(tau.norm_imag()) > 1.0 / r**2
            )
            frac = hits / count
            est = unit * r_out**2 * frac
            se = unit * r_out**2 * math.sqrt(frac * (1.0 - frac) / count)
            assert abs(est - unit * r**2) <= 3 * se
    print("CRITERION 8 (ball volume: direct integral + r^2 homogeneity): PASS")


def test_criterion_09_structural_selftest():
    start = time.monotonic()
    cfg = cli.RunConfig(
        field_spec="builtin:Q",
        precision=80,
        seed=0,
        samples=DEFAULT_SAMPLES,
        out_format="json",
        workers=1,
    )
    payload, code = cli._selftest(cfg)
    elapsed = time.monotonic() - start
    failed = [c["name"] for c in payload["checks"] if not c["passed"]]
    assert code == 0
    assert payload["passed"] is True
    assert not failed
    assert len(payload["checks"]) == 16
    assert elapsed < 300.0
    print("CRITERION 9 (structural selftest, 16 invariant suites): PASS")
