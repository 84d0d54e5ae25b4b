"""Closest-cusp enumeration, reduction, and the two-sided product bound."""

import math

import numpy as np
import pytest

from cuspdist import (
    BudgetExceeded,
    Cusp,
    GroupElement,
    UpperHalfPoint,
    act,
    closest_cusps,
    default_threshold,
    hermite_upper_bound,
    in_sphere_of_influence,
    mu,
    mu1_lean,
    reduce_to_fundamental_domain,
    verify_minkowski,
)

from conftest import coprime_pairs, mu_table, oracle_top2, pair_embedding_arrays, random_taus
from test_hyperbolic import RHO, random_gamma


def test_closest_at_i_ties(Q):
    taui = UpperHalfPoint([(0.0, 1.0)])
    r = closest_cusps(Q, taui)
    assert abs(r.mu1 - 1.0) < 1e-12
    assert abs(r.mu2 - 1.0) < 1e-12
    assert r.tie_flag
    found = {r.best_cusp, r.second_cusp}
    zero_cusp = Cusp(Q, Q.zero(), Q.one())
    assert any(c.is_infinity for c in found)
    assert any(c.same_point(zero_cusp) for c in found)


def test_closest_at_rho_corner(Q):
    r = closest_cusps(Q, RHO)
    s32 = math.sqrt(3) / 2
    assert abs(r.mu1 - s32) < 1e-12
    assert abs(r.mu2 - s32) < 1e-12
    assert r.tie_flag


def test_closest_high_point(Q):
    tau = UpperHalfPoint([(0.5, 100.0)])
    r = closest_cusps(Q, tau)
    assert r.best_cusp.is_infinity
    assert abs(r.mu1 - 100.0) < 1e-9
    assert abs(r.mu2 - 0.009999750006249844) < 1e-12


def test_threshold_and_upper_bound_identities(Q, K2, K5):
    for field in (Q, K2, K5):
        lb = default_threshold(field)
        ub = hermite_upper_bound(field)
        n = field.degree
        assert abs(lb - 1.0 / (2**n * field.discriminant)) < 1e-15
        assert abs(ub - math.sqrt(2) * field.discriminant ** (1 / (2 * n))) < 1e-12
        assert abs(ub ** (2 * n) * lb - 1.0) < 1e-12


def test_mu1_lean_matches_full_ranking(Q, K5):
    for field in (Q, K5):
        for tau in random_taus(field, 15, 59):
            lean = mu1_lean(field, tau)
            full = closest_cusps(field, tau)
            assert abs(lean - full.mu1) < 1e-10 * max(1.0, full.mu1)


def test_ranking_against_brute_force(Q, K2, K5):
    for field, bound in ((Q, 12), (K2, 4), (K5, 4)):
        pairs = coprime_pairs(field, bound)
        A, B = pair_embedding_arrays(pairs)
        for tau in random_taus(field, 40, 61):
            values = mu_table(A, B, tau)
            best, o1, second, o2 = oracle_top2(field, pairs, values)
            r = closest_cusps(field, tau)
            assert abs(r.mu1 - o1) < 1e-10 * max(1.0, o1)
            assert abs(r.mu2 - o2) < 1e-10 * max(1.0, o2)
            if not r.tie_flag:
                assert r.best_cusp.same_point(best)


def test_reduce_recovers_interior_point(Q):
    rng = np.random.Generator(np.random.Philox(key=np.array([43, 1], dtype=np.uint64)))
    for _ in range(25):
        x0 = float(rng.uniform(-0.45, 0.45))
        y0 = float(rng.uniform(1.05, 2.5))
        tau0 = UpperHalfPoint([(x0, y0)])
        g = random_gamma(Q, rng, steps=8)
        moved = act(g, tau0)
        reduced, gamma = reduce_to_fundamental_domain(Q, moved)
        assert reduced.is_close(tau0, 1e-9)
        assert act(gamma, moved).is_close(reduced, 1e-12)


def test_reduce_matches_classical_gauss_loop(Q):
    rng = np.random.Generator(np.random.Philox(key=np.array([47, 1], dtype=np.uint64)))
    for _ in range(25):
        z = complex(float(rng.uniform(-2.5, 2.5)), float(rng.uniform(0.2, 1.8)))
        w = z
        for _ in range(200):
            w = complex(w.real - round(w.real), w.imag)
            if abs(w) < 1.0 - 1e-9:
                w = -1 / w
            else:
                break
        if abs(abs(w) - 1.0) < 1e-6 or abs(abs(w.real) - 0.5) < 1e-6:
            continue  # boundary conventions may legitimately differ
        reduced, _ = reduce_to_fundamental_domain(Q, UpperHalfPoint([z]))
        assert abs(float(reduced.x[0]) - w.real) < 1e-9
        assert abs(float(reduced.y[0]) - w.imag) < 1e-9


def test_reduce_idempotent_and_structured(K2, K5):
    for field in (K2, K5):
        for tau in random_taus(field, 8, 67):
            reduced, gamma = reduce_to_fundamental_domain(field, tau)
            assert act(gamma, tau).is_close(reduced, 1e-12)
            # infinity attains mu1 at the reduced point
            m_inf = float(mu(reduced, Cusp.infinity(field)))
            assert m_inf >= mu1_lean(field, reduced) * (1 - 1e-9)
            # the imaginary part sits in the unit log cell
            _, y = reduced.float_arrays()
            ks = field.reduce_log_vector(np.log(y))
            assert not ks.any()
            # the real part sits in the centered coordinate cell
            x, _ = reduced.float_arrays()
            coeff = np.linalg.solve(field._emb_f64, x)
            assert np.all(np.abs(coeff) <= 0.5 + 1e-9)
            again, _ = reduce_to_fundamental_domain(field, reduced)
            assert again.is_close(reduced, 1e-9)


def test_verify_minkowski_exact_corners(Q):
    report = verify_minkowski(Q, RHO)
    assert report.passed
    assert abs(report.product - 0.75) < 1e-12
    taui = UpperHalfPoint([(0.0, 1.0)])
    report = verify_minkowski(Q, taui)
    assert abs(report.product - 1.0) < 1e-12
    assert report.upper_bound >= report.product


def test_verify_minkowski_report_bounds(K5):
    for tau in random_taus(K5, 10, 71):
        report = verify_minkowski(K5, tau)
        assert report.passed
        n = K5.degree
        expected_lower = hermite_upper_bound(K5) ** (-4 * n)
        assert abs(report.lower_bound - expected_lower) < 1e-15
        assert expected_lower - 1e-9 <= report.product <= 1 + 1e-9


def test_budget_exceeded(K5):
    tau = UpperHalfPoint([(0.1, 1.0), (0.2, 0.8)])
    with pytest.raises(BudgetExceeded):
        closest_cusps(K5, tau, budget=3)


def test_sphere_of_influence_shortcut(K5):
    tall = UpperHalfPoint([(0.0, 50.0), (0.0, 50.0)])
    assert in_sphere_of_influence(K5, tall)
    low = UpperHalfPoint([(0.45, 0.05), (0.4, 0.05)])
    assert not in_sphere_of_influence(K5, low)


def test_enumeration_stats_present(K5):
    tau = UpperHalfPoint([(0.1, 1.0), (0.2, 0.8)])
    r = closest_cusps(K5, tau)
    stats = r.enumeration_stats
    assert stats["pairs_scored"] > 0
    assert stats["passes"] >= 1
    assert stats["final_threshold"] <= r.mu2 + 1e-12
