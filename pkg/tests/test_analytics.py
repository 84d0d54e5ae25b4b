"""Volumes, samplers, Monte Carlo integrals, and the extremal-point search."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from cuspdist import (
    UpperHalfPoint,
    ValidationError,
    estimate_hermite,
    hermite_upper_bound,
    integral_mu1_t,
    partial_volume_g,
    sample_cusp_neighborhood,
    siegel_volume,
    vol_ball_unit,
)


def test_vol_ball_unit_values(Q, K2, K5):
    assert vol_ball_unit(Q) == 1.0
    for field in (K2, K5):
        expected = math.sqrt(field.discriminant) * 2 * field.regulator / field.index_plus_sq
        assert abs(vol_ball_unit(field) - expected) < 1e-12 * expected


def test_ball_volume_direct_integral_degree_one(Q):
    # unit strip cross-section times the 1/y^2 tail from height 1
    tail, err = integrate.quad(lambda y: y**-2, 1.0, np.inf)
    assert err < 1e-10
    assert abs(tail * 1.0 - vol_ball_unit(Q)) < 1e-9
    assert vol_ball_unit(Q) * 1.0**2 == 1.0


def test_ball_volume_homogeneity_closed_form(Q, K2, K5):
    for field in (Q, K2, K5):
        unit = vol_ball_unit(field)
        for r in (0.5, 2.0):
            assert abs((unit * r**2) / unit - r**2) < 1e-12 * r**2


def test_ball_volume_homogeneity_sampled(Q, K5):
    for field in (Q, K5):
        unit = vol_ball_unit(field)
        for r in (0.5, 2.0):
            r_out = 2 * r
            count = 25_000
            hits = 0
            for tau in sample_cusp_neighborhood(field, r_out, count, seed=3):
                if float(tau.norm_imag()) > 1.0 / r**2:
                    hits += 1
            frac = hits / count
            est = unit * r_out**2 * frac
            se = unit * r_out**2 * math.sqrt(frac * (1 - frac) / count)
            assert abs(est - unit * r**2) <= 3 * se


def test_sampler_support(Q, K5):
    for tau in sample_cusp_neighborhood(Q, 1.0, 300, seed=5):
        assert -0.5 - 1e-12 <= float(tau.x[0]) < 0.5 + 1e-12
        assert float(tau.y[0]) > 1.0 - 1e-12
    for tau in sample_cusp_neighborhood(K5, 2.0, 300, seed=5):
        assert float(tau.norm_imag()) > 0.25 * (1 - 1e-12)
        x, _ = tau.float_arrays()
        coeff = np.linalg.solve(K5._emb_f64, x)
        assert np.all(np.abs(coeff) <= 0.5 + 1e-12)


def test_sampler_height_distribution(Q):
    ys = np.array([
        float(tau.y[0])
        for tau in sample_cusp_neighborhood(Q, 1.0, 10_000, seed=0)
    ])
    # 1/y is uniform on (0, 1] when y has density 1/y^2 on [1, inf)
    result = stats.kstest(1.0 / ys, "uniform")
    assert result.pvalue > 0.01


def test_sampler_tail_probability(Q):
    count = 50_000
    hits = sum(
        1
        for tau in sample_cusp_neighborhood(Q, 1.0, count, seed=11)
        if float(tau.y[0]) > 2.0
    )
    se = math.sqrt(0.25 / count)
    assert abs(hits / count - 0.5) < 4 * se


def test_sampler_reproducible(K5):
    a = [tau.coords for tau in sample_cusp_neighborhood(K5, 1.5, 40, seed=9)]
    b = [tau.coords for tau in sample_cusp_neighborhood(K5, 1.5, 40, seed=9)]
    assert a == b
    c = [tau.coords for tau in sample_cusp_neighborhood(K5, 1.5, 40, seed=10)]
    assert a != c


def test_sampler_validation(Q):
    with pytest.raises(ValidationError):
        list(sample_cusp_neighborhood(Q, 1.0, 10, seed=-1))
    with pytest.raises(ValidationError):
        list(sample_cusp_neighborhood(Q, 1.0, -3))
    with pytest.raises(ValidationError):
        list(sample_cusp_neighborhood(Q, 0.0, 5))
    assert list(sample_cusp_neighborhood(Q, 1.0, 0)) == []


def test_partial_volume_closed_branch(Q, K5):
    est = partial_volume_g(Q, 0.5)
    assert est.value == 0.25
    assert est.std_error == 0.0
    assert est.samples == 0
    est = partial_volume_g(K5, 1.0)
    assert abs(est.value - vol_ball_unit(K5)) < 1e-12
    assert est.std_error == 0.0


def test_partial_volume_monotone_and_saturating(K5):
    samples = 25_000
    g12 = partial_volume_g(K5, 1.2, samples=samples, seed=1)
    g20 = partial_volume_g(K5, 2.0, samples=samples, seed=1)
    assert g12.value <= g20.value + 1e-12
    assert g12.std_error > 0
    x_sat = hermite_upper_bound(K5) ** K5.degree
    sat = partial_volume_g(K5, x_sat, samples=samples, seed=1)
    hat = siegel_volume(K5).vol_gamma_hat
    assert abs(sat.value - hat) <= 3 * sat.std_error
    # saturated: growing x further does not grow the estimate
    beyond = partial_volume_g(K5, 2 * x_sat, samples=samples, seed=1)
    assert abs(beyond.value - sat.value) <= 3 * (beyond.std_error + sat.std_error)


def test_partial_volume_sandwich(Q, K5):
    """g(1) / vol_gamma_hat lies between c^(-2n) and 1."""
    for field in (Q, K5):
        hat = siegel_volume(field).vol_gamma_hat
        g1 = partial_volume_g(field, 1.0)
        ub = hermite_upper_bound(field)
        ratio = g1.value / hat
        assert ub ** (-2 * field.degree) - 1e-9 <= ratio <= 1.0 + 1e-9


def test_volume_report_consistency(Q, K2, K5):
    for field in (Q, K2, K5):
        report = siegel_volume(field)
        n = field.degree
        expected = (
            2.0 / math.pi**n * field.discriminant**1.5 * report.zeta2.value
        )
        assert abs(report.vol_gamma - expected) < 1e-12 * expected
        assert abs(report.vol_gamma_hat * field.index_plus_sq - report.vol_gamma) < 1e-12
        assert abs(report.vol_ball_unit - vol_ball_unit(field)) < 1e-15


def test_volume_rationals_value(Q):
    report = siegel_volume(Q)
    assert abs(report.vol_gamma - math.pi / 3) < 1e-6


def test_integral_t_zero_exact(Q, K5):
    for field in (Q, K5):
        est = integral_mu1_t(field, 0.0, samples=1000, seed=2)
        assert est.value == 1.0
        assert est.std_error == 0.0


def test_integral_validation(Q):
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(ValidationError):
            integral_mu1_t(Q, bad, samples=100)


def test_integral_reproducible(K5):
    a = integral_mu1_t(K5, 0.5, samples=4000, seed=17)
    b = integral_mu1_t(K5, 0.5, samples=4000, seed=17)
    assert a == b
    c = integral_mu1_t(K5, 0.5, samples=4000, seed=18)
    assert a.value != c.value


def test_integral_worker_split_is_deterministic(Q):
    a = integral_mu1_t(Q, 0.25, samples=3000, seed=6, workers=2)
    b = integral_mu1_t(Q, 0.25, samples=3000, seed=6, workers=2)
    assert a == b


def test_integral_brackets_small(Q):
    c_sq = 2 / math.sqrt(3)
    for t in (0.25, 0.5):
        est = integral_mu1_t(Q, t, samples=30_000, seed=0)
        lower = c_sq ** (-t) + (t / (1 - t)) * c_sq**-1
        upper = 1 / (1 - t)
        assert lower <= est.value + 3 * est.std_error
        assert est.value - 3 * est.std_error <= upper


def test_hermite_degree_one(Q):
    est = estimate_hermite(Q)
    corner = (2 / math.sqrt(3)) ** 0.5
    assert abs(est.distance - corner) < 1e-6
    assert abs(abs(float(est.tau_max.x[0])) - 0.5) < 1e-6
    assert abs(float(est.tau_max.y[0]) - math.sqrt(3) / 2) < 1e-6
    assert abs(est.c_estimate - est.distance) < 1e-12
    assert abs(est.upper_bound - math.sqrt(2)) < 1e-15


def test_hermite_coarse_is_still_bounded(K5):
    est = estimate_hermite(K5, grid_resolution=4, refine_iters=40)
    ub = hermite_upper_bound(K5)
    assert est.distance >= 1.0 - 1e-9
    assert 1.0 - 1e-9 <= est.c_estimate <= ub + 1e-9
    assert est.tau_max.n == 2
