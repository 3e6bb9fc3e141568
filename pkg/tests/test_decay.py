import math

import numpy as np
import pytest

from bbmlab.decay import (DecayReport, PhaseFunction, alpha_scan, band_limited_decay_data, data_factor,
                          decay_experiment, envelope_bound, gaussian_decay_data, oscillatory_integral,
                          second_derivative_min, sup_alpha_envelope, van_der_corput_check)
from bbmlab.errors import InflectionInInterval, ResolutionInsufficient, WraparoundWindowExceeded
from bbmlab.spectral_core import GridSpec


def test_phase_derivatives_by_finite_differences():
    h = PhaseFunction(0.3)
    xi = np.linspace(-4, 4, 41)
    d = 1e-5
    assert np.allclose(h.d1(xi), (h(xi + d) - h(xi - d)) / (2 * d), atol=1e-9)
    assert np.allclose(h.d2(xi), (h.d1(xi + d) - h.d1(xi - d)) / (2 * d), atol=1e-8)
    assert np.allclose(h.d2(np.array([0.0, math.sqrt(3), -math.sqrt(3)])), 0.0, atol=1e-15)


def test_small_time_limit():
    assert oscillatory_integral(2.0, 1e-9, 0.3) == pytest.approx(4.0, abs=1e-7)


def test_integral_refinement_and_resolution():
    n, t = 1e3 ** 0.25, 1e3
    a = oscillatory_integral(n, t, 0.0)
    b = oscillatory_integral(n, t, 0.0, quad_points=8 * int(10 * t * n))
    assert abs(a - b) <= 1e-8
    with pytest.raises(ResolutionInsufficient):
        oscillatory_integral(n, t, 0.0, quad_points=16)
    # |I| at alpha = 0 sits below a small multiple of the envelope
    assert abs(a) <= 5.0 * envelope_bound(t)


def test_van_der_corput_examples():
    lhs, rhs = van_der_corput_check(2.0 - 0.2, 3.0, 0.0, 100.0)
    assert lhs <= rhs
    with pytest.raises(InflectionInInterval):
        van_der_corput_check(-1.0, 1.0, 0.0, 10.0)
    with pytest.raises(ValueError):
        van_der_corput_check(1.0, 1.0, 0.0, 10.0)


def test_second_derivative_min_at_endpoint():
    h = PhaseFunction()
    for a, b in [(1.8, 3.0), (0.1, 1.7), (2.0, 9.0), (-1.5, -0.2), (-6.0, -1.8)]:
        dense = np.min(np.abs(h.d2(np.linspace(a, b, 20001))))
        assert second_derivative_min(a, b) == pytest.approx(dense, rel=1e-6)


def test_envelope_attained_near_stationary_alphas():
    scan = alpha_scan(100 ** 0.25, 100.0)
    assert abs(scan["argmax_alpha"]) <= 1.0
    assert scan["sup"] >= scan["sup_gauss_legendre"] - 1e-12
    cenv = sup_alpha_envelope(100 ** 0.25, 100.0) / envelope_bound(100.0)
    assert 0 < cenv < 10


def test_czt_scan_matches_direct_quadrature():
    n, t = 100 ** 0.25, 100.0
    alphas = np.linspace(-1, 1, 21)
    vals = alpha_scan(n, t, alphas, refine=0)["values"]
    direct = [abs(oscillatory_integral(n, t, a)) for a in alphas]
    assert np.max(np.abs(np.asarray(vals) - direct)) <= 1e-6


@pytest.fixture(scope="module")
def small_grid():
    return GridSpec(2 ** 15, 1024.0)


def test_decay_gaussian_bound(small_grid):
    u0 = gaussian_decay_data(small_grid)
    times = np.concatenate([[0.0], np.geomspace(1, 200, 15)])
    rep = decay_experiment(u0, times)
    assert rep.violations == 0
    assert rep.sup_norms[0] <= rep.C_fitted * data_factor(u0) * (1 + 1e-12)
    assert rep.measured_exponent >= 1 / 8
    assert DecayReport.from_json(rep.to_json()) == rep


def test_decay_band_data_shares_the_envelope(small_grid):
    times = np.concatenate([[0.0], np.geomspace(1, 200, 15)])
    C = decay_experiment(gaussian_decay_data(small_grid), times).C_fitted
    u0 = band_limited_decay_data(small_grid, 3.0, 1.0)
    assert np.max(np.abs(u0.eta.samples)) == pytest.approx(1.0)
    assert decay_experiment(u0, times, C=C).violations == 0


def test_decay_wraparound_and_validation(small_grid):
    u0 = gaussian_decay_data(small_grid)
    with pytest.raises(WraparoundWindowExceeded):
        decay_experiment(u0, [0.0, 600.0])
    with pytest.raises(ValueError):
        decay_experiment(u0, [-1.0, 1.0])
    with pytest.raises(ValueError):
        decay_experiment(u0, [0.0, 20.0, 50.0])  # nothing inside the fit window
