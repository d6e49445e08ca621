"""Dispersion-spectrum fitting: offset search, recovery, impedance routes."""

import math
import types

import numpy as np
import pytest

from jjstack import (
    AmbiguousOffset,
    DegenerateData,
    MissingAnchor,
    PeakList,
    closed_form_frequency,
    fit_dispersion,
    impedance_from_fit,
)
from jjstack.extraction import _damped_gauss_newton

TWO_PI = 2.0 * math.pi

# Anchor chain scales (n = 9, big_n = 138, l_j = 4.75 nH, c_j = 28.579 fF,
# c_g = 0.16289 fF), frozen from the element values by hand.
ZA_OMEGA_P = 85828136053.17847
ZA_OMEGA_G = 378952458385.098
ZA_BIG_N = 138


def peaks_from_modes(big_n, omega_p, omega_g, m, noise=None):
    w = closed_form_frequency(big_n, omega_p, omega_g, np.asarray(m, dtype=float))
    if noise is not None:
        w = np.sort(w * (1.0 + noise))
    return PeakList(w / TWO_PI, np.ones(w.size), span=(0.0, 2.0 * w.max()))


def test_offset_zero_round_trip():
    wp, wg = TWO_PI * 12e9, TWO_PI * 40e9
    fit = fit_dispersion(peaks_from_modes(50, wp, wg, range(1, 16)), 50)
    assert fit.index_offset == 0
    assert fit.omega_p == pytest.approx(wp, rel=1e-9)
    assert fit.omega_g == pytest.approx(wg, rel=1e-9)
    assert fit.residual_rms < 1e-12
    assert fit.predicted_missing_modes.size == 0
    assert fit.big_n == 50


def test_anchor_chain_offset_two_noiseless():
    # modes 1 and 2 hidden below the measurement band; 3..40 visible
    fit = fit_dispersion(
        peaks_from_modes(ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, range(3, 41)), ZA_BIG_N
    )
    assert fit.index_offset == 2
    assert fit.omega_p == pytest.approx(ZA_OMEGA_P, rel=1e-8)
    assert fit.omega_g == pytest.approx(ZA_OMEGA_G, rel=1e-8)

    want = closed_form_frequency(
        ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, np.array([1.0, 2.0])
    )
    assert fit.predicted_missing_modes.shape == (2,)
    assert np.allclose(fit.predicted_missing_modes, want, rtol=1e-6)


def test_anchor_chain_recovery_with_noise():
    rng = np.random.default_rng(0)
    noise = 0.002 * rng.standard_normal(38)
    fit = fit_dispersion(
        peaks_from_modes(ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, range(3, 41), noise),
        ZA_BIG_N,
    )
    assert fit.index_offset == 2
    assert abs(fit.omega_p - ZA_OMEGA_P) / ZA_OMEGA_P < 0.01
    assert abs(fit.omega_g - ZA_OMEGA_G) / ZA_OMEGA_G < 0.01

    sig_p, sig_g = fit.uncertainties()
    assert sig_p > 0 and sig_g > 0
    assert fit.covariance.shape == (2, 2)
    assert fit.covariance[0, 1] == pytest.approx(fit.covariance[1, 0], rel=1e-9)
    assert fit.residual_rms > 1e-4      # noise floor is visible in the rms


def test_ambiguous_offset_raises_with_candidates():
    # three high-index peaks of a very long chain carry almost no curvature,
    # so neighboring offsets fit equally well once noise is added
    big_n = 2000
    wp, wg = TWO_PI * 15e9, TWO_PI * 60e9
    rng = np.random.default_rng(3)
    noise = 0.02 * rng.standard_normal(3)
    peaks = peaks_from_modes(big_n, wp, wg, [4, 5, 6], noise)

    with pytest.raises(AmbiguousOffset) as err:
        fit_dispersion(peaks, big_n)
    cands = err.value.candidates
    assert len(cands) == 2
    offsets = {c[0] for c in cands}
    assert offsets <= set(range(6))
    for _, rms in cands:
        assert rms > 0
    # machine-readable payload for the CLI error record
    assert "candidates" in err.value.details
    assert err.value.details["candidates"] == [list(c) for c in cands] or \
        err.value.details["candidates"] == cands


def test_short_chain_limits_offset_search():
    # big_n = 6 has modes 1..5 only; with 5 peaks just offset 0 is feasible
    wp, wg = TWO_PI * 10e9, TWO_PI * 20e9
    fit = fit_dispersion(peaks_from_modes(6, wp, wg, range(1, 6)), 6)
    assert fit.index_offset == 0
    assert fit.omega_p == pytest.approx(wp, rel=1e-8)
    assert fit.omega_g == pytest.approx(wg, rel=1e-8)


def test_input_validation():
    pl = PeakList(np.array([1e9, 2e9]), np.ones(2))
    with pytest.raises(ValueError):
        fit_dispersion(pl, 100)

    dup = types.SimpleNamespace(freq_hz=np.array([1e9, 1e9, 2e9]))
    with pytest.raises(DegenerateData):
        fit_dispersion(dup, 100)


def test_impedance_from_fit_inductance_route():
    fit = fit_dispersion(
        peaks_from_modes(ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, range(3, 41)), ZA_BIG_N
    )
    est = impedance_from_fit(fit, 9, anchor_l_j=4.75e-9)
    assert est.route == "l_j"
    assert est.z_c == pytest.approx(16200.217595962944, rel=1e-6)
    assert est.l_tot == pytest.approx(5.8995e-06, rel=1e-6)
    assert est.c_g == pytest.approx(1.6289e-16, rel=1e-6)
    assert est.c_j == pytest.approx(2.8579e-14, rel=1e-6)
    assert est.omega_1 == pytest.approx(TWO_PI * 1366103252.57725, rel=1e-6)


def test_impedance_from_fit_capacitance_route():
    fit = fit_dispersion(
        peaks_from_modes(ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, range(3, 41)), ZA_BIG_N
    )
    est = impedance_from_fit(fit, 9, anchor_c_g=1.6289e-16)
    assert est.route == "c_g"
    assert est.z_c == pytest.approx(16200.217595962944, rel=1e-6)
    assert est.l_j == pytest.approx(4.75e-9, rel=1e-6)
    # both routes agree on the anchor chain because the anchors are consistent
    other = impedance_from_fit(fit, 9, anchor_l_j=4.75e-9)
    assert est.z_c == pytest.approx(other.z_c, rel=1e-6)


def test_impedance_anchor_validation():
    fit = fit_dispersion(
        peaks_from_modes(ZA_BIG_N, ZA_OMEGA_P, ZA_OMEGA_G, range(3, 41)), ZA_BIG_N
    )
    with pytest.raises(MissingAnchor):
        impedance_from_fit(fit, 9)
    with pytest.raises(MissingAnchor):
        impedance_from_fit(fit, 9, anchor_l_j=1e-9, anchor_c_g=1e-16)
    with pytest.raises(ValueError):
        impedance_from_fit(fit, 0, anchor_l_j=1e-9)
    with pytest.raises(ValueError):
        impedance_from_fit(fit, 9, anchor_l_j=-1e-9)
    with pytest.raises(ValueError):
        impedance_from_fit(fit, 9, anchor_c_g=math.inf)


class TestGaussNewtonCore:
    def test_converges_on_solvable_system(self):
        def residual(x):
            return np.array([x[0] - 3.0, x[1] + 2.0, (x[0] - 3.0) * (x[1] + 2.0)])

        x, info = _damped_gauss_newton(residual, np.array([0.5, 0.5]),
                                       np.array([1.0, 1.0]))
        assert info["converged"]
        assert np.allclose(x, [3.0, -2.0], atol=1e-8)
        assert info["residual_rms"] < 1e-10
        assert info["covariance"].shape == (2, 2)

    def test_reports_non_convergence_on_runaway_drift(self):
        # exp(-x) has no finite minimizer; steps keep being accepted until
        # the iteration budget runs out
        def residual(x):
            return np.array([math.exp(-x[0]), 0.1])

        _, info = _damped_gauss_newton(residual, np.array([1.0]), np.array([1.0]))
        assert not info["converged"]
        assert info["n_iter"] == 200

    def test_step_filter_keeps_iterates_feasible(self):
        # solution at x = -5 but the filter forbids crossing zero; the fit
        # stalls at a boundary-constrained stationary point instead
        def residual(x):
            return np.array([x[0] + 5.0, 0.0])

        x, info = _damped_gauss_newton(
            residual, np.array([2.0]), np.array([1.0]),
            step_filter=lambda xt: xt[0] > 0,
        )
        assert x[0] > 0
        assert info["converged"]
