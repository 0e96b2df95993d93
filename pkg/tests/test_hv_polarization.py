import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from hvq.errors import InvalidParameter, ZeroAtOrigin
from hvq.hv_polarization import (
    MIN_EPSILON_EXACT,
    MalusTarget,
    ResponseCurve,
    _Objective,
    _lag_target,
    autocorrelate,
    malus_mismatch,
    best_fit,
    cosine_coefficients,
    fit_response,
    fit_restarts,
    fourier_feasibility,
    malus,
)
from hvq.reports import read_csv

# Regression baseline for the infeasible eps = 0.02 target at grid 360
# (sup residual of the least-squares fit, cos^2 start).
EPS002_BASELINE = 0.028696


def quad_autocorr_cos2(alpha):
    """(1/pi) * int cos^2(l) cos^2(l - alpha) dl over one period, by adaptive quadrature."""
    val, _ = integrate.quad(lambda l: math.cos(l) ** 2 * math.cos(l - alpha) ** 2, -math.pi / 2, math.pi / 2,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / math.pi


def midpoint_autocorr(func, alphas, n):
    lam = -math.pi / 2 + (np.arange(n) + 0.5) * math.pi / n
    return np.array([np.mean(func(lam) * func(lam - a)) for a in alphas])


unit_curves = arrays(np.float64, st.integers(4, 96), elements=st.floats(0.0, 1.0))


class TestAutocorrelate:
    def test_constant_curve(self):
        c = autocorrelate(ResponseCurve.constant(0.7, 64))
        np.testing.assert_allclose(c.raw, 0.49, atol=1e-15)
        np.testing.assert_allclose(c.normalized, 1.0, atol=1e-15)

    def test_cos2_against_quadrature(self):
        n = 360
        c = autocorrelate(ResponseCurve.cos2(n))
        picks = [0, 17, 90, 123, 180, 250, 359]
        oracle_quad = np.array([quad_autocorr_cos2(c.angles[k]) for k in picks])
        oracle_fine = midpoint_autocorr(lambda l: np.cos(l) ** 2, c.angles[picks], 10 * n)
        np.testing.assert_allclose(c.raw[picks], oracle_quad, atol=1e-12)
        np.testing.assert_allclose(c.raw[picks], oracle_fine, atol=1e-12)
        closed = 0.25 + np.cos(2 * c.angles) / 8
        np.testing.assert_allclose(c.raw, closed, atol=1e-14)
        np.testing.assert_allclose(c.normalized, 1 / 3 + 2 / 3 * np.cos(c.angles) ** 2, atol=1e-14)

    def test_single_bin_indicator(self):
        n = 40
        v = np.zeros(n)
        v[7] = 1.0
        c = autocorrelate(ResponseCurve(v))
        assert c.raw[c.zero_index] == pytest.approx(1 / n)
        others = np.delete(c.raw, c.zero_index)
        assert np.max(np.abs(others)) < 1e-15

    def test_zero_curve(self):
        with pytest.raises(ZeroAtOrigin):
            autocorrelate(ResponseCurve(np.zeros(16)))
        c = autocorrelate(ResponseCurve(np.zeros(16)), normalize=False)
        assert c.normalized is None

    def test_small_grid_rejected(self):
        with pytest.raises(InvalidParameter):
            autocorrelate(ResponseCurve(np.ones(3)))

    def test_out_of_range_values_rejected(self):
        with pytest.raises(InvalidParameter):
            ResponseCurve(np.array([0.1, 1.2, 0.3, 0.4]))

    @settings(max_examples=60, deadline=None)
    @given(unit_curves)
    def test_even_in_alpha(self, v):
        c = autocorrelate(ResponseCurve(v), normalize=False)
        lagged = np.roll(c.raw, -c.zero_index)
        mirrored = np.roll(lagged[::-1], 1)
        scale = max(float(c.raw.max()), 1e-300)
        assert np.max(np.abs(lagged - mirrored)) <= 1e-12 * scale

    @settings(max_examples=60, deadline=None)
    @given(unit_curves)
    def test_origin_value_bounded(self, v):
        c = autocorrelate(ResponseCurve(v), normalize=False)
        a0 = c.raw[c.zero_index]
        assert a0 <= 1.0
        if np.all(v == 1.0):
            assert a0 == 1.0
        else:
            assert a0 < 1.0

    @settings(max_examples=60, deadline=None)
    @given(unit_curves)
    def test_positive_semidefinite(self, v):
        c = autocorrelate(ResponseCurve(v), normalize=False)
        assert cosine_coefficients(c).min() >= -1e-10

    @pytest.mark.parametrize("n", [16, 64, 360])
    def test_grid_refinement(self, n):
        coarse = autocorrelate(ResponseCurve.cos2(n))
        fine = autocorrelate(ResponseCurve.cos2(2 * n))
        # coarse angle k*pi/n is fine index 2k
        common = fine.raw[fine.zero_index + 2 * (np.arange(n) - n // 2)]
        assert np.max(np.abs(coarse.raw - common)) <= 5 / n

    def test_csv_roundtrip(self, tmp_path):
        c = autocorrelate(ResponseCurve.cos2(32))
        header, rows = read_csv(c.to_csv(tmp_path / "c.csv"))
        assert header == ["lambda_or_alpha", "value"]
        assert len(rows) == 32
        assert float(rows[16][0]) == 0.0 and float(rows[16][1]) == 1.0
        header, rows = read_csv(ResponseCurve.cos2(32).to_csv(tmp_path / "p.csv"))
        assert header == ["lambda_or_alpha", "value"]


class TestLookup:
    def test_nearest_node(self):
        r = ResponseCurve.cos2(360)
        assert r.at(0.0) == pytest.approx(1.0, abs=1e-4)
        assert r.at(math.pi / 2) == pytest.approx(0.0, abs=1e-4)
        assert r.at(math.pi + 0.3) == r.at(0.3)
        np.testing.assert_array_equal(r.at(r.nodes), r.values)


class TestMalus:
    def test_values(self):
        assert malus(0.0, MalusTarget(0.02)) == pytest.approx(1.0)
        assert malus(math.pi / 2, MalusTarget(0.02)) == pytest.approx(0.02)
        assert malus(math.pi / 4, MalusTarget(0.0)) == pytest.approx(0.5)

    def test_target_validation(self):
        with pytest.raises(InvalidParameter):
            MalusTarget(1.0)
        with pytest.raises(InvalidParameter):
            MalusTarget(-0.1)


class TestMalusMismatch:
    def test_mismatch_third(self):
        rep = malus_mismatch(360)
        assert rep.max_deviation == pytest.approx(1 / 3, abs=1e-12)
        assert rep.at_angle == pytest.approx(math.pi / 2)

    def test_exact_against_third(self):
        assert malus_mismatch(360, epsilon=1 / 3).max_deviation <= 1e-10

    def test_grid_convergence(self):
        assert abs(malus_mismatch(16).max_deviation - malus_mismatch(4096).max_deviation) <= 1e-3

    def test_grid_too_small(self):
        with pytest.raises(InvalidParameter):
            malus_mismatch(8)


class TestFeasibility:
    def test_third_is_feasible(self):
        rep = fourier_feasibility(MalusTarget(1 / 3))
        assert rep.ratio == pytest.approx(0.5)
        assert rep.feasible_exact
        assert rep.min_epsilon_exact == MIN_EPSILON_EXACT

    def test_small_offset_infeasible(self):
        rep = fourier_feasibility(MalusTarget(0.02))
        assert rep.ratio == pytest.approx(0.98 / 1.02, abs=1e-12)
        assert abs(rep.ratio - 0.9608) < 1e-4
        assert not rep.feasible_exact

    def test_near_one(self):
        rep = fourier_feasibility(MalusTarget(0.999999))
        assert rep.ratio < 1e-6 and rep.feasible_exact

    def test_coefficients_match_target_dft(self):
        eps = 0.2
        rep = fourier_feasibility(eps)
        n = 64
        m = _lag_target(MalusTarget(eps), n)
        coeffs = np.fft.rfft(m).real / n
        assert coeffs[0] == pytest.approx(rep.c0)
        # two-sided cosine weight = 2 * one-sided DFT coefficient
        assert 2 * coeffs[1] == pytest.approx(rep.c1)

    def test_witness_cos2_ratio(self):
        # cos^2 witness: its normalized autocorrelation has c1/c0 = 1/2 exactly
        c = autocorrelate(ResponseCurve.cos2(64), normalize=False)
        coeffs = cosine_coefficients(c)
        assert 2 * coeffs[1] / coeffs[0] == pytest.approx(0.5, abs=1e-13)


class TestFit:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0.2, 1.0, 48)
        obj = _Objective(_lag_target(MalusTarget(0.02), 48))
        _, g = obj.value_and_grad(p)
        h = 1e-6
        fd = np.array([(obj.value(p + h * e) - obj.value(p - h * e)) / (2 * h) for e in np.eye(48)])
        np.testing.assert_allclose(g, fd, atol=1e-7)

    def test_exact_witness(self):
        rep = fit_response(MalusTarget(1 / 3), grid_size=360)
        assert rep.sup_residual <= 1e-4
        assert rep.feasibility_bound == pytest.approx(1 / 3)

    def test_near_constant_target(self):
        spreads = []
        for eps in (0.99, 0.9999, 0.999999):
            rep = fit_response(MalusTarget(eps), grid_size=128)
            assert rep.sup_residual < 1e-8
            spreads.append(np.ptp(rep.fitted.values))
        assert spreads[0] > spreads[1] > spreads[2]
        assert spreads[2] < 0.01

    def test_feasible_from_perturbed_start(self):
        rng = np.random.default_rng(0)
        init = np.clip(np.cos(ResponseCurve.cos2(128).nodes) ** 2 + 0.2 * rng.uniform(-1, 1, 128), 0, 1)
        rep = fit_response(MalusTarget(0.5), grid_size=128, init=init, max_iter=3000)
        # leftover high harmonics decay slowly; the residual still drops well below the start
        assert rep.sup_residual < 1e-3

    def test_box_constraints_exact(self):
        rep = fit_response(MalusTarget(0.02), grid_size=64, max_iter=300)
        assert rep.fitted.values.min() >= 0.0 and rep.fitted.values.max() <= 1.0

    def test_infeasible_residual_baseline(self):
        reps = fit_restarts(MalusTarget(0.02), n_restarts=5, seed=0, grid_size=360)
        res = np.array([r.sup_residual for r in reps])
        assert np.all(res > 0)
        assert np.all(np.abs(res / EPS002_BASELINE - 1) <= 0.10)
        assert best_fit(reps).sup_residual == res.min()

    def test_deterministic(self):
        a = fit_response(0.1, grid_size=64, max_iter=200)
        b = fit_response(0.1, grid_size=64, max_iter=200)
        np.testing.assert_array_equal(a.fitted.values, b.fitted.values)
        assert a.iterations == b.iterations

    @pytest.mark.parametrize("kw", [dict(grid_size=16), dict(max_iter=0), dict(tol=0.0)])
    def test_invalid_parameters(self, kw):
        with pytest.raises(InvalidParameter):
            fit_response(0.1, **kw)

    def test_best_fit_tie_break(self):
        a = fit_response(0.5, grid_size=32)
        b = fit_response(0.5, grid_size=32)
        assert best_fit([a, b]) is a

    def test_report_serialization(self, tmp_path):
        rep = fit_response(1 / 3, grid_size=32)
        rep.to_csv(tmp_path / "fit.csv")
        rep.write_summary(tmp_path / "fit.txt")
        text = (tmp_path / "fit.txt").read_text()
        assert "sup_residual" in text and "feasibility_bound" in text
        header, rows = read_csv(tmp_path / "fit.csv")
        assert header == ["lambda_or_alpha", "value"] and len(rows) == 32
