import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvq.epr_sim import (
    STANDARD_SETTINGS,
    AngleSettings,
    DetectionModel,
    HiddenState,
    batch_streams,
    chsh_scan,
    chsh_value,
    interchange_gap,
    interchange_gap_quadrature,
    make_rng,
    prob_combination,
    qm_coincidence,
    qm_correlator,
    qm_monte_carlo,
    run_experiment,
    sample_pair,
    sample_pairs,
    settings_grid,
    transmit,
)
from hvq.errors import InvalidParameter
from hvq.hv_polarization import ResponseCurve
from hvq.reports import read_csv

COS2 = ResponseCurve.cos2(360)
DEP = DetectionModel(COS2, "f_dependent")
INDEP = DetectionModel(COS2, "f_independent")


def rand_settings(rng):
    return AngleSettings(*rng.uniform(-math.pi, math.pi, 4))


class TestSampling:
    def test_seed_determinism(self):
        a = [sample_pair(make_rng(11)) for _ in range(1)]
        b = [sample_pair(make_rng(11)) for _ in range(1)]
        assert a == b
        x = sample_pairs(make_rng(5), 1000)
        y = sample_pairs(make_rng(5), 1000)
        for u, v in zip(x, y):
            np.testing.assert_array_equal(u, v)

    def test_moments_and_independence(self):
        lam, fl, fr = sample_pairs(make_rng(2024), 10**5)
        assert abs(lam.mean()) <= 3 * (math.pi / math.sqrt(12)) / math.sqrt(10**5)
        assert lam.min() >= -math.pi / 2 and lam.max() < math.pi / 2
        assert fl.min() >= 0 and fl.max() < 1
        assert abs(np.corrcoef(fl, fr)[0, 1]) < 0.02

    def test_hidden_state_ranges(self):
        with pytest.raises(InvalidParameter):
            HiddenState(math.pi / 2, 0.1, 0.1)
        with pytest.raises(InvalidParameter):
            HiddenState(0.0, 1.0, 0.1)

    def test_batch_split_sizes(self):
        jobs = batch_streams(0, 100, batch_size=30)
        assert [n for n, _ in jobs] == [30, 30, 30, 10]


class TestTransmit:
    def test_all_pass_and_none_pass(self):
        ones = DetectionModel(ResponseCurve.constant(1.0, 64))
        zeros = DetectionModel(ResponseCurve.constant(0.0, 64))
        rng = make_rng(0)
        for _ in range(50):
            s = sample_pair(rng)
            th = rng.uniform(-3, 3)
            assert transmit(ones, s, th, "left")
            assert not transmit(zeros, s, th, "right")

    def test_threshold_rule(self):
        assert transmit(DEP, HiddenState(0.3, 0.5, 0.5), 0.3, "left")
        assert not transmit(DEP, HiddenState(0.3, 0.5, 0.5), 0.3 - math.pi / 2, "left")

    def test_dependent_mode_is_pure(self):
        s = HiddenState(0.1, 0.42, 0.77)
        assert {transmit(DEP, s, 0.9, "right") for _ in range(20)} == {transmit(DEP, s, 0.9, "right")}

    def test_independent_mode_frequency(self):
        rng = make_rng(9)
        lam, theta = 0.2, 0.9
        p = float(COS2.at(lam - theta))
        s = HiddenState(lam, 0.0, 0.0)
        n = 10**5
        hits = INDEP.outcomes(np.full(n, lam), np.zeros(n), theta, rng).mean()
        assert abs(hits - p) <= 3 * math.sqrt(p * (1 - p) / n)
        assert isinstance(transmit(INDEP, s, theta, "left", rng), bool)

    def test_bad_side(self):
        with pytest.raises(InvalidParameter):
            transmit(DEP, HiddenState(0, 0, 0), 0, "middle")


class TestExperiment:
    def test_all_pass(self):
        ones = DetectionModel(ResponseCurve.constant(1.0, 64))
        s = run_experiment(ones, AngleSettings(0.1, 0.7, -0.4, 1.3), 500, seed=1)
        np.testing.assert_array_equal(s.probabilities, 1.0)
        assert s.bell_prob_combination == 2.0

    @pytest.mark.parametrize("k", range(5))
    def test_local_bound(self, k):
        st_ = run_experiment(DEP, rand_settings(np.random.default_rng(k)), 10**5, seed=k, check_samples=True)
        assert st_.bell_prob_combination <= 2 + 3 * st_.bell_prob_stderr
        assert st_.s_max <= 2 and st_.s_min >= -1

    def test_per_sample_enumeration(self):
        # 0/1 outcomes: a1b1 + a2b1 + a1b2 - a2b2 always in [-1, 2]
        vals = [a1 * b1 + a2 * b1 + a1 * b2 - a2 * b2 for a1, a2, b1, b2 in itertools.product((0, 1), repeat=4)]
        assert max(vals) == 2 and min(vals) == -1

    def test_bitwise_determinism(self):
        a = run_experiment(DEP, STANDARD_SETTINGS, 3000, seed=77, batch_size=1000)
        b = run_experiment(DEP, STANDARD_SETTINGS, 3000, seed=77, batch_size=1000, workers=3)
        np.testing.assert_array_equal(a.coincidences, b.coincidences)
        np.testing.assert_array_equal(a.sub_counts, b.sub_counts)
        assert a.bell_prob_combination == b.bell_prob_combination

    def test_fresh_sampling(self):
        s = run_experiment(INDEP, STANDARD_SETTINGS, 20000, seed=3, sampling="fresh")
        assert np.all((0 <= s.probabilities) & (s.probabilities <= 1))
        np.testing.assert_allclose(s.stderr, np.sqrt(s.probabilities * (1 - s.probabilities) / 20000))
        assert math.isfinite(s.bell_prob_stderr)

    def test_counterfactual_independent_matches_fresh(self):
        # with fresh variates per evaluation the two samplings estimate the same thing
        a = run_experiment(INDEP, STANDARD_SETTINGS, 50000, seed=4)
        b = run_experiment(INDEP, STANDARD_SETTINGS, 50000, seed=5, sampling="fresh")
        diff = abs(a.bell_prob_combination - b.bell_prob_combination)
        assert diff <= 4 * math.hypot(a.bell_prob_stderr, b.bell_prob_stderr)

    def test_zero_pairs(self):
        with pytest.raises(InvalidParameter):
            run_experiment(DEP, STANDARD_SETTINGS, 0, seed=0)

    def test_csv(self, tmp_path):
        s = run_experiment(DEP, STANDARD_SETTINGS, 100, seed=0)
        header, rows = read_csv(s.to_csv(tmp_path / "c.csv"))
        assert header == ["setting_i", "setting_j", "trials", "coincidences", "probability", "stderr"]
        assert len(rows) == 4 and all(r[2] == "100" for r in rows)


class TestQuantumReference:
    def test_coincidence_values(self):
        assert qm_coincidence(0.4, 0.4) == pytest.approx(0.5)
        assert qm_coincidence(0.0, math.pi / 2) == pytest.approx(0.0, abs=1e-16)
        assert qm_coincidence(math.pi / 4, 0.0) == pytest.approx(0.25)

    def test_standard_angles(self):
        assert abs(chsh_value(*STANDARD_SETTINGS.as_tuple()) - 2 * math.sqrt(2)) <= 1e-12

    def test_degenerate_angles(self):
        assert chsh_value(0.3, 0.3, 0.3, 0.3) == pytest.approx(2.0)

    def test_scan_grid(self):
        res = chsh_scan(*settings_grid(math.pi / 180))
        assert abs(res.maximum - 2 * math.sqrt(2)) <= 1e-3
        assert chsh_value(*res.argmax.as_tuple()) == pytest.approx(res.maximum)

    def test_scan_empty(self):
        with pytest.raises(InvalidParameter):
            chsh_scan(np.array([]), 0, 0, 0)

    def test_prob_form_never_exceeds_two(self):
        g = np.linspace(0, math.pi, 61)
        grid = np.meshgrid(g, g, g, g, sparse=True)
        assert prob_combination(*grid).max() <= (2 + 2 * math.sqrt(2)) / 4 + 1e-12

    def test_monte_carlo_within_four_sigma(self):
        est = qm_monte_carlo(STANDARD_SETTINGS, 10**5, seed=8)
        assert abs(est.value - 2 * math.sqrt(2)) <= 4 * est.stderr

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_correlator_from_coincidences(self, a, b):
        h = math.pi / 2
        e = (qm_coincidence(a, b) + qm_coincidence(a + h, b + h)
             - qm_coincidence(a + h, b) - qm_coincidence(a, b + h))
        assert e == pytest.approx(float(qm_correlator(a, b)), abs=1e-12)


class TestInterchangeGap:
    def test_independent_model(self):
        g = interchange_gap(INDEP, STANDARD_SETTINGS, 2 * 10**5, seed=12)
        assert abs(g.gap) <= 3 * g.stderr

    def test_dependent_model(self):
        g = interchange_gap(DEP, STANDARD_SETTINGS, 10**6, seed=13)
        oracle = interchange_gap_quadrature(DEP, STANDARD_SETTINGS)
        assert abs(g.gap) > 5 * g.stderr
        assert abs(g.gap - oracle) <= 3 * g.stderr

    def test_single_sample(self):
        g = interchange_gap(DEP, STANDARD_SETTINGS, 1, seed=0)
        assert math.isinf(g.stderr) and g.gap in (-1.0, 0.0, 1.0)

    def test_quadrature_converged(self):
        coarse = interchange_gap_quadrature(DEP, STANDARD_SETTINGS, n_lambda=18000, n_f=50000)
        fine = interchange_gap_quadrature(DEP, STANDARD_SETTINGS)
        assert abs(coarse - fine) < 5e-5

    def test_quadrature_nonnegative_integrand(self):
        # min(x, y) >= x*y on [0, 1], so the gap is never negative
        rng = np.random.default_rng(1)
        for _ in range(5):
            assert interchange_gap_quadrature(DEP, rand_settings(rng), 3600, 2000) >= 0
