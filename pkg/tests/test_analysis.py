import math

import numpy as np
import pytest

import slowdecay as sd
from slowdecay.analysis import FitError, fit_slope_xy

from conftest import mode_vector


def synthetic_samples(times, norm_u, norm_pu=None, norm_qu=None):
    """EnergySample rows carrying only the fields the analysis ops read."""
    out = []
    for i, t in enumerate(times):
        u = norm_u[i]
        out.append(
            sd.EnergySample(
                t=float(t), norm_u=float(u),
                norm_Pu=float(norm_pu[i]) if norm_pu is not None else float(u),
                norm_Qu=float(norm_qu[i]) if norm_qu is not None else 0.0,
                norm_v=0.0, norm_A12u=0.0, F_pot=0.0, E0=0.0, F0=0.0,
                E_tilde=0.0, E_hat_basic=0.0, E_big=0.0, E_hat_eps=0.0,
                G=0.0, G_hat=0.0, Q_p=0.0, vu=0.0,
            )
        )
    return out


def log_times(t_end, n=200):
    return np.power(1.0 + t_end, np.arange(n) / (n - 1)) - 1.0


class TestFitSlope:
    def test_exact_power_law(self):
        t = log_times(1e4)
        fit = fit_slope_xy(t, 3.7 * (1.0 + t) ** -0.5, 1.0, 1e4)
        assert fit.exponent == pytest.approx(-0.5, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.7), abs=1e-12)

    def test_rescaling_moves_intercept_not_exponent(self):
        t = log_times(1e3)
        v = (1.0 + t) ** -0.25
        f1 = fit_slope_xy(t, v, 1.0, 1e3)
        f2 = fit_slope_xy(t, 100.0 * v, 1.0, 1e3)
        assert abs(f1.exponent - f2.exponent) < 1e-12
        assert f2.intercept - f1.intercept == pytest.approx(math.log(100.0), rel=1e-12)

    def test_constant_series(self):
        t = log_times(100.0)
        fit = fit_slope_xy(t, np.full_like(t, 2.5), 0.0, 100.0)
        assert fit.exponent == pytest.approx(0.0, abs=1e-15)
        assert fit.r_squared == 1.0

    def test_exponential_is_strongly_steeper(self):
        t = log_times(1e4)
        with np.errstate(under="ignore"):
            v = np.exp(-t / 2.0)
        fit = fit_slope_xy(t, v, 1e2, 1e4)
        assert fit.exponent < -3.0

    def test_window_and_nan_filtering(self):
        t = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
        v = np.array([1.0, np.nan, 0.5, 0.4, 0.0, 0.3, 0.25, 0.2])
        fit = fit_slope_xy(t, v, 0.0, 7.0)
        assert fit.n_points == 6  # nan and zero rows dropped

    def test_too_few_points(self):
        t = np.arange(4.0)
        with pytest.raises(FitError, match="5"):
            fit_slope_xy(t, np.ones(4), 0.0, 4.0)

    def test_series_and_mapping_access(self):
        t = log_times(100.0)
        samples = synthetic_samples(t, (1.0 + t) ** -0.5)
        f1 = sd.fit_slope(samples, "norm_u", 1.0, 100.0)
        f2 = sd.fit_slope({"t": t, "norm_u": (1.0 + t) ** -0.5}, "norm_u", 1.0, 100.0)
        assert f1.exponent == pytest.approx(f2.exponent, abs=1e-15)


class TestVerifyUpper:
    def test_zero_trajectory(self):
        t = log_times(100.0)
        rep = sd.verify_upper(synthetic_samples(t, np.zeros_like(t)), 2.0)
        assert rep.m1 == 0.0 and rep.m2 == 0.0
        assert rep.ok

    def test_power_law_plateau(self):
        t = log_times(1e4)
        rep = sd.verify_upper(synthetic_samples(t, 2.0 * (1.0 + t) ** -0.5), 2.0)
        assert rep.m2 == pytest.approx(2.0, rel=1e-12)
        assert rep.m2_plateau_ratio == pytest.approx(1.0, rel=1e-12)
        assert rep.ok

    def test_late_growth_is_flagged(self):
        t = log_times(1e4)
        rep = sd.verify_upper(synthetic_samples(t, (1.0 + t) ** -0.3), 2.0)
        # norm decays slower than t^{-1/2}: the compensated max sits at the end
        assert not rep.m2_attained_early
        assert not rep.ok


class TestOdeOracle:
    def test_zero_data_stays_zero(self):
        res = sd.ode_oracle(2.0, 0.0, 0.0, dt=0.05, t_end=10.0, sample_count=20)
        assert np.all(res.v == 0.0)
        assert np.all(np.isnan(res.v_pred))

    @pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
    @pytest.mark.parametrize("v0", [0.05, 0.1, 0.2])
    def test_dominant_balance_window(self, p, v0):
        # the bias-corrected prediction tracks v within 5% from t = 1e3 on;
        # the raw (p t)^{-1/p} asymptote needs p t >> v0^{-p}, so its 5% band
        # is checked from t0 = v0^{-p}/(0.05 p^2) onward
        t0 = v0**-p / (0.05 * p * p)
        t_end = max(1e4, 2.0 * t0)
        res = sd.ode_oracle(p, v0, 0.0, dt=0.05, t_end=t_end)
        sel = res.times >= 1e3
        ratio = res.v[sel] / res.v_pred[sel]
        assert np.all(ratio >= 0.95) and np.all(ratio <= 1.05)
        sel = res.times >= max(1e3, t0)
        compensated = res.v[sel] * (p * res.times[sel]) ** (1.0 / p)
        assert np.all(compensated >= 0.95) and np.all(compensated <= 1.05)

    def test_prediction_is_first_order_reduction_solution(self):
        res = sd.ode_oracle(2.0, 0.1, 0.0, dt=0.05, t_end=10.0, sample_count=30)
        t = res.times
        np.testing.assert_allclose(
            res.v_pred, (0.1**-2 + 2.0 * t) ** -0.5, rtol=1e-14
        )


class TestClassify:
    def test_zero_solution_inconclusive(self):
        t = log_times(1e3)
        verdict = sd.classify(synthetic_samples(t, np.zeros_like(t)), 2.0)
        assert verdict.classification is sd.Classification.INCONCLUSIVE
        assert math.isnan(verdict.fitted_norm_exponent)

    def test_slow_power_law(self):
        t = log_times(1e4)
        verdict = sd.classify(synthetic_samples(t, (1.0 + t) ** -0.5), 2.0)
        assert verdict.classification is sd.Classification.SLOW
        assert verdict.target == -0.5

    def test_exponential_is_fast(self):
        t = log_times(1e4)
        with np.errstate(under="ignore"):
            samples = synthetic_samples(t, np.exp(-t / 2.0))
        verdict = sd.classify(samples, 2.0)
        assert verdict.classification is sd.Classification.FAST

    def test_requires_two_decades(self):
        t = np.linspace(0.0, 50.0, 60)
        with pytest.raises(ValueError, match="decades"):
            sd.classify(synthetic_samples(t, (1.0 + t) ** -0.5), 2.0)

    def test_small_high_mode_neumann_exploratory(self, neumann16):
        # tiny single-mode datum in the range of A: expect fast decay
        # empirically (reported, not part of the acceptance gate)
        prob = sd.make_problem(
            neumann16, sd.local_power(2.0), mode_vector(16, 1, 1e-4), np.zeros(16)
        )
        cfg = sd.IntegratorConfig(t_end=150.0, dt=0.05, sample_count=200)
        series = sd.energy_series(sd.run(prob, cfg), 0.0, sd.max_delta(neumann16.nu))
        verdict = sd.classify(series, 2.0)
        assert verdict.classification is sd.Classification.FAST


class TestRangeDecay:
    def test_kernel_only_datum(self, neumann16):
        prob = sd.make_problem(
            neumann16, sd.local_power(2.0), mode_vector(16, 0, 0.1), np.zeros(16)
        )
        cfg = sd.IntegratorConfig(t_end=200.0, dt=0.05, sample_count=100)
        series = sd.energy_series(sd.run(prob, cfg), 0.0, sd.max_delta(neumann16.nu))
        rep = sd.verify_range_decay(series, 2.0, neumann16.nu)
        assert rep.pointwise_ok
        # constants are invariant: the range component never turns on
        assert max(s.norm_Qu for s in series) < 1e-12

    def test_eigenvalue_inequality_random_states(self, neumann16):
        rng = np.random.default_rng(21)
        samples = [
            sd.sample_energies(
                neumann16, sd.norm_power(2.0),
                sd.State(float(i), rng.standard_normal(16), rng.standard_normal(16)),
                eps=0.0, delta=0.3,
            )
            for i in range(10)
        ]
        rep = sd.verify_range_decay(samples, 2.0, neumann16.nu, window=(0.0, 10.0))
        assert rep.pointwise_ok

    def test_synthetic_slope_gap(self):
        t = log_times(1e4)
        samples = synthetic_samples(
            t, (1.0 + t) ** -0.5,
            norm_pu=(1.0 + t) ** -0.5, norm_qu=0.1 * (1.0 + t) ** -1.0,
        )
        rep = sd.verify_range_decay(samples, 2.0, 1.0)
        assert rep.gap_ok
        assert rep.slope_Qu == pytest.approx(-1.0, abs=1e-10)
