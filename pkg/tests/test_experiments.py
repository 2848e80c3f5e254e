"""Verification-harness behavior on oracles, nulls, and small runs."""

from dataclasses import replace

import numpy as np
import pytest

from slowfast_spde.errors import ConfigError
from slowfast_spde.experiments import (RateTarget, aux_fast_error,
                                       averaged_drift_holder,
                                       contraction_test, correlation_decay,
                                       ergodic_consistency, increment_scaling,
                                       moment_sweep, rate_fit, strong_error)
from slowfast_spde.averaging import AveragingParams
from slowfast_spde.model import heat_example
from slowfast_spde.noise import NoiseSpectrum
from slowfast_spde.simulate import StepScheme
from slowfast_spde.spectral import coeffs_to_grid_values, grid_values_to_coeffs


@pytest.fixture(scope="module")
def heat():
    return heat_example(0.1, 0.1, 32)


def zero_drift(xg, yg):
    return np.zeros_like(xg)


class TestRateFit:
    def test_exact_power(self):
        x = np.array([0.1, 0.2, 0.4, 0.8])
        fit = rate_fit(x, x**2)
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.ci <= 1e-12

    def test_constant_data(self):
        x = np.array([0.1, 0.2, 0.4, 0.8])
        fit = rate_fit(x, np.full(4, 3.0))
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_sqrt_recovers_half(self):
        rng = np.random.default_rng(0)
        x = np.array([0.05, 0.1, 0.2, 0.4, 0.8, 1.6])
        y = x**0.5 * (1.0 + 0.05 * rng.standard_normal(6))
        fit = rate_fit(x, y, 0.05 * y)
        assert 0.4 <= fit.slope <= 0.6

    def test_nonpositive_point_dropped_with_warning(self):
        x = np.array([0.1, 0.2, 0.4, 0.8])
        y = np.array([0.01, 0.04, -1.0, 0.64])
        with pytest.warns(UserWarning, match="dropped"):
            fit = rate_fit(x, y)
        assert fit.n_dropped == 1 and fit.n_used == 3

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            rate_fit([0.1, 0.2], [1.0, 2.0])


class TestRateTarget:
    def test_heat_exponent(self):
        rt = RateTarget(theta=0.55, alpha=0.5, beta=0.5, gamma=0.5)
        assert rt.rough_index == 0.25
        assert rt.exponent == pytest.approx(0.1375 / 1.1375)

    def test_delta_rule_between_eps_and_one(self):
        rt = RateTarget(theta=0.55, alpha=0.5, beta=0.5, gamma=0.5)
        for eps in (1e-1, 1e-2, 1e-3):
            d = rt.delta_rule(eps)
            assert eps < d < 1.0

    def test_theta_validated(self):
        with pytest.raises(ConfigError):
            RateTarget(theta=1.2, alpha=0.5, beta=0.5, gamma=0.5)


class TestIncrementScaling:
    def test_deterministic_linear_system(self, heat):
        # B == 0, q == 0, x0 = e_1: X_t = e^{tA} e_1; the integral of
        # squared increments is smooth in delta, slope ~ 2 >= 1 > theta
        det = replace(heat, drift_b=zero_drift, drift_f=zero_drift,
                      q1=NoiseSpectrum(np.zeros(32)),
                      q2=NoiseSpectrum(np.zeros(32)))
        e1 = np.eye(32)[0]
        deltas = [2.0**-k for k in range(4, 9)]
        rep = increment_scaling(det, 0.1, deltas, 1.0, StepScheme(2.0**-10),
                                n_mc=4, seed=1, theta=0.55, x0=e1)
        assert rep.slope >= 1.0
        # oracle: same discrete integral from the analytic path
        times = np.arange(2**10 + 1) * 2.0**-10
        lam = det.eigs.eigenvalues[:, None]
        path = np.exp(-lam * times).T  # (S+1, 32) coefficients of e^{tA}e1
        path = path * e1  # only mode 1 active
        idx = np.arange(2**10 + 1)
        for d, est in zip(deltas, rep.estimates):
            block = int(round(d / 2.0**-10))
            frozen = path[(idx // block) * block]
            oracle = 2.0**-10 * np.sum(np.sum((path - frozen) ** 2, axis=-1))
            assert est == pytest.approx(oracle, rel=1e-10)

    def test_monotone_in_delta_and_passes(self, heat):
        deltas = [2.0**-k for k in range(4, 9)]
        rep = increment_scaling(heat, 1e-2, deltas, 1.0, StepScheme(2.0**-10),
                                n_mc=32, seed=2, theta=0.55)
        assert rep.verdict == "pass"
        assert rep.slope - rep.slope_ci >= 0.8 * 0.55
        # finest delta gives the smallest integral; monotone across grid
        assert all(a > b for a, b in zip(rep.estimates, rep.estimates[1:]))

    def test_misaligned_delta_rejected(self, heat):
        with pytest.raises(ConfigError):
            increment_scaling(heat, 1e-2, [0.015], 0.1, StepScheme(1e-2),
                              n_mc=2, seed=3)


class TestContraction:
    def test_heat_pathwise_bound(self, heat):
        rep = contraction_test(heat, (1.0, 2.0, 4.0), 0.01, n_mc=50, seed=4)
        assert rep.verdict == "pass"
        assert rep.extra["violations"] == 0
        # the mean-square decay beats the guaranteed rate
        assert rep.slope >= heat.spectral_gap

    def test_linear_case_exact_rate(self, heat):
        # F == 0: mode k of dY decays exactly at rate 2*lambda_k, so the
        # squared distance contracts at least at 2*lambda_1 (equality once
        # the higher modes are dead), far faster than the guaranteed gap
        cfg = replace(heat, drift_f=zero_drift)
        rep = contraction_test(cfg, (0.5, 1.0, 2.0), 0.01, n_mc=20, seed=5)
        assert rep.extra["violations"] == 0
        assert 2.0 * cfg.eigs.lambda_1 - 1e-6 <= rep.slope <= 2.2
        # every mode decays at least at 2*lambda_1 on the squared norm
        for t, worst in zip(rep.grid, rep.extra["worst_ratio"]):
            assert worst <= np.exp(-2.0 * cfg.eigs.lambda_1 * t) * (1 + 1e-12)

    def test_x_offset_plateau_constant_stable(self, heat):
        rep = contraction_test(heat, (1.0, 2.0, 4.0), 0.02, n_mc=32, seed=6,
                               x_offset_scales=(0.25, 0.5, 1.0))
        assert rep.extra["plateau_constant_spread"] < 4.0
        assert rep.verdict == "pass"


class TestAuxFastError:
    def test_slope_meets_target(self, heat):
        deltas = [2.0**-k for k in range(4, 9)]
        rep = aux_fast_error(heat, 1e-2, deltas, 1.0, StepScheme(2.0**-10),
                             n_mc=16, seed=7, theta=0.55)
        assert rep.verdict == "pass"
        assert rep.slope - rep.slope_ci >= 0.8 * 0.55 * heat.gamma

    def test_error_grows_with_delta(self, heat):
        deltas = [2.0**-k for k in range(5, 8)]
        rep = aux_fast_error(heat, 1e-2, deltas, 0.5, StepScheme(2.0**-10),
                             n_mc=8, seed=8, theta=0.55)
        assert rep.estimates[0] > rep.estimates[-1] > 0

    def test_null_model_identically_zero(self, heat):
        cfg = replace(heat, drift_f=lambda xg, yg: 0.5 * np.cos(np.abs(yg)))
        rep = aux_fast_error(cfg, 1e-2, [2.0**-k for k in range(4, 7)], 0.25,
                             StepScheme(2.0**-10), n_mc=4, seed=9)
        assert max(rep.estimates) == 0.0
        assert rep.verdict == "pass"


class TestCorrelationDecay:
    def test_rate_meets_bound(self, heat):
        rep = correlation_decay(heat, np.zeros(32), lag_max=16.0, n_mc=64,
                                seed=10)
        assert rep.verdict == "pass"
        assert rep.estimates[0] > 0  # lag-0 stationary variance
        assert rep.slope >= rep.target - rep.slope_ci

    def test_y_independent_drift_zero_covariance(self, heat):
        cfg = replace(heat, drift_b=lambda xg, yg: np.sin(np.sqrt(np.abs(xg))))
        rep = correlation_decay(cfg, np.zeros(32), lag_max=8.0, n_mc=16,
                                seed=11, window=16.0)
        assert max(abs(e) for e in rep.estimates) < 1e-12
        assert rep.verdict == "inconclusive"  # no decaying signal to fit


class TestMomentSweep:
    def test_uniform_fast_moments(self, heat):
        rep = moment_sweep(heat, (1e-1, 1e-2, 1e-3), 0.5, StepScheme(2e-3),
                           n_mc=64, seed=12)
        assert rep.verdict == "pass"
        assert rep.extra["spread_y"] < 0.2

    def test_initial_state_scaling(self, heat, rng):
        # sup_t E|Y|^2 <= C (1 + |y0|^2): doubling |y0| at most quadruples
        # the normalized constant
        y0 = rng.standard_normal(32)
        y0 *= 1.5 / np.linalg.norm(y0)
        consts = []
        for scale in (1.0, 2.0):
            rep = moment_sweep(heat, (1e-2,), 0.5, StepScheme(2e-3), n_mc=32,
                               seed=14, y0=scale * y0)
            norm2 = 1.0 + np.sum((scale * y0) ** 2)
            consts.append(max(rep.estimates) / norm2)
        assert consts[1] <= 4.0 * consts[0]

    def test_quiet_system_decays(self, heat, rng):
        from slowfast_spde.noise import derive_substream
        from slowfast_spde.simulate import simulate_slow_fast

        quiet = replace(heat, drift_b=zero_drift, drift_f=zero_drift,
                        q1=NoiseSpectrum(np.zeros(32)),
                        q2=NoiseSpectrum(np.zeros(32)))
        x0 = rng.standard_normal(32)
        w1 = derive_substream(13, 0, "W1", 32)
        w2 = derive_substream(13, 0, "W2", 32)
        xs, ys = simulate_slow_fast(quiet, 1e-1, x0, x0, 0.25,
                                    StepScheme(2e-3), w1, w2)
        for traj in (xs, ys):
            m2 = np.sum(traj.states**2, axis=-1)
            assert np.all(np.diff(m2) < 0.0)
            assert m2[0] == pytest.approx(np.sum(x0**2))


class TestStrongError:
    def test_decoupled_null_zero_error(self, heat):
        def b_null(xg, yg):
            return np.sin(np.sqrt(np.abs(xg)))

        cfg = replace(heat, drift_b=b_null)

        def bbar_exact(x):
            xg = coeffs_to_grid_values(x, cfg.m_points)
            return grid_values_to_coeffs(b_null(xg, xg), 32)

        rep = strong_error(cfg, [1e-1, 1e-2], 0.25, StepScheme(2e-3),
                           n_mc=8, seed=14, oracle=bbar_exact)
        assert max(rep.estimates) == 0.0
        assert rep.verdict == "pass"

    def test_small_run_monotone_and_positive_slope(self, heat):
        params = AveragingParams(t_burn=8.0, t_avg=16.0, dt=0.1, n_replicas=2)
        rep = strong_error(heat, [1e-1, 3e-2, 1e-2], 0.5, StepScheme(4e-3),
                           n_mc=32, seed=15, oracle_params=params)
        assert rep.verdict == "pass"
        assert rep.slope - rep.slope_ci > 0
        for d in rep.extra["paired_differences"]:
            assert d["mean_diff"] > -1.96 * d["stderr"]


class TestErgodicAndHolder:
    def test_ergodic_consistency_small(self, heat):
        params = AveragingParams(t_burn=12.0, t_avg=32.0, dt=0.02, n_replicas=4)
        rep = ergodic_consistency(heat, params, seed=16, mixing_horizon=16.0,
                                  mixing_replicas=128)
        assert rep.verdict == "pass"
        assert rep.extra["difference"] <= 3.0 * rep.extra["combined_stderr"]

    def test_holder_quotient_small(self, heat):
        params = AveragingParams(t_burn=12.0, t_avg=32.0, dt=0.05, n_replicas=2)
        rep = averaged_drift_holder(heat, n_pairs=40, params=params, seed=17)
        assert np.isfinite(rep.estimates[1])
        assert rep.estimates[1] < 3.0  # bounded quotient
