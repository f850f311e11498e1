"""Differencing, ACF/PACF, conditional-least-squares fitting, forecasting."""

import numpy as np
import pytest

from stockgan.arima import (
    ArimaFit,
    ArimaSpec,
    acf,
    difference,
    fit_ar,
    forecast,
    one_step_forecasts,
    pacf,
    rolling_correlation_features,
)
from stockgan.errors import ValidationError


def simulate_ar(phi, n, seed, sigma=1.0, burn=500):
    """Independent AR simulator used as the estimation oracle."""
    phi = np.asarray(phi, dtype=float)
    rng = np.random.default_rng(seed)
    p = len(phi)
    x = np.zeros(n + burn)
    eps = rng.normal(0, sigma, size=n + burn)
    for t in range(p, n + burn):
        x[t] = phi @ x[t - p: t][::-1] + eps[t]
    return x[burn:]


class TestDifference:
    def test_identity_at_zero(self):
        x = np.array([3.0, 1.0, 4.0])
        assert np.array_equal(difference(x, 0), x)

    def test_hand_example(self):
        assert np.array_equal(difference([1.0, 3.0, 6.0, 10.0], 1), [2, 3, 4])

    def test_linear_becomes_constant(self):
        x = 2.5 * np.arange(20) + 1.0
        assert np.allclose(difference(x, 1), 2.5)

    def test_too_short(self):
        with pytest.raises(ValidationError):
            difference([1.0], 1)

    def test_cumsum_inverts(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=50)
        dx = difference(x, 1)
        assert np.allclose(x, np.concatenate([[x[0]], x[0] + np.cumsum(dx)]))


class TestAcf:
    def test_lag_zero_is_one(self):
        rng = np.random.default_rng(1)
        assert acf(rng.normal(size=100), 5)[0] == 1.0

    def test_alternating_series(self):
        x = np.array([1.0, -1.0] * 500)
        rho = acf(x, 1)
        assert rho[1] < -0.99

    def test_white_noise_near_zero(self):
        rng = np.random.default_rng(77)
        rho = acf(rng.normal(size=10000), 1)
        assert abs(rho[1]) < 0.05

    def test_constant_raises(self):
        with pytest.raises(ValidationError, match="zero variance"):
            acf(np.full(50, 3.3), 2)

    def test_bounded_and_reversal_symmetric(self):
        rng = np.random.default_rng(13)
        x = np.cumsum(rng.normal(size=400))
        rho = acf(x, 10)
        assert np.all(np.abs(rho) <= 1.0 + 1e-12)
        assert np.allclose(rho, acf(x[::-1], 10), atol=1e-12)


class TestPacf:
    def test_ar1_signature(self):
        x = simulate_ar([0.5], 10000, seed=21)
        out = pacf(x, 5)
        assert abs(out[1] - 0.5) < 0.05
        assert np.max(np.abs(out[2:])) < 0.05

    def test_lag_one_equals_acf(self):
        rng = np.random.default_rng(3)
        x = np.cumsum(rng.normal(size=300))
        assert pacf(x, 4)[1] == acf(x, 4)[1]

    def test_white_noise(self):
        rng = np.random.default_rng(14)
        out = pacf(rng.normal(size=10000), 5)
        assert np.max(np.abs(out[1:])) < 0.05


class TestFitAr:
    def test_ar1_recovery(self):
        x = simulate_ar([0.5], 10000, seed=8)
        fit = fit_ar(x, ArimaSpec(p=1, d=0))
        assert 0.45 <= fit.phi[0] <= 0.55

    def test_ar5_recovery_after_integration(self):
        phi = np.array([0.35, 0.2, -0.15, 0.1, -0.05])
        z = simulate_ar(phi, 10000, seed=15)
        x = 100.0 + np.cumsum(z)  # integrate so d=1 recovers the AR signal
        fit = fit_ar(x, ArimaSpec(p=5, d=1))
        assert np.max(np.abs(fit.phi - phi)) < 0.1

    def test_exact_noiseless_ar2(self):
        phi = np.array([0.6, -0.3])
        x = np.zeros(200)
        x[0], x[1] = 1.0, 0.5
        for t in range(2, 200):
            x[t] = phi[0] * x[t - 1] + phi[1] * x[t - 2]
        fit = fit_ar(x, ArimaSpec(p=2, d=0))
        assert np.max(np.abs(fit.phi - phi)) < 1e-8
        assert abs(fit.intercept) < 1e-8

    def test_singular_design(self):
        with pytest.raises(ValidationError, match="singular"):
            fit_ar(np.arange(100.0), ArimaSpec(p=2, d=1))

    def test_residual_orthogonality(self):
        x = simulate_ar([0.4, 0.2], 2000, seed=30)
        spec = ArimaSpec(p=2, d=0)
        fit = fit_ar(x, spec)
        rows = len(x) - 2
        design = np.ones((rows, 3))
        design[:, 1] = x[1:-1]
        design[:, 2] = x[:-2]
        target = x[2:]
        residual = target - design @ np.concatenate([[fit.intercept], fit.phi])
        assert np.max(np.abs(design.T @ residual)) / rows < 1e-8

    def test_too_short(self):
        with pytest.raises(ValidationError):
            fit_ar(np.arange(30.0), ArimaSpec(p=5, d=1))


class TestForecast:
    def test_random_walk_degenerate_is_flat(self):
        fit = ArimaFit(ArimaSpec(p=2, d=1), phi=np.zeros(2), intercept=0.0,
                       sigma2=1.0)
        out = forecast(fit, [5.0, 7.0, 6.0, 6.5], steps=4)
        assert np.allclose(out, 6.5)

    def test_hand_recursion_six_points(self):
        fit = ArimaFit(ArimaSpec(p=2, d=1), phi=np.array([0.5, 0.25]),
                       intercept=0.1, sigma2=1.0)
        history = [10.0, 11.0, 10.5, 11.5, 12.0, 12.25]
        # diffs: [1, -0.5, 1, 0.5, 0.25]
        step1 = 0.1 + 0.5 * 0.25 + 0.25 * 0.5
        expected1 = 12.25 + step1
        out = forecast(fit, history, steps=2)
        assert abs(out[0] - expected1) < 1e-12
        step2 = 0.1 + 0.5 * step1 + 0.25 * 0.25
        assert abs(out[1] - (expected1 + step2)) < 1e-12

    def test_two_step_consistency(self):
        fit = ArimaFit(ArimaSpec(p=3, d=1), phi=np.array([0.3, -0.1, 0.05]),
                       intercept=0.02, sigma2=1.0)
        history = np.array([4.0, 4.5, 4.2, 4.8, 5.0, 5.1, 5.3])
        two = forecast(fit, history, steps=2)
        one = forecast(fit, history, steps=1)
        extended = np.concatenate([history, one])
        again = forecast(fit, extended, steps=1)
        assert abs(two[0] - one[0]) < 1e-12
        assert abs(two[1] - again[0]) < 1e-12

    def test_zero_steps(self):
        fit = ArimaFit(ArimaSpec(p=1, d=0), phi=np.array([0.5]), intercept=0.0,
                       sigma2=1.0)
        assert forecast(fit, [1.0, 2.0], steps=0).size == 0

    def test_history_too_short(self):
        fit = ArimaFit(ArimaSpec(p=5, d=1), phi=np.zeros(5), intercept=0.0,
                       sigma2=1.0)
        with pytest.raises(ValidationError):
            forecast(fit, [1.0, 2.0], steps=1)


class TestFeatureHelpers:
    def test_one_step_matches_forecast(self):
        rng = np.random.default_rng(9)
        x = 50 + np.cumsum(rng.normal(size=120))
        fit = fit_ar(x, ArimaSpec(p=5, d=1))
        vals = one_step_forecasts(fit, x)
        assert np.all(np.isnan(vals[:6]))
        for t in (6, 30, 119):
            assert abs(vals[t] - forecast(fit, x[: t + 1], 1)[0]) < 1e-12

    def test_rolling_acf_window(self):
        rng = np.random.default_rng(10)
        x = np.cumsum(rng.normal(size=60))
        feats = rolling_correlation_features(x, window=21)
        assert np.all(np.isnan(feats["acf_lag1"][:20]))
        t = 40
        assert feats["acf_lag1"][t] == acf(x[t - 20: t + 1], 1)[1]
        assert feats["pacf_lag1"][t] == feats["acf_lag1"][t]

    def test_rolling_acf_constant_window_is_zero(self):
        x = np.concatenate([np.full(30, 5.0), np.arange(10.0)])
        feats = rolling_correlation_features(x, window=21)
        assert feats["acf_lag1"][25] == 0.0

    def test_fit_json_round_trip(self, tmp_path):
        x = simulate_ar([0.3], 500, seed=2)
        fit = fit_ar(100 + np.cumsum(x), ArimaSpec(p=5, d=1))
        path = tmp_path / "fit.json"
        fit.to_json(path)
        loaded = ArimaFit.from_json(path)
        assert loaded.spec == fit.spec
        assert np.array_equal(loaded.phi, fit.phi)
        assert loaded.intercept == fit.intercept
        assert loaded.sigma2 == fit.sigma2
