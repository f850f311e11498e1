"""Shared fixtures: synthetic datasets and gradient-check helpers."""

from __future__ import annotations

from datetime import date

import numpy as np
import pytest

from stockgan import arima as arima_mod
from stockgan import spectral
from stockgan.evaluate import ExperimentData
from stockgan.gan import DiscriminatorConfig, GeneratorConfig, TrainConfig
from stockgan.indicators import build_feature_matrix
from stockgan.ingest import PriceSeries, split_train_test
from stockgan.latent import select_top_confidence, standardize
from stockgan.sentiment import SentenceSentiment
from stockgan.synthetic import TICKERS, make_sine_series

ARIMA_ORDER = arima_mod.ArimaSpec(p=5, d=1, q=0)


# ----------------------------------------------------------------------
# gradient checking

def numeric_gradient(f, param, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of the scalar f() w.r.t. param.data."""
    grad = np.zeros_like(param.data)
    flat_p = param.data.ravel()
    flat_g = grad.ravel()
    for i in range(flat_p.size):
        orig = flat_p[i]
        flat_p[i] = orig + eps
        hi = f().item()
        flat_p[i] = orig - eps
        lo = f().item()
        flat_p[i] = orig
        flat_g[i] = (hi - lo) / (2 * eps)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    denom = max(np.linalg.norm(a.ravel()), np.linalg.norm(b.ravel()), 1e-12)
    return float(np.linalg.norm((a - b).ravel()) / denom)


def gradient_check(f, params, eps: float = 1e-5) -> float:
    """Max relative error between backprop and finite differences."""
    for p in params:
        p.zero_grad()
    f().backward()
    worst = 0.0
    for p in params:
        analytic = p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(f, p, eps)
        worst = max(worst, relative_error(analytic, numeric))
    return worst


# ----------------------------------------------------------------------
# synthetic experiment bundles

def build_feature_inputs(series_map: dict[str, PriceSeries], cutoff: date):
    """Per-ticker spectral/ARIMA feature arrays plus the training-span fits."""
    spectral_feats, arima_feats, fits = {}, {}, {}
    for ticker, s in series_map.items():
        train_part, _ = split_train_test(s, cutoff)
        fit = arima_mod.fit_ar(np.array(train_part.closes), ARIMA_ORDER)
        closes = np.array(s.closes)
        spectral_feats[ticker] = spectral.trailing_reconstruction_features(closes)
        feats = arima_mod.rolling_correlation_features(closes)
        feats["arima_forecast_1d"] = arima_mod.one_step_forecasts(fit, closes)
        arima_feats[ticker] = feats
        fits[ticker] = fit
    return spectral_feats, arima_feats, fits


def fake_sentiments(n: int, seed: int = 3) -> list[SentenceSentiment]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        out.append(
            SentenceSentiment(
                label=int(rng.choice([-1, 0, 1])),
                confidence=float(rng.uniform(0.34, 0.99)),
                doc_id=f"doc{i:04d}",
                sentence_index=int(rng.integers(0, 5)),
            )
        )
    return out


def build_experiment(
    n_days: int = 160,
    cutoff_index: int = 120,
    seed: int = 7,
    hidden: int = 8,
    epochs: int = 2,
    conv_channels: tuple[int, int, int] = (4, 6, 8),
    dense_hidden: int = 8,
    noise: float = 0.3,
) -> ExperimentData:
    """A small 8-ticker sine-world ExperimentData for training-level tests."""
    series_map = {
        t: make_sine_series(t, n_days=n_days, seed=seed, noise=noise)
        for t in TICKERS
    }
    any_series = series_map[TICKERS[0]]
    cutoff = any_series.dates[cutoff_index]
    spectral_feats, arima_feats, fits = build_feature_inputs(series_map, cutoff)
    matrix = build_feature_matrix(list(series_map.values()), spectral_feats, arima_feats)

    train_rows = [i for i, d in enumerate(matrix.dates) if d <= cutoff]
    train_matrix = type(matrix)(
        dates=tuple(matrix.dates[i] for i in train_rows),
        rows=matrix.rows[train_rows],
        feature_names=matrix.feature_names,
    )
    train_series, test_series = {}, {}
    for ticker, s in series_map.items():
        train_series[ticker], test_series[ticker] = split_train_test(s, cutoff)

    latent_seed = standardize(select_top_confidence(fake_sentiments(130, seed)))
    rng = np.random.default_rng(seed + 5)
    sentiment_days = {
        d: float(rng.uniform(-0.5, 0.5)) for d in any_series.dates[::3]
    }
    return ExperimentData(
        target="BA",
        train_series=train_series,
        test_series=test_series,
        train_features=train_matrix,
        arima_fits=fits,
        latent=latent_seed,
        daily_sentiment=sentiment_days,
        gen_config=GeneratorConfig(input_features=128, hidden=hidden,
                                   sequence_length=30),
        disc_config=DiscriminatorConfig(conv_channels=conv_channels,
                                        dense_hidden=dense_hidden),
        train_config=TrainConfig(epochs=epochs, seed=seed, checkpoint_interval=50),
    )


@pytest.fixture(scope="session")
def tiny_experiment() -> ExperimentData:
    return build_experiment()


@pytest.fixture(scope="session")
def fixtures_dir(tmp_path_factory) -> "Path":
    """Small generated fixture tree for ingest/CLI tests."""
    from pathlib import Path
    from stockgan.synthetic import write_fixtures

    root = tmp_path_factory.mktemp("fixtures")
    write_fixtures(root, seed=7)
    return Path(root)
