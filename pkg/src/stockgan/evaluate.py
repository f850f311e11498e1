"""Metrics, baseline models, and the horizon-by-model experiment grid.

Baselines: a GAN with a random-normal latent instead of the sentiment seed,
the generator network trained supervised (FC-LSTM), the AR(5) model on first
differences, and a least-squares map from daily mean sentiment to next-day
returns integrated into a price path.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from . import arima as arima_mod
from .errors import MissingArtifactError, ValidationError
from .gan import (
    DiscriminatorConfig,
    GanModel,
    GeneratorConfig,
    TrainConfig,
    forecast_horizon,
    train,
    train_supervised,
)
from .indicators import FeatureMatrix
from .ingest import PriceSeries
from .latent import LatentSeed

BASELINES = ("gan_random_latent", "fc_lstm", "arima510", "sentiment_only")
MAIN_MODEL = "sentiment_gan"


def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """sqrt(mean squared error); symmetric in its arguments."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValidationError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValidationError("rmse of empty arrays")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def nrmse(rmse_val: float, truth: np.ndarray) -> float:
    """RMSE divided by the mean of the ground truth window."""
    ybar = float(np.mean(np.asarray(truth, dtype=float)))
    if ybar == 0.0:
        raise ValidationError("nrmse undefined for zero-mean truth")
    return rmse_val / ybar


@dataclass(frozen=True)
class ForecastRun:
    """One model evaluated at one horizon."""

    model: str
    ticker: str
    horizon: int
    predicted: np.ndarray
    truth: np.ndarray
    rmse: float
    nrmse: float

    def __post_init__(self) -> None:
        if len(self.predicted) != self.horizon or len(self.truth) != self.horizon:
            raise ValidationError("predicted/truth lengths must equal the horizon")


def make_run(model: str, ticker: str, horizon: int,
             predicted: np.ndarray, truth: np.ndarray) -> ForecastRun:
    err = rmse(predicted, truth)
    return ForecastRun(
        model=model,
        ticker=ticker,
        horizon=horizon,
        predicted=np.asarray(predicted, dtype=float),
        truth=np.asarray(truth, dtype=float),
        rmse=err,
        nrmse=nrmse(err, truth),
    )


@dataclass
class ExperimentData:
    """Everything the grid needs, prepared once per run."""

    target: str
    train_series: dict[str, PriceSeries]
    test_series: dict[str, PriceSeries]
    train_features: FeatureMatrix
    arima_fits: dict[str, arima_mod.ArimaFit]
    latent: LatentSeed
    daily_sentiment: dict[date, float]
    gen_config: GeneratorConfig
    disc_config: DiscriminatorConfig
    train_config: TrainConfig
    main_model: GanModel | None = None
    model_cache: dict[str, GanModel] = field(default_factory=dict)


def _truth_window(data: ExperimentData, horizon: int) -> np.ndarray:
    test = data.test_series[data.target]
    if len(test) < horizon:
        raise ValidationError(
            f"test span has {len(test)} days, horizon {horizon} requested"
        )
    return np.array(test.closes[:horizon])


def _test_dates(data: ExperimentData, horizon: int) -> list[date]:
    return data.test_series[data.target].dates[:horizon]


def _trained_gan(data: ExperimentData, name: str) -> GanModel:
    """Train (or fetch from cache) one of the GAN-architecture models."""
    if name in data.model_cache:
        return data.model_cache[name]
    target_series = data.train_series[data.target]
    if name == MAIN_MODEL:
        if data.main_model is not None:
            data.model_cache[name] = data.main_model
            return data.main_model
        latent_values = data.latent.values
        model = GanModel(data.gen_config, data.disc_config, latent_values,
                         seed=data.train_config.seed)
        train(model, data.train_features, target_series, data.train_config)
    elif name == "gan_random_latent":
        rng = np.random.default_rng(data.train_config.seed + 1)
        latent_values = rng.standard_normal(data.gen_config.latent_dim)
        model = GanModel(data.gen_config, data.disc_config, latent_values,
                         seed=data.train_config.seed)
        train(model, data.train_features, target_series, data.train_config)
    elif name == "fc_lstm":
        latent_values = np.zeros(data.gen_config.latent_dim)
        model = GanModel(data.gen_config, data.disc_config, latent_values,
                         seed=data.train_config.seed)
        train_supervised(model, data.train_features, target_series,
                         data.train_config)
    else:
        raise ValidationError(f"not a trainable GAN model: {name}")
    model.arima_fit = data.arima_fits[data.target]
    data.model_cache[name] = model
    return model


def _sentiment_regression(data: ExperimentData) -> tuple[float, float]:
    """Least-squares fit of next-day return on daily mean sentiment."""
    series = data.train_series[data.target]
    closes = np.array(series.closes)
    days = series.dates
    s = np.array([data.daily_sentiment.get(d, 0.0) for d in days[:-1]])
    r = closes[1:] / closes[:-1] - 1.0
    design = np.column_stack([np.ones_like(s), s])
    coef, *_ = np.linalg.lstsq(design, r, rcond=None)
    return float(coef[0]), float(coef[1])


def run_baseline(name: str, data: ExperimentData, horizon: int) -> ForecastRun:
    """Evaluate one named baseline at one horizon."""
    truth = _truth_window(data, horizon)
    target_series = data.train_series[data.target]
    if name in ("gan_random_latent", "fc_lstm"):
        model = _trained_gan(data, name)
        preds = forecast_horizon(model, data.train_features, target_series, horizon)
    elif name == "arima510":
        fit = data.arima_fits[data.target]
        preds = arima_mod.forecast(fit, np.array(target_series.closes), horizon)
    elif name == "sentiment_only":
        a, b = _sentiment_regression(data)
        # return for forecast day k is driven by the previous day's sentiment
        prev_days = [target_series.dates[-1]] + _test_dates(data, horizon)[:-1]
        price = target_series.closes[-1]
        preds = []
        for d in prev_days:
            price = price * (1.0 + a + b * data.daily_sentiment.get(d, 0.0))
            preds.append(price)
        preds = np.array(preds)
    else:
        raise ValidationError(f"unknown baseline {name!r}")
    return make_run(name, data.target, horizon, preds, truth)


def run_model(name: str, data: ExperimentData, horizon: int) -> ForecastRun:
    """Evaluate the main model or any baseline at one horizon."""
    if name == MAIN_MODEL:
        model = _trained_gan(data, name)
        preds = forecast_horizon(
            model, data.train_features, data.train_series[data.target], horizon
        )
        return make_run(name, data.target, horizon, preds,
                        _truth_window(data, horizon))
    return run_baseline(name, data, horizon)


def experiment_grid(
    models: list[str],
    horizons: list[int],
    data: ExperimentData,
    out_dir: str | Path | None = None,
    config_hash: str = "",
) -> list[ForecastRun]:
    """Run every model at every horizon; emit the report table and plot data."""
    runs = [run_model(m, data, n) for m in models for n in horizons]
    if out_dir is not None:
        write_report(runs, data, Path(out_dir), config_hash)
    return runs


def write_report(runs: list[ForecastRun], data: ExperimentData,
                 out_dir: Path, config_hash: str = "") -> None:
    reports = out_dir / "reports"
    plots = out_dir / "plots"
    reports.mkdir(parents=True, exist_ok=True)
    plots.mkdir(parents=True, exist_ok=True)

    with (reports / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "model", "N", "value"])
        for metric in ("rmse", "nrmse"):
            for run in runs:
                writer.writerow(
                    [metric, run.model, run.horizon, repr(getattr(run, metric))]
                )

    payload = {
        "config_hash": config_hash,
        "seed": data.train_config.seed,
        "target": data.target,
        "notes": {
            "sentiment_only": "least-squares map from daily mean sentiment to "
                              "next-day return, integrated from the last known price",
        },
        "runs": [
            {
                "model": r.model,
                "N": r.horizon,
                "rmse": r.rmse,
                "nrmse": r.nrmse,
                "ybar": float(np.mean(r.truth)),
            }
            for r in runs
        ],
    }
    (reports / "report.json").write_text(json.dumps(payload, indent=2),
                                         encoding="utf-8")

    for run in runs:
        dates = _test_dates(data, run.horizon)
        with (plots / f"{run.model}_n{run.horizon}.csv").open(
            "w", newline="", encoding="utf-8"
        ) as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "truth", "prediction"])
            for d, t, p in zip(dates, run.truth, run.predicted):
                writer.writerow([d.isoformat(), repr(float(t)), repr(float(p))])
