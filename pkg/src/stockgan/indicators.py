"""Technical indicators and assembly of the 128-wide daily feature matrix."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .ingest import PriceSeries

# Per-ticker feature catalog, fixed order. 16 features x 8 tickers = 128 columns.
FEATURE_CATALOG = [
    "close",
    "adj_close",
    "volume",
    "log_return",
    "sma7",
    "sma21",
    "ema12",
    "ema26",
    "macd",
    "bollinger_upper",
    "bollinger_lower",
    "fourier_recon_k3",
    "fourier_recon_k9",
    "arima_forecast_1d",
    "acf_lag1",
    "pacf_lag1",
]

VOLUME_SCALE = 1e-6  # keeps volume magnitudes commensurate with prices


@dataclass(frozen=True)
class IndicatorSeries:
    """Named indicator values, defined from ``warmup`` days into the source."""

    name: str
    dates: tuple[date, ...]
    values: np.ndarray
    warmup: int

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.values):
            raise ValidationError(f"{self.name}: dates/values length mismatch")


def sma(close: PriceSeries, window: int) -> IndicatorSeries:
    """Simple moving average over the trailing ``window`` days."""
    if window < 1:
        raise ValidationError("sma window must be >= 1")
    if window > len(close):
        raise ValidationError(
            f"sma window {window} exceeds series length {len(close)}"
        )
    x = np.asarray(close.closes, dtype=float)
    kernel = np.ones(window) / window
    vals = np.convolve(x, kernel, mode="valid")
    return IndicatorSeries(
        name=f"sma{window}",
        dates=tuple(close.dates[window - 1:]),
        values=vals,
        warmup=window - 1,
    )


def ema(close: PriceSeries, period: int) -> IndicatorSeries:
    """Exponential moving average with k = 2/(period+1), seeded at the first price."""
    if period < 1:
        raise ValidationError("ema period must be >= 1")
    if len(close) == 0:
        raise ValidationError("ema of empty series")
    x = np.asarray(close.closes, dtype=float)
    vals = ema_values(x, period)
    return IndicatorSeries(
        name=f"ema{period}", dates=tuple(close.dates), values=vals, warmup=0
    )


def ema_values(x: np.ndarray, period: int) -> np.ndarray:
    """EMA recurrence on a raw array; exposed for rollout recomputation."""
    k = 2.0 / (period + 1)
    out = np.empty_like(x, dtype=float)
    out[0] = x[0]
    for t in range(1, len(x)):
        out[t] = x[t] * k + out[t - 1] * (1 - k)
    return out


def ema_step(price: float, prev_ema: float, period: int) -> float:
    """One EMA update; used when extending a series with predicted prices."""
    k = 2.0 / (period + 1)
    return price * k + prev_ema * (1 - k)


def macd(close: PriceSeries) -> IndicatorSeries:
    """12-period EMA minus 26-period EMA."""
    fast = ema(close, 12)
    slow = ema(close, 26)
    return IndicatorSeries(
        name="macd",
        dates=fast.dates,
        values=fast.values - slow.values,
        warmup=0,
    )


def bollinger(close: PriceSeries) -> tuple[IndicatorSeries, IndicatorSeries]:
    """21-day SMA +/- the trailing 20-day population standard deviation."""
    if len(close) < 21:
        raise ValidationError("bollinger needs at least 21 days")
    x = np.asarray(close.closes, dtype=float)
    mid = sma(close, 21)
    std = np.array([x[t - 19: t + 1].std() for t in range(20, len(x))])
    dates = tuple(close.dates[20:])
    upper = IndicatorSeries("bollinger_upper", dates, mid.values + std, warmup=20)
    lower = IndicatorSeries("bollinger_lower", dates, mid.values - std, warmup=20)
    return upper, lower


def log_returns(close: PriceSeries) -> IndicatorSeries:
    """ln(c_t / c_{t-1}); undefined for the first day."""
    x = np.asarray(close.closes, dtype=float)
    return IndicatorSeries(
        name="log_return",
        dates=tuple(close.dates[1:]),
        values=np.log(x[1:] / x[:-1]),
        warmup=1,
    )


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-day numerical features; rows are 128-wide and fully defined."""

    dates: tuple[date, ...]
    rows: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_names):
            raise ValidationError("feature rows do not match feature names")
        if len(self.dates) != self.rows.shape[0]:
            raise ValidationError("feature rows do not match dates")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValidationError("duplicate feature names")
        if not np.isfinite(self.rows).all():
            raise ValidationError("feature matrix contains non-finite entries")

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def columns_for(self, ticker: str) -> dict[str, int]:
        """Column index per catalog feature name for one ticker."""
        prefix = f"{ticker}:"
        return {
            name[len(prefix):]: i
            for i, name in enumerate(self.feature_names)
            if name.startswith(prefix)
        }

    def row_for(self, day: date) -> np.ndarray:
        idx = self.dates.index(day)
        return self.rows[idx]

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", *self.feature_names])
            for day, row in zip(self.dates, self.rows):
                writer.writerow([day.isoformat(), *[repr(float(v)) for v in row]])

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            names = tuple(header[1:])
            dates, rows = [], []
            for row in reader:
                dates.append(date.fromisoformat(row[0]))
                rows.append([float(v) for v in row[1:]])
        return cls(tuple(dates), np.array(rows, dtype=float), names)


def ticker_features(
    series: PriceSeries,
    spectral_feats: dict[str, np.ndarray],
    arima_feats: dict[str, np.ndarray],
) -> tuple[np.ndarray, int]:
    """Full-length per-ticker feature block (16 columns, NaN inside warmups).

    ``spectral_feats`` and ``arima_feats`` hold full-length arrays aligned to
    the series dates, NaN where undefined.
    """
    n = len(series)
    block = np.full((n, len(FEATURE_CATALOG)), np.nan)
    bars = series.bars
    block[:, 0] = [b.close for b in bars]
    block[:, 1] = [b.adj_close for b in bars]
    block[:, 2] = [b.volume * VOLUME_SCALE for b in bars]

    lr = log_returns(series)
    block[lr.warmup:, 3] = lr.values
    s7 = sma(series, 7)
    block[s7.warmup:, 4] = s7.values
    s21 = sma(series, 21)
    block[s21.warmup:, 5] = s21.values
    block[:, 6] = ema(series, 12).values
    block[:, 7] = ema(series, 26).values
    block[:, 8] = macd(series).values
    upper, lower = bollinger(series)
    block[upper.warmup:, 9] = upper.values
    block[lower.warmup:, 10] = lower.values
    for col, key in ((11, "fourier_recon_k3"), (12, "fourier_recon_k9")):
        arr = spectral_feats[key]
        if len(arr) != n:
            raise ValidationError(f"{series.ticker}: {key} length mismatch")
        block[:, col] = arr
    for col, key in ((13, "arima_forecast_1d"), (14, "acf_lag1"), (15, "pacf_lag1")):
        arr = arima_feats[key]
        if len(arr) != n:
            raise ValidationError(f"{series.ticker}: {key} length mismatch")
        block[:, col] = arr

    defined = np.isfinite(block).all(axis=1)
    warmup = int(np.argmax(defined)) if defined.any() else n
    return block, warmup


def build_feature_matrix(
    series: list[PriceSeries],
    spectral_feats: dict[str, dict[str, np.ndarray]],
    arima_feats: dict[str, dict[str, np.ndarray]],
) -> FeatureMatrix:
    """Assemble the 8-ticker, 128-column matrix on the common trading days.

    Tickers are ordered alphabetically; rows within any indicator warmup are
    dropped so every entry is defined.
    """
    if len(series) != 8:
        raise ValidationError(f"expected 8 tickers, got {len(series)}")
    by_ticker = {s.ticker: s for s in sorted(series, key=lambda s: s.ticker)}
    if len(by_ticker) != 8:
        raise ValidationError("duplicate tickers")

    common = set(by_ticker[next(iter(by_ticker))].dates)
    for s in by_ticker.values():
        common &= set(s.dates)
    if not common:
        raise ValidationError("empty trading-day intersection")
    days = sorted(common)
    if len(days) < 51:
        raise ValidationError(
            f"common trading-day span too short: {len(days)} < 51"
        )

    names: list[str] = []
    columns: list[np.ndarray] = []
    for ticker, s in by_ticker.items():
        block, _ = ticker_features(s, spectral_feats[ticker], arima_feats[ticker])
        # restrict the ticker block to the common days
        idx = [i for i, d in enumerate(s.dates) if d in common]
        columns.append(block[idx])
        names.extend(f"{ticker}:{feat}" for feat in FEATURE_CATALOG)

    full = np.hstack(columns)
    defined = np.isfinite(full).all(axis=1)
    keep = np.flatnonzero(defined)
    return FeatureMatrix(
        dates=tuple(days[i] for i in keep),
        rows=full[keep],
        feature_names=tuple(names),
    )
