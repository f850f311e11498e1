"""Deterministic synthetic fixtures: 8 tickers of daily bars, a small news
corpus, and a labeled seed corpus for the sentiment classifier.

Everything is a pure function of the seed so fixtures can be regenerated
bit-identically (``python -m stockgan.synthetic --out fixtures``).
"""

from __future__ import annotations

import argparse
import csv
import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .ingest import PriceSeries, OhlcvBar, write_prices

TICKERS = ["AIR.PA", "BA", "ERJ", "GE", "HON", "LMT", "NOC", "RTX"]
SPAN_START = date(2010, 1, 1)
SPAN_END = date(2020, 3, 6)

POSITIVE_WORDS = [
    "surge", "gain", "rally", "strong", "growth", "profit", "beat", "record",
    "upgrade", "bullish", "soar", "win", "expand", "outperform",
]
NEGATIVE_WORDS = [
    "loss", "drop", "weak", "decline", "crash", "miss", "downgrade",
    "bearish", "plunge", "fall", "slump", "lawsuit", "recall", "strike",
]
NEUTRAL_WORDS = [
    "market", "company", "quarter", "report", "shares", "trading", "index",
    "sector", "analyst", "stock", "price", "outlook", "meeting", "guidance",
]
SOURCES = ["seekingalpha", "forbes", "marketwatch", "twitter"]


def business_days(start: date, end: date) -> list[date]:
    """Weekdays in [start, end]; holidays are not modeled."""
    days = []
    cur = start
    one = timedelta(days=1)
    while cur <= end:
        if cur.weekday() < 5:
            days.append(cur)
        cur += one
    return days


def _bars_from_closes(days: list[date], closes: np.ndarray,
                      rng: np.random.Generator) -> tuple[OhlcvBar, ...]:
    bars = []
    for i, (day, close) in enumerate(zip(days, closes)):
        open_ = closes[i - 1] if i > 0 else close * (1 + rng.normal(0, 0.002))
        spread = abs(rng.normal(0, 0.004)) + 1e-4
        high = max(open_, close) * (1 + spread)
        low = min(open_, close) * (1 - spread)
        volume = int(rng.lognormal(mean=13.5, sigma=0.4))
        bars.append(
            OhlcvBar(
                date=day,
                open=round(float(open_), 4),
                high=round(float(high), 4),
                low=round(float(low), 4),
                close=round(float(close), 4),
                adj_close=round(float(close) * 0.985, 4),
                volume=volume,
            )
        )
    return tuple(bars)


def make_price_series(
    ticker: str,
    seed: int = 7,
    start: date = SPAN_START,
    end: date = SPAN_END,
) -> PriceSeries:
    """Random-walk-with-seasonality daily bars over the span."""
    days = business_days(start, end)
    n = len(days)
    idx = TICKERS.index(ticker) if ticker in TICKERS else 0
    rng = np.random.default_rng(seed * 1000 + idx)
    base = 40.0 + 35.0 * idx
    t = np.arange(n)
    drift = rng.normal(3e-4, 1e-4)
    walk = np.cumsum(rng.normal(0, 0.01, size=n))
    season = 0.05 * np.sin(2 * np.pi * t / 252 + idx) \
        + 0.02 * np.sin(2 * np.pi * t / 63 + 2 * idx)
    closes = base * np.exp(drift * t + walk * 0.5 + season)
    return PriceSeries(ticker=ticker, bars=_bars_from_closes(days, closes, rng))


def make_sine_series(
    ticker: str,
    n_days: int = 500,
    seed: int = 7,
    base: float = 100.0,
    amplitude: float = 10.0,
    period: float = 60.0,
    noise: float = 0.3,
    start: date = date(2018, 1, 1),
) -> PriceSeries:
    """Sine plus noise; the desk-scale training fixture."""
    idx = TICKERS.index(ticker) if ticker in TICKERS else 0
    rng = np.random.default_rng(seed * 100 + idx)
    days = []
    cur = start
    one = timedelta(days=1)
    while len(days) < n_days:
        if cur.weekday() < 5:
            days.append(cur)
        cur += one
    t = np.arange(n_days)
    closes = base + amplitude * np.sin(2 * np.pi * t / period + idx * 0.7) \
        + rng.normal(0, noise, size=n_days)
    closes = np.maximum(closes, 1.0)
    return PriceSeries(ticker=ticker, bars=_bars_from_closes(days, closes, rng))


def make_seed_corpus_rows(seed: int = 7, per_class: int = 30) -> list[tuple[str, int]]:
    """Labeled short sentences built from the polarity word banks."""
    rng = np.random.default_rng(seed + 17)
    rows: list[tuple[str, int]] = []
    for _ in range(per_class):
        pos = rng.choice(POSITIVE_WORDS, size=3, replace=False)
        neu = rng.choice(NEUTRAL_WORDS, size=2, replace=False)
        rows.append((f"{neu[0]} {pos[0]} {pos[1]} {neu[1]} {pos[2]}", 1))
        neg = rng.choice(NEGATIVE_WORDS, size=3, replace=False)
        neu = rng.choice(NEUTRAL_WORDS, size=2, replace=False)
        rows.append((f"{neu[0]} {neg[0]} {neg[1]} {neu[1]} {neg[2]}", -1))
        neu = rng.choice(NEUTRAL_WORDS, size=5, replace=False)
        rows.append((" ".join(neu), 0))
    return rows


def make_corpus_records(
    seed: int = 7,
    n_docs: int = 120,
    tickers: list[str] | None = None,
    start: date = date(2019, 1, 2),
    end: date = SPAN_END,
) -> list[dict]:
    """News documents as JSONL-ready dicts, cycling through the tickers."""
    tickers = tickers or TICKERS
    rng = np.random.default_rng(seed + 29)
    days = business_days(start, end)
    records = []
    for i in range(n_docs):
        ticker = tickers[i % len(tickers)]
        day = days[int(rng.integers(0, len(days)))]
        n_sentences = int(rng.integers(2, 7))
        sentences = []
        for _ in range(n_sentences):
            mood = rng.random()
            if mood < 0.4:
                bank = POSITIVE_WORDS
            elif mood < 0.7:
                bank = NEGATIVE_WORDS
            else:
                bank = NEUTRAL_WORDS
            words = [str(w) for w in rng.choice(bank, size=3, replace=False)]
            filler = [str(w) for w in rng.choice(NEUTRAL_WORDS, size=2, replace=False)]
            sentences.append(
                f"{filler[0]} {words[0]} {words[1]} {filler[1]} {words[2]}"
            )
        records.append(
            {
                "id": f"doc{i:04d}",
                "tickers": [ticker],
                "date": day.isoformat(),
                "source": SOURCES[i % len(SOURCES)],
                "text": ". ".join(s.capitalize() for s in sentences) + ".",
            }
        )
    records.sort(key=lambda r: (r["date"], r["id"]))
    return records


def write_fixtures(
    root: str | Path,
    seed: int = 7,
    tickers: list[str] | None = None,
    n_docs: int = 120,
) -> None:
    """Write prices/{ticker}.csv, corpus.jsonl, and seed_corpus.csv under root."""
    root = Path(root)
    tickers = tickers or TICKERS
    for ticker in tickers:
        series = make_price_series(ticker, seed=seed)
        write_prices(series, root / "prices" / f"{ticker}.csv")
    corpus_path = root / "corpus.jsonl"
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    with corpus_path.open("w", encoding="utf-8") as fh:
        for rec in make_corpus_records(seed=seed, n_docs=n_docs, tickers=tickers):
            fh.write(json.dumps(rec) + "\n")
    with (root / "seed_corpus.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["text", "label"])
        for text, label in make_seed_corpus_rows(seed=seed):
            writer.writerow([text, label])


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="generate synthetic fixtures")
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--docs", type=int, default=120)
    args = parser.parse_args(argv)
    write_fixtures(args.out, seed=args.seed, n_docs=args.docs)
    print(f"fixtures written under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
