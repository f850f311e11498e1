"""Loading, validation, and train/test splitting of price and text data.

All loaders are pure functions returning immutable records; they either
produce fully validated data or raise :class:`ValidationError` pointing at
the offending row or line.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import MissingArtifactError, ValidationError

PRICE_HEADER = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_NON_TOKEN = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class OhlcvBar:
    """One daily price bar in USD."""

    date: date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: int

    def __post_init__(self) -> None:
        prices = (self.open, self.high, self.low, self.close, self.adj_close)
        if any(p <= 0 for p in prices):
            raise ValidationError(f"non-positive price in bar at {self.date}")
        if self.low > min(self.open, self.close):
            raise ValidationError(f"low above open/close in bar at {self.date}")
        if self.high < max(self.open, self.close):
            raise ValidationError(f"high below open/close in bar at {self.date}")
        if self.volume < 0:
            raise ValidationError(f"negative volume in bar at {self.date}")


@dataclass(frozen=True)
class PriceSeries:
    """Ordered daily bars for one ticker; dates strictly increasing.

    May be empty (e.g. a test split at the last date); loaders reject
    empty files separately.
    """

    ticker: str
    bars: tuple[OhlcvBar, ...]

    def __post_init__(self) -> None:
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise ValidationError(
                    f"{self.ticker}: dates not strictly increasing at {cur.date}"
                )

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> list[date]:
        return [b.date for b in self.bars]

    @property
    def closes(self) -> list[float]:
        return [b.close for b in self.bars]


@dataclass(frozen=True)
class NewsDocument:
    """A tokenized news item attached to one or more tickers."""

    doc_id: str
    tickers: tuple[str, ...]
    date: date
    source: str
    sentences: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class LabeledSeedCorpus:
    """Labeled training sentences for the sentiment classifier."""

    entries: tuple[tuple[tuple[str, ...], int], ...] = field(default=())

    def __post_init__(self) -> None:
        present = {label for _, label in self.entries}
        missing = {-1, 0, 1} - present
        if missing:
            raise ValidationError(
                f"seed corpus missing examples for classes {sorted(missing)}"
            )


def tokenize(text: str) -> list[str]:
    """Lowercase and strip punctuation; drops tokens that end up empty.

    Idempotent: tokenizing the joined output changes nothing.
    """
    tokens = []
    for raw in text.lower().split():
        tok = _NON_TOKEN.sub("", raw)
        if tok:
            tokens.append(tok)
    return tokens


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace."""
    return [s for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def load_prices(path: str | Path, ticker: str) -> PriceSeries:
    """Read one ticker's OHLCV history from CSV.

    The header must be exactly ``Date,Open,High,Low,Close,Adj Close,Volume``
    with ISO-8601 dates. Any malformed or invariant-violating row aborts the
    load with the 1-based data row number.
    """
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"price file not found: {path}")
    bars = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PRICE_HEADER:
            raise ValidationError(
                f"{path}: expected header {','.join(PRICE_HEADER)!r}, got {header}"
            )
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                bar = OhlcvBar(
                    date=date.fromisoformat(row[0].strip()),
                    open=float(row[1]),
                    high=float(row[2]),
                    low=float(row[3]),
                    close=float(row[4]),
                    adj_close=float(row[5]),
                    volume=int(float(row[6])),
                )
            except (ValidationError, ValueError, IndexError) as exc:
                raise ValidationError(f"{path}: bad row {row_no}: {exc}") from exc
            bars.append(bar)
    if not bars:
        raise ValidationError(f"{path}: no data rows")
    bars.sort(key=lambda b: b.date)
    return PriceSeries(ticker=ticker, bars=tuple(bars))


def write_prices(series: PriceSeries, path: str | Path) -> None:
    """Write a series back to the canonical CSV form (round-trips exactly)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRICE_HEADER)
        for b in series.bars:
            writer.writerow(
                [b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low),
                 repr(b.close), repr(b.adj_close), b.volume]
            )


def split_train_test(series: PriceSeries, cutoff: date) -> tuple[PriceSeries, PriceSeries]:
    """Partition bars into (dates <= cutoff, dates > cutoff).

    The cutoff must lie within the series date range; the test part may be
    empty when the cutoff is the last date.
    """
    if cutoff < series.bars[0].date or cutoff > series.bars[-1].date:
        raise ValidationError(
            f"cutoff {cutoff} outside series range "
            f"[{series.bars[0].date}, {series.bars[-1].date}]"
        )
    train = tuple(b for b in series.bars if b.date <= cutoff)
    test = tuple(b for b in series.bars if b.date > cutoff)
    return PriceSeries(series.ticker, train), PriceSeries(series.ticker, test)


def load_corpus(path: str | Path) -> list[NewsDocument]:
    """Read a JSON Lines corpus; one document per line.

    Required fields per line: id, tickers, date, source, text. Text is
    sentence-split and tokenized; empty sentences are dropped.
    """
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"corpus file not found: {path}")
    docs = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                sentences = tuple(
                    tuple(toks)
                    for s in split_sentences(str(raw["text"]))
                    if (toks := tokenize(s))
                )
                doc = NewsDocument(
                    doc_id=str(raw["id"]),
                    tickers=tuple(str(t) for t in raw["tickers"]),
                    date=date.fromisoformat(str(raw["date"])),
                    source=str(raw["source"]),
                    sentences=sentences,
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValidationError(f"{path}: bad line {line_no}: {exc!r}") from exc
            docs.append(doc)
    return docs


def load_seed_corpus(path: str | Path) -> LabeledSeedCorpus:
    """Read the labeled seed corpus CSV with columns text,label."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"seed corpus not found: {path}")
    entries = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["text", "label"]:
            raise ValidationError(f"{path}: expected columns text,label")
        for row_no, row in enumerate(reader, start=1):
            try:
                label = int(row["label"])
                if label not in (-1, 0, 1):
                    raise ValueError(f"label {label} not in {{-1,0,1}}")
                tokens = tuple(tokenize(row["text"]))
            except (ValueError, TypeError) as exc:
                raise ValidationError(f"{path}: bad row {row_no}: {exc}") from exc
            if tokens:
                entries.append((tokens, label))
    if not entries:
        raise ValidationError(f"{path}: no usable rows")
    return LabeledSeedCorpus(entries=tuple(entries))
