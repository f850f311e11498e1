"""Loader validation, splitting, and tokenization."""

from datetime import date

import pytest
from hypothesis import given, strategies as st

from stockgan.errors import MissingArtifactError, ValidationError
from stockgan.ingest import (
    OhlcvBar,
    PriceSeries,
    load_corpus,
    load_prices,
    load_seed_corpus,
    split_train_test,
    tokenize,
    write_prices,
)

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def _write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return path


class TestLoadPrices:
    def test_single_valid_row(self, tmp_path):
        path = _write(tmp_path, "t.csv",
                      HEADER + "2020-01-02,10,11,9,10.5,10.4,1000\n")
        series = load_prices(path, "T")
        assert len(series) == 1
        assert series.bars[0].close == 10.5

    def test_low_above_high_names_row(self, tmp_path):
        path = _write(
            tmp_path, "t.csv",
            HEADER
            + "2020-01-02,10,11,9,10.5,10.4,1000\n"
            + "2020-01-03,10,9.5,11,10,10,1000\n",
        )
        with pytest.raises(ValidationError, match="row 2"):
            load_prices(path, "T")

    def test_fixture_length_matches_line_count(self, fixtures_dir):
        path = fixtures_dir / "prices" / "BA.csv"
        n_lines = sum(1 for _ in path.open())
        series = load_prices(path, "BA")
        assert len(series) == n_lines - 1  # header excluded

    def test_fixture_spans_decade(self, fixtures_dir):
        series = load_prices(fixtures_dir / "prices" / "BA.csv", "BA")
        assert series.bars[0].date == date(2010, 1, 1)
        assert series.bars[-1].date == date(2020, 3, 6)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            load_prices(tmp_path / "nope.csv", "T")

    def test_bad_header(self, tmp_path):
        path = _write(tmp_path, "t.csv", "a,b,c\n1,2,3\n")
        with pytest.raises(ValidationError, match="header"):
            load_prices(path, "T")

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "t.csv", HEADER)
        with pytest.raises(ValidationError, match="no data rows"):
            load_prices(path, "T")

    def test_negative_price_rejected(self, tmp_path):
        path = _write(tmp_path, "t.csv", HEADER + "2020-01-02,-10,11,9,10,10,0\n")
        with pytest.raises(ValidationError, match="row 1"):
            load_prices(path, "T")

    def test_duplicate_dates_rejected(self, tmp_path):
        row = "2020-01-02,10,11,9,10.5,10.4,1000\n"
        path = _write(tmp_path, "t.csv", HEADER + row + row)
        with pytest.raises(ValidationError):
            load_prices(path, "T")

    def test_round_trip(self, tmp_path, fixtures_dir):
        series = load_prices(fixtures_dir / "prices" / "GE.csv", "GE")
        out = tmp_path / "ge.csv"
        write_prices(series, out)
        assert load_prices(out, "GE") == series


class TestSplit:
    @pytest.fixture()
    def series(self, fixtures_dir):
        return load_prices(fixtures_dir / "prices" / "BA.csv", "BA")

    def test_cutoff_last_date_gives_empty_test(self, series):
        train, test = split_train_test(series, series.bars[-1].date)
        assert len(test) == 0
        assert train == PriceSeries(series.ticker, series.bars)

    def test_default_cutoff_span(self, series):
        train, test = split_train_test(series, date(2020, 1, 24))
        assert train.bars[-1].date == date(2020, 1, 24)
        assert test.bars[0].date >= date(2020, 1, 25)
        assert test.bars[-1].date == date(2020, 3, 6)
        assert len(test) == 30  # enough for every forecast horizon

    def test_partition(self, series):
        train, test = split_train_test(series, date(2015, 6, 15))
        assert len(train) + len(test) == len(series)
        assert train.bars + test.bars == series.bars

    def test_cutoff_outside_range(self, series):
        with pytest.raises(ValidationError, match="outside"):
            split_train_test(series, date(2009, 1, 1))
        with pytest.raises(ValidationError, match="outside"):
            split_train_test(series, date(2021, 1, 1))


class TestCorpus:
    def test_two_sentence_split(self, tmp_path):
        line = ('{"id": "d1", "tickers": ["BA"], "date": "2020-01-02", '
                '"source": "forbes", "text": "Good. Bad."}\n')
        docs = load_corpus(_write(tmp_path, "c.jsonl", line))
        assert len(docs) == 1
        assert docs[0].sentences == (("good",), ("bad",))

    def test_missing_field_reports_line(self, tmp_path):
        line = '{"id": "d1", "tickers": ["BA"], "source": "x", "text": "Hi."}\n'
        with pytest.raises(ValidationError, match="line 1"):
            load_corpus(_write(tmp_path, "c.jsonl", line))

    def test_bad_json_reports_line(self, tmp_path):
        good = ('{"id": "d1", "tickers": ["BA"], "date": "2020-01-02", '
                '"source": "x", "text": "Hi."}\n')
        with pytest.raises(ValidationError, match="line 2"):
            load_corpus(_write(tmp_path, "c.jsonl", good + "{oops\n"))

    def test_fixture_count(self, fixtures_dir):
        docs = load_corpus(fixtures_dir / "corpus.jsonl")
        n_lines = sum(1 for line in (fixtures_dir / "corpus.jsonl").open() if line.strip())
        assert len(docs) == n_lines == 120

    def test_empty_sentences_dropped(self, tmp_path):
        line = ('{"id": "d1", "tickers": ["BA"], "date": "2020-01-02", '
                '"source": "x", "text": "Good. ... !"}\n')
        docs = load_corpus(_write(tmp_path, "c.jsonl", line))
        assert docs[0].sentences == (("good",),)


class TestSeedCorpus:
    def test_loads_and_covers_classes(self, fixtures_dir):
        corpus = load_seed_corpus(fixtures_dir / "seed_corpus.csv")
        labels = {label for _, label in corpus.entries}
        assert labels == {-1, 0, 1}

    def test_bad_label(self, tmp_path):
        path = _write(tmp_path, "s.csv", "text,label\nhello,2\n")
        with pytest.raises(ValidationError, match="row 1"):
            load_seed_corpus(path)

    def test_missing_class(self, tmp_path):
        path = _write(tmp_path, "s.csv", "text,label\nup,1\ndown,-1\n")
        with pytest.raises(ValidationError, match="missing"):
            load_seed_corpus(path)


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("Hello, World!") == ["hello", "world"]

    @given(st.text(max_size=200))
    def test_idempotent(self, text):
        once = tokenize(text)
        assert tokenize(" ".join(once)) == once

    def test_bar_invariants(self):
        with pytest.raises(ValidationError):
            OhlcvBar(date(2020, 1, 2), 10, 9.0, 9.0, 10, 10, 5)  # high < open
        with pytest.raises(ValidationError):
            OhlcvBar(date(2020, 1, 2), 10, 11, 10.5, 10, 10, 5)  # low > close
        with pytest.raises(ValidationError):
            OhlcvBar(date(2020, 1, 2), 10, 11, 9, 10, 10, -1)  # negative volume
