"""Batch command-line front end.

Each stage reads only upstream artifacts plus its config section and is
individually rerunnable. Artifacts live under ``<output>/<config-hash>/``
in data/, models/, reports/, and plots/.

Exit codes: 0 ok, 1 validation failure, 2 missing upstream artifact,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import arima as arima_mod
from . import evaluate as evaluate_mod
from . import spectral
from .errors import MissingArtifactError, NumericError, ValidationError
from .gan import DiscriminatorConfig, GanModel, GeneratorConfig, TrainConfig, train
from .gan import forecast_horizon
from .indicators import FeatureMatrix, build_feature_matrix
from .ingest import (
    NewsDocument,
    PriceSeries,
    load_corpus,
    load_prices,
    load_seed_corpus,
    split_train_test,
    write_prices,
)
from .latent import LatentSeed, select_top_confidence, standardize
from .sentiment import NaiveBayesModel, analyze_document, train_nb

DEFAULT_TICKERS = ["AIR.PA", "BA", "ERJ", "GE", "HON", "LMT", "NOC", "RTX"]
ARIMA_ORDER = arima_mod.ArimaSpec(p=5, d=1, q=0)

# section -> known keys; unknown keys are rejected
_SCHEMA = {
    "paths": {"prices_dir", "corpus", "seed_corpus", "output"},
    "data": {"tickers", "target", "cutoff"},
    "sentiment": {"alpha"},
    "latent": {"signed", "context_window"},
    "gan": {
        "hidden_units", "sequence_length", "learning_rate",
        "discriminator_learning_rate", "optimizer", "weight_init",
        "regularization", "l1_lambda", "conv_kernel", "conv_stride",
        "conv_padding", "conv_channels", "dense_hidden", "leaky_relu_alpha",
        "dense_activation", "batchnorm_momentum", "batchnorm_epsilon",
        "epochs", "batch_size", "loss", "update_latent", "checkpoint_interval",
    },
    "eval": {"baselines", "horizons"},
    "run": {"seed"},
}


@dataclass
class RunConfig:
    """Declarative run configuration; defaults are the tuned hyperparameters."""

    prices_dir: Path = Path("fixtures/prices")
    corpus: Path = Path("fixtures/corpus.jsonl")
    seed_corpus: Path = Path("fixtures/seed_corpus.csv")
    output: Path = Path("runs")

    tickers: list[str] = field(default_factory=lambda: list(DEFAULT_TICKERS))
    target: str = "BA"
    cutoff: date = date(2020, 1, 24)

    alpha: float = 1.0
    signed: bool = True
    context_window: int = 5

    hidden_units: int = 500
    sequence_length: int = 30
    learning_rate: float = 0.01
    discriminator_learning_rate: float | None = None
    optimizer: str = "adam"
    weight_init: str = "xavier"
    regularization: str = "l1"
    l1_lambda: float = 1e-4
    conv_kernel: int = 5
    conv_stride: int = 2
    conv_padding: str = "none"
    conv_channels: list[int] = field(default_factory=lambda: [16, 32, 64])
    dense_hidden: int = 32
    leaky_relu_alpha: float = 0.01
    dense_activation: str = "relu"
    batchnorm_momentum: float = 0.9
    batchnorm_epsilon: float = 1e-5
    epochs: int = 500
    batch_size: int = 16
    loss: str = "paper"
    update_latent: bool = True
    checkpoint_interval: int = 50

    baselines: list[str] = field(default_factory=lambda: list(evaluate_mod.BASELINES))
    horizons: list[int] = field(default_factory=lambda: [1, 15, 30])
    seed: int = 7

    def __post_init__(self) -> None:
        if self.optimizer != "adam":
            raise ValidationError("only the adam optimizer is supported")
        if self.weight_init != "xavier":
            raise ValidationError("only xavier initialization is supported")
        if self.regularization != "l1":
            raise ValidationError("only l1 regularization is supported")
        if self.conv_padding != "none":
            raise ValidationError("only unpadded convolutions are supported")
        if self.dense_activation != "relu":
            raise ValidationError("only relu dense activation is supported")
        if len(self.tickers) != len(set(self.tickers)):
            raise ValidationError("duplicate tickers in config")
        if self.target not in self.tickers:
            raise ValidationError(f"target {self.target!r} not among tickers")
        unknown = [b for b in self.baselines if b not in evaluate_mod.BASELINES]
        if unknown:
            raise ValidationError(f"unknown baselines {unknown}")

    # ------------------------------------------------------------------
    def gen_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            input_features=16 * len(self.tickers),
            hidden=self.hidden_units,
            sequence_length=self.sequence_length,
        )

    def disc_config(self) -> DiscriminatorConfig:
        return DiscriminatorConfig(
            conv_channels=tuple(self.conv_channels),
            kernel=self.conv_kernel,
            stride=self.conv_stride,
            dense_hidden=self.dense_hidden,
            leaky_alpha=self.leaky_relu_alpha,
            bn_momentum=self.batchnorm_momentum,
            bn_eps=self.batchnorm_epsilon,
        )

    def train_config(self, epochs: int | None = None) -> TrainConfig:
        return TrainConfig(
            epochs=epochs if epochs is not None else self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            discriminator_learning_rate=self.discriminator_learning_rate,
            l1_lambda=self.l1_lambda,
            loss=self.loss,
            update_latent=self.update_latent,
            checkpoint_interval=self.checkpoint_interval,
            seed=self.seed,
        )

    def config_hash(self) -> str:
        blob = {k: str(v) for k, v in sorted(vars(self).items())}
        return hashlib.sha256(
            json.dumps(blob, sort_keys=True).encode()
        ).hexdigest()[:12]


def load_config(path: str | Path, seed: int | None = None,
                out: str | Path | None = None) -> RunConfig:
    """Parse and validate the TOML config; flags override file values."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"config file not found: {path}")
    with path.open("rb") as fh:
        raw = tomllib.load(fh)

    for section, keys in raw.items():
        if section not in _SCHEMA:
            raise ValidationError(f"unknown config section [{section}]")
        if not isinstance(keys, dict):
            raise ValidationError(f"config section [{section}] must be a table")
        unknown = set(keys) - _SCHEMA[section]
        if unknown:
            raise ValidationError(
                f"unknown keys in [{section}]: {sorted(unknown)}"
            )

    kwargs: dict = {}
    paths = raw.get("paths", {})
    for key in ("prices_dir", "corpus", "seed_corpus", "output"):
        if key in paths:
            kwargs[key] = Path(paths[key])
    for section in ("data", "sentiment", "latent", "gan", "eval", "run"):
        for key, value in raw.get(section, {}).items():
            kwargs[key] = value
    if "cutoff" in kwargs and not isinstance(kwargs["cutoff"], date):
        kwargs["cutoff"] = date.fromisoformat(str(kwargs["cutoff"]))
    config = RunConfig(**kwargs)
    if seed is not None:
        config.seed = seed
    if out is not None:
        config.output = Path(out)
    return config


# ----------------------------------------------------------------------
# artifact paths

def run_root(config: RunConfig) -> Path:
    return config.output / config.config_hash()


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"missing {hint}: {path} (run the upstream stage)")
    return path


def _canonical_prices(config: RunConfig, ticker: str) -> Path:
    return run_root(config) / "data" / "prices" / f"{ticker}.csv"


def _features_path(config: RunConfig) -> Path:
    return run_root(config) / "data" / "features.csv"


def _nb_path(config: RunConfig) -> Path:
    return run_root(config) / "models" / "naive_bayes.json"


def _latent_path(config: RunConfig) -> Path:
    return run_root(config) / "models" / f"latent_{config.target}.json"


def _daily_sentiment_path(config: RunConfig) -> Path:
    return run_root(config) / "models" / f"daily_sentiment_{config.target}.json"


def _gan_dir(config: RunConfig) -> Path:
    return run_root(config) / "models" / f"gan_{config.target}"


# ----------------------------------------------------------------------
# stages

def cmd_ingest(config: RunConfig) -> int:
    """Validate raw inputs and write canonical copies under the run root."""
    root = run_root(config)
    counts: dict[str, int] = {}
    for ticker in config.tickers:
        src = config.prices_dir / f"{ticker}.csv"
        series = load_prices(src, ticker)
        write_prices(series, _canonical_prices(config, ticker))
        counts[ticker] = len(series)

    docs_raw = load_corpus(config.corpus)
    canonical_corpus = root / "data" / "corpus.jsonl"
    canonical_corpus.parent.mkdir(parents=True, exist_ok=True)
    with config.corpus.open(encoding="utf-8") as src_fh:
        lines = [line for line in src_fh if line.strip()]
    with canonical_corpus.open("w", encoding="utf-8") as fh:
        for line in lines:
            raw = json.loads(line)
            fh.write(json.dumps(
                {k: raw[k] for k in ("id", "tickers", "date", "source", "text")}
            ) + "\n")

    seed_corpus = load_seed_corpus(config.seed_corpus)
    canonical_seed = root / "data" / "seed_corpus.csv"
    with canonical_seed.open("w", newline="", encoding="utf-8") as fh:
        fh.write("text,label\n")
        for tokens, label in seed_corpus.entries:
            fh.write(f"{' '.join(tokens)},{label}\n")

    manifest = {
        "price_rows": counts,
        "documents": len(docs_raw),
        "seed_entries": len(seed_corpus.entries),
    }
    (root / "data" / "ingest_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"ingested {sum(counts.values())} price rows, {len(docs_raw)} documents")
    return 0


def _load_all_series(config: RunConfig) -> dict[str, PriceSeries]:
    series = {}
    for ticker in config.tickers:
        path = _require(_canonical_prices(config, ticker), f"prices for {ticker}")
        series[ticker] = load_prices(path, ticker)
    return series


def cmd_features(config: RunConfig) -> int:
    """Fit per-ticker ARIMA on the training span and build the feature matrix."""
    series = _load_all_series(config)
    root = run_root(config)
    spectral_feats: dict[str, dict[str, np.ndarray]] = {}
    arima_feats: dict[str, dict[str, np.ndarray]] = {}
    for ticker, s in series.items():
        train_part, _ = split_train_test(s, config.cutoff)
        fit = arima_mod.fit_ar(np.array(train_part.closes), ARIMA_ORDER)
        fit.to_json(root / "data" / "arima" / f"{ticker}.json")
        closes = np.array(s.closes)
        spectral_feats[ticker] = spectral.trailing_reconstruction_features(closes)
        feats = arima_mod.rolling_correlation_features(closes)
        feats["arima_forecast_1d"] = arima_mod.one_step_forecasts(fit, closes)
        arima_feats[ticker] = feats
    matrix = build_feature_matrix(list(series.values()), spectral_feats, arima_feats)
    matrix.to_csv(_features_path(config))
    print(f"feature matrix: {matrix.rows.shape[0]} days x {matrix.width} features")
    return 0


def cmd_train_sentiment(config: RunConfig) -> int:
    """Train the sentence classifier on the canonical seed corpus."""
    path = _require(run_root(config) / "data" / "seed_corpus.csv", "seed corpus")
    corpus = load_seed_corpus(path)
    model = train_nb(corpus, alpha=config.alpha)
    model.to_json(_nb_path(config))
    print(f"classifier trained: vocabulary of {model.vocab_size} tokens")
    return 0


def _target_documents(config: RunConfig) -> list[NewsDocument]:
    corpus_path = _require(run_root(config) / "data" / "corpus.jsonl", "corpus")
    docs = load_corpus(corpus_path)
    return [d for d in docs if config.target in d.tickers]


def cmd_build_latent(config: RunConfig) -> int:
    """Score the target's documents and build the standardized latent seed."""
    nb = NaiveBayesModel.from_json(_require(_nb_path(config), "sentiment model"))
    docs = _target_documents(config)
    if not docs:
        raise ValidationError(f"no documents mention {config.target}")
    sentiments = [s for doc in docs for s in analyze_document(nb, doc)]
    seed = standardize(select_top_confidence(sentiments, signed=config.signed))
    seed.to_json(_latent_path(config))

    by_day: dict[str, list[int]] = {}
    doc_day = {d.doc_id: d.date for d in docs}
    for s in sentiments:
        by_day.setdefault(doc_day[s.doc_id].isoformat(), []).append(s.label)
    daily = {day: sum(vals) / len(vals) for day, vals in sorted(by_day.items())}
    _daily_sentiment_path(config).write_text(json.dumps(daily, indent=2),
                                             encoding="utf-8")
    print(f"latent seed built from {len(sentiments)} sentence sentiments")
    return 0


def cmd_train(config: RunConfig, epochs: int | None = None) -> int:
    """Adversarial training of the sentiment-seeded model; writes checkpoints."""
    matrix = FeatureMatrix.from_csv(_require(_features_path(config), "feature matrix"))
    latent_seed = LatentSeed.from_json(_require(_latent_path(config), "latent seed"))
    target_path = _require(_canonical_prices(config, config.target),
                           f"prices for {config.target}")
    target_series = load_prices(target_path, config.target)
    train_series, _ = split_train_test(target_series, config.cutoff)

    train_rows = [i for i, d in enumerate(matrix.dates) if d <= config.cutoff]
    train_matrix = FeatureMatrix(
        dates=tuple(matrix.dates[i] for i in train_rows),
        rows=matrix.rows[train_rows],
        feature_names=matrix.feature_names,
    )
    model = GanModel(config.gen_config(), config.disc_config(),
                     latent_seed.values, seed=config.seed)
    model.arima_fit = arima_mod.ArimaFit.from_json(
        _require(run_root(config) / "data" / "arima" / f"{config.target}.json",
                 "target ARIMA fit")
    )
    history = train(model, train_matrix, train_series,
                    config.train_config(epochs), checkpoint_dir=_gan_dir(config))
    print(f"trained {len(history)} epochs; final d_loss "
          f"{history[-1]['d_loss']:.4f} g_loss {history[-1]['g_loss']:.4f}")
    return 0


def _experiment_data(config: RunConfig, main_model: GanModel | None) -> evaluate_mod.ExperimentData:
    matrix = FeatureMatrix.from_csv(_require(_features_path(config), "feature matrix"))
    series = _load_all_series(config)
    train_series, test_series = {}, {}
    for ticker, s in series.items():
        train_series[ticker], test_series[ticker] = split_train_test(s, config.cutoff)
    train_rows = [i for i, d in enumerate(matrix.dates) if d <= config.cutoff]
    train_matrix = FeatureMatrix(
        dates=tuple(matrix.dates[i] for i in train_rows),
        rows=matrix.rows[train_rows],
        feature_names=matrix.feature_names,
    )
    fits = {
        t: arima_mod.ArimaFit.from_json(
            _require(run_root(config) / "data" / "arima" / f"{t}.json",
                     f"ARIMA fit for {t}")
        )
        for t in config.tickers
    }
    latent_seed = LatentSeed.from_json(_require(_latent_path(config), "latent seed"))
    daily_raw = json.loads(
        _require(_daily_sentiment_path(config), "daily sentiment").read_text(
            encoding="utf-8"
        )
    )
    daily = {date.fromisoformat(k): float(v) for k, v in daily_raw.items()}
    return evaluate_mod.ExperimentData(
        target=config.target,
        train_series=train_series,
        test_series=test_series,
        train_features=train_matrix,
        arima_fits=fits,
        latent=latent_seed,
        daily_sentiment=daily,
        gen_config=config.gen_config(),
        disc_config=config.disc_config(),
        train_config=config.train_config(),
        main_model=main_model,
    )


def cmd_forecast(config: RunConfig, horizon: int | None = None) -> int:
    """Roll the trained model forward and write (date, truth, prediction) data."""
    model = GanModel.load(_gan_dir(config))
    data = _experiment_data(config, model)
    horizons = [horizon] if horizon is not None else config.horizons
    plots = run_root(config) / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    for n in horizons:
        preds = forecast_horizon(model, data.train_features,
                                 data.train_series[config.target], n)
        truth = data.test_series[config.target].closes[:n]
        dates = data.test_series[config.target].dates[:n]
        if len(truth) < n:
            raise ValidationError(f"test span too short for horizon {n}")
        out = plots / f"forecast_{config.target}_n{n}.csv"
        with out.open("w", newline="", encoding="utf-8") as fh:
            fh.write("date,truth,prediction\n")
            for d, t, p in zip(dates, truth, preds):
                fh.write(f"{d.isoformat()},{t!r},{float(p)!r}\n")
        print(f"horizon {n}: wrote {out}")
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    """Run the model grid at every horizon and emit the report tables."""
    model = GanModel.load(_gan_dir(config))
    data = _experiment_data(config, model)
    models = [evaluate_mod.MAIN_MODEL, *config.baselines]
    runs = evaluate_mod.experiment_grid(
        models, list(config.horizons), data,
        out_dir=run_root(config), config_hash=config.config_hash(),
    )
    for run in runs:
        print(f"{run.model:>18}  N={run.horizon:<3d} rmse={run.rmse:<10.4f} "
              f"nrmse={run.nrmse:.6f}")
    print(f"report written under {run_root(config) / 'reports'}")
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stockgan",
        description="sentiment-seeded adversarial stock forecasting pipeline",
    )
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override run seed")
    parser.add_argument("--out", default=None, help="override output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", help="validate and canonicalize raw inputs")
    sub.add_parser("features", help="build the daily feature matrix")
    sub.add_parser("train-sentiment", help="train the sentence classifier")
    sub.add_parser("build-latent", help="build the standardized latent seed")
    p_train = sub.add_parser("train", help="adversarial training")
    p_train.add_argument("--epochs", type=int, default=None)
    p_forecast = sub.add_parser("forecast", help="multi-day forecast")
    p_forecast.add_argument("--horizon", type=int, default=None)
    sub.add_parser("evaluate", help="baseline grid and report")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed, out=args.out)
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "features":
            return cmd_features(config)
        if args.command == "train-sentiment":
            return cmd_train_sentiment(config)
        if args.command == "build-latent":
            return cmd_build_latent(config)
        if args.command == "train":
            return cmd_train(config, epochs=args.epochs)
        if args.command == "forecast":
            return cmd_forecast(config, horizon=args.horizon)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        raise ValidationError(f"unknown command {args.command!r}")
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
