"""Adversarial forecaster: LSTM generator seeded by the sentiment latent,
1-d CNN discriminator, minimax training with latent fine-tuning, and
autoregressive multi-day rollout.

The generator reads a 30-day window of numerical features and emits the next
close. Samples shown to the discriminator are 30-day price windows: the real
window, or the real window's last 29 closes with the generated close appended.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import arima as arima_mod
from . import spectral
from .errors import NumericError, ValidationError
from .indicators import FEATURE_CATALOG, FeatureMatrix, ema_step
from .ingest import PriceSeries
from .neural import (
    Adam,
    BatchNorm,
    LstmParams,
    Parameter,
    Tensor,
    concat,
    conv1d_forward,
    dense_forward,
    l1_penalty,
    lstm_forward,
    save_checkpoint,
    load_checkpoint,
    xavier_init,
)

TRAILING_WINDOW = 21  # trailing span for per-day fourier/acf feature recomputes


@dataclass(frozen=True)
class GeneratorConfig:
    input_features: int = 128
    hidden: int = 500
    sequence_length: int = 30
    latent_dim: int = 100
    output_dim: int = 1

    def __post_init__(self) -> None:
        if min(self.input_features, self.hidden, self.sequence_length,
               self.latent_dim, self.output_dim) < 1:
            raise ValidationError("generator dimensions must be positive")
        if self.latent_dim != 100:
            raise ValidationError("latent dimension is fixed at 100")


@dataclass(frozen=True)
class DiscriminatorConfig:
    conv_channels: tuple[int, int, int] = (16, 32, 64)
    kernel: int = 5
    stride: int = 2
    dense_hidden: int = 32
    leaky_alpha: float = 0.01
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5

    def conv_lengths(self, window: int) -> list[int]:
        lengths = [window]
        for _ in self.conv_channels:
            if lengths[-1] < self.kernel:
                raise ValidationError(
                    f"window {window} collapses below kernel size in conv chain"
                )
            lengths.append((lengths[-1] - self.kernel) // self.stride + 1)
        return lengths


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    batch_size: int = 16
    learning_rate: float = 0.01
    # the tuned learning rate is applied to both networks unless overridden
    discriminator_learning_rate: float | None = None
    l1_lambda: float = 1e-4
    loss: str = "paper"  # "paper" (linear) or "bce"
    update_latent: bool = True
    checkpoint_interval: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.loss not in ("paper", "bce"):
            raise ValidationError(f"unknown loss {self.loss!r}")

    @property
    def d_lr(self) -> float:
        return (self.discriminator_learning_rate
                if self.discriminator_learning_rate is not None
                else self.learning_rate)


@dataclass
class MinMaxScaler:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def identity(cls, width: int = 1) -> "MinMaxScaler":
        return cls(lo=np.zeros(width), hi=np.ones(width))

    @classmethod
    def fit(cls, values: np.ndarray) -> "MinMaxScaler":
        values = np.atleast_2d(values.T).T  # (n,) -> (n, 1)
        return cls(lo=values.min(axis=0), hi=values.max(axis=0))

    @property
    def span(self) -> np.ndarray:
        span = self.hi - self.lo
        return np.where(span == 0.0, 1.0, span)

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (values - self.lo) / self.span

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return values * self.span + self.lo


class GanModel:
    """Generator + discriminator parameter sets and training state."""

    def __init__(
        self,
        gen_config: GeneratorConfig,
        disc_config: DiscriminatorConfig,
        latent_values: np.ndarray,
        seed: int = 0,
    ):
        latent_values = np.asarray(latent_values, dtype=float)
        if latent_values.shape != (gen_config.latent_dim,):
            raise ValidationError(
                f"latent must have shape ({gen_config.latent_dim},)"
            )
        disc_config.conv_lengths(gen_config.sequence_length)  # validates chain
        self.gen_config = gen_config
        self.disc_config = disc_config
        self.seed = seed
        self.epoch = 0
        rng = np.random.default_rng(seed)

        g, d = gen_config, disc_config
        self.latent = Parameter(latent_values.copy(), "latent")
        self.proj_h = Parameter(xavier_init((g.latent_dim, g.hidden), rng), "proj_h")
        self.proj_c = Parameter(xavier_init((g.latent_dim, g.hidden), rng), "proj_c")
        self.lstm = LstmParams.create(g.input_features, g.hidden, rng, prefix="gen.lstm")
        self.head_w = Parameter(xavier_init((g.hidden, g.output_dim), rng), "gen.head_w")
        self.head_b = Parameter(np.zeros(g.output_dim), "gen.head_b")

        channels = (1, *d.conv_channels)
        self.convs: list[tuple[Parameter, Parameter]] = []
        self.bns: list[BatchNorm] = []
        for i in range(3):
            w = Parameter(
                xavier_init((channels[i + 1], channels[i], d.kernel), rng),
                f"disc.conv{i}.w",
            )
            b = Parameter(np.zeros(channels[i + 1]), f"disc.conv{i}.b")
            self.convs.append((w, b))
            if i < 2:  # batch norm between conv layers, none after the last
                self.bns.append(
                    BatchNorm(channels[i + 1], d.bn_momentum, d.bn_eps, f"disc.bn{i}")
                )
        flat = d.conv_channels[-1] * d.conv_lengths(g.sequence_length)[-1]
        self.dense1_w = Parameter(xavier_init((flat, d.dense_hidden), rng), "disc.dense1.w")
        self.dense1_b = Parameter(np.zeros(d.dense_hidden), "disc.dense1.b")
        self.dense2_w = Parameter(xavier_init((d.dense_hidden, 1), rng), "disc.dense2.w")
        self.dense2_b = Parameter(np.zeros(1), "disc.dense2.b")

        self.price_scaler = MinMaxScaler.identity(1)
        self.feature_scaler = MinMaxScaler.identity(g.input_features)
        self.target_ticker: str | None = None
        self.arima_fit: arima_mod.ArimaFit | None = None

    # ------------------------------------------------------------------
    def generator_parameters(self, include_latent: bool = True) -> list[Parameter]:
        params = [*self.lstm.parameters(), self.head_w, self.head_b,
                  self.proj_h, self.proj_c]
        if include_latent:
            params.append(self.latent)
        return params

    def discriminator_parameters(self) -> list[Parameter]:
        params: list[Parameter] = []
        for w, b in self.convs:
            params.extend([w, b])
        for bn in self.bns:
            params.extend(bn.parameters())
        params.extend([self.dense1_w, self.dense1_b, self.dense2_w, self.dense2_b])
        return params

    def all_parameters(self) -> list[Parameter]:
        return self.generator_parameters() + self.discriminator_parameters()

    # ------------------------------------------------------------------
    def generate_scaled(self, windows: np.ndarray | Tensor) -> Tensor:
        """Predicted next close (scaled space) per (B, T, F) window."""
        x = windows if isinstance(windows, Tensor) else Tensor(windows)
        if x.shape[1:] != (self.gen_config.sequence_length, self.gen_config.input_features):
            raise ValidationError(
                f"window shape {x.shape} does not match generator config"
            )
        h0 = self.latent.reshape(1, -1) @ self.proj_h
        c0 = self.latent.reshape(1, -1) @ self.proj_c
        h = lstm_forward(x, self.lstm, h0=h0, c0=c0)
        return dense_forward(h, self.head_w, self.head_b).reshape(-1)

    def discriminate_scaled(self, windows: np.ndarray | Tensor, train: bool) -> Tensor:
        """Authenticity score in (0,1) per (B, window) scaled price window."""
        x = windows if isinstance(windows, Tensor) else Tensor(windows)
        if x.shape[-1] != self.gen_config.sequence_length:
            raise ValidationError(
                f"discriminator window must have length {self.gen_config.sequence_length}"
            )
        batch = x.shape[0]
        h = x.reshape(batch, 1, self.gen_config.sequence_length)
        alpha = self.disc_config.leaky_alpha
        for i, (w, b) in enumerate(self.convs):
            h = conv1d_forward(h, w, b, stride=self.disc_config.stride)
            if i < len(self.bns):
                h = self.bns[i].forward(h, train=train)
            h = h.leaky_relu(alpha)
        h = h.reshape(batch, -1)
        h = dense_forward(h, self.dense1_w, self.dense1_b).relu()
        h = dense_forward(h, self.dense2_w, self.dense2_b)
        return h.sigmoid().reshape(-1)

    # ------------------------------------------------------------------
    def save(self, directory: str | Path) -> None:
        tensors = {p.name: p.data for p in self.all_parameters()}
        for i, bn in enumerate(self.bns):
            tensors[f"disc.bn{i}.running_mean"] = bn.running_mean
            tensors[f"disc.bn{i}.running_var"] = bn.running_var
        metadata = {
            "gen_config": asdict(self.gen_config),
            "disc_config": {
                "conv_channels": list(self.disc_config.conv_channels),
                "kernel": self.disc_config.kernel,
                "stride": self.disc_config.stride,
                "dense_hidden": self.disc_config.dense_hidden,
                "leaky_alpha": self.disc_config.leaky_alpha,
                "bn_momentum": self.disc_config.bn_momentum,
                "bn_eps": self.disc_config.bn_eps,
            },
            "seed": self.seed,
            "epoch": self.epoch,
            "price_scaler": {
                "lo": self.price_scaler.lo.tolist(),
                "hi": self.price_scaler.hi.tolist(),
            },
            "feature_scaler": {
                "lo": self.feature_scaler.lo.tolist(),
                "hi": self.feature_scaler.hi.tolist(),
            },
            "target_ticker": self.target_ticker,
            "arima_fit": None
            if self.arima_fit is None
            else {
                "p": self.arima_fit.spec.p,
                "d": self.arima_fit.spec.d,
                "q": self.arima_fit.spec.q,
                "phi": self.arima_fit.phi.tolist(),
                "intercept": self.arima_fit.intercept,
                "sigma2": self.arima_fit.sigma2,
            },
        }
        save_checkpoint(tensors, directory, metadata)

    @classmethod
    def load(cls, directory: str | Path) -> "GanModel":
        tensors, meta = load_checkpoint(directory)
        gen_config = GeneratorConfig(**meta["gen_config"])
        dc = meta["disc_config"]
        disc_config = DiscriminatorConfig(
            conv_channels=tuple(dc["conv_channels"]),
            kernel=dc["kernel"],
            stride=dc["stride"],
            dense_hidden=dc["dense_hidden"],
            leaky_alpha=dc["leaky_alpha"],
            bn_momentum=dc["bn_momentum"],
            bn_eps=dc["bn_eps"],
        )
        model = cls(gen_config, disc_config, tensors["latent"], seed=meta["seed"])
        for p in model.all_parameters():
            p.data = tensors[p.name].copy()
        for i, bn in enumerate(model.bns):
            bn.running_mean = tensors[f"disc.bn{i}.running_mean"].copy()
            bn.running_var = tensors[f"disc.bn{i}.running_var"].copy()
        model.epoch = meta["epoch"]
        model.price_scaler = MinMaxScaler(
            lo=np.asarray(meta["price_scaler"]["lo"]),
            hi=np.asarray(meta["price_scaler"]["hi"]),
        )
        model.feature_scaler = MinMaxScaler(
            lo=np.asarray(meta["feature_scaler"]["lo"]),
            hi=np.asarray(meta["feature_scaler"]["hi"]),
        )
        model.target_ticker = meta["target_ticker"]
        if meta["arima_fit"] is not None:
            af = meta["arima_fit"]
            model.arima_fit = arima_mod.ArimaFit(
                spec=arima_mod.ArimaSpec(p=af["p"], d=af["d"], q=af["q"]),
                phi=np.asarray(af["phi"]),
                intercept=af["intercept"],
                sigma2=af["sigma2"],
            )
        return model


def generator_forward(model: GanModel, features: np.ndarray) -> np.ndarray:
    """Predicted close in price units for raw (B, T, F) or (T, F) windows."""
    features = np.asarray(features, dtype=float)
    single = features.ndim == 2
    if single:
        features = features[None]
    scaled = model.feature_scaler.transform(features)
    preds = model.price_scaler.inverse(model.generate_scaled(scaled).data)
    return preds[0] if single else preds


def discriminator_forward(model: GanModel, price_window: np.ndarray) -> np.ndarray:
    """Score in (0,1) for raw price windows of the configured length."""
    w = np.atleast_2d(np.asarray(price_window, dtype=float))
    scaled = model.price_scaler.transform(w)
    scores = model.discriminate_scaled(scaled, train=False).data
    return scores[0] if np.asarray(price_window).ndim == 1 else scores


def gan_loss(d_real, d_fake) -> Tensor:
    """(1/2) (mean(1 - D(real)) + mean(D(fake))).

    The discriminator descends this; the generator and latent ascend it.
    """
    d_real = d_real if isinstance(d_real, Tensor) else Tensor(np.asarray(d_real, dtype=float))
    d_fake = d_fake if isinstance(d_fake, Tensor) else Tensor(np.asarray(d_fake, dtype=float))
    if d_real.data.size == 0 or d_fake.data.size == 0:
        raise ValidationError("gan_loss needs non-empty score batches")
    return ((1.0 - d_real).mean() + d_fake.mean()) * 0.5


def _bce_d_loss(d_real: Tensor, d_fake: Tensor) -> Tensor:
    eps = 1e-12
    return -((d_real + eps).log().mean() + (1.0 - d_fake + eps).log().mean()) * 0.5


@dataclass
class TrainingWindows:
    """Aligned window arrays for one target ticker, in scaled space."""

    features: np.ndarray    # (n_windows, T, F)
    real_windows: np.ndarray  # (n_windows, T) closes ending at the target day
    last29: np.ndarray      # (n_windows, T-1) closes preceding the target day
    targets: np.ndarray     # (n_windows,) scaled close at the target day


def _build_windows(model: GanModel, features: FeatureMatrix,
                   target: PriceSeries) -> TrainingWindows:
    seq = model.gen_config.sequence_length
    close_by_date = {b.date: b.close for b in target.bars}
    missing = [d for d in features.dates if d not in close_by_date]
    if missing:
        raise ValidationError(
            f"feature dates missing from target series, e.g. {missing[0]}"
        )
    closes = np.array([close_by_date[d] for d in features.dates])
    n = len(closes)
    if n < seq + 1:
        raise ValidationError(f"need at least {seq + 1} aligned rows, got {n}")

    feats_scaled = model.feature_scaler.transform(features.rows)
    closes_scaled = model.price_scaler.transform(closes[:, None])[:, 0]

    idx = np.arange(seq - 1, n - 1)  # window ends at i, predicts close at i+1
    feat_windows = np.stack([feats_scaled[i - seq + 1: i + 1] for i in idx])
    real_windows = np.stack([closes_scaled[i - seq + 2: i + 2] for i in idx])
    return TrainingWindows(
        features=feat_windows,
        real_windows=real_windows,
        last29=real_windows[:, :-1],
        targets=closes_scaled[idx + 1],
    )


def train(
    model: GanModel,
    features: FeatureMatrix,
    target: PriceSeries,
    config: TrainConfig,
    checkpoint_dir: str | Path | None = None,
) -> list[dict]:
    """Alternating minimax training; returns the per-epoch loss history.

    Each batch takes one discriminator Adam step descending the loss on real
    versus generated windows, then one generator step ascending it (with the
    L1 penalty on the LSTM weights); the latent vector is fine-tuned inside
    the generator step unless disabled. Checkpoints, when a directory is
    given, are written every ``checkpoint_interval`` epochs, so the last good
    one survives a numeric abort.
    """
    if features.width != model.gen_config.input_features:
        raise ValidationError(
            f"feature width {features.width} != configured "
            f"{model.gen_config.input_features}"
        )
    date_set = set(features.dates)
    closes = np.array([b.close for b in target.bars if b.date in date_set])
    if closes.max() == closes.min():
        raise ValidationError("constant target series cannot be scaled")
    model.price_scaler = MinMaxScaler.fit(closes)
    model.feature_scaler = MinMaxScaler.fit(features.rows)
    model.target_ticker = target.ticker

    windows = _build_windows(model, features, target)
    n_windows = len(windows.targets)
    if n_windows < 2:
        raise ValidationError(
            "need at least 2 training windows (batch statistics require >= 2 samples)"
        )
    rng = np.random.default_rng(config.seed)
    gen_params = model.generator_parameters(include_latent=config.update_latent)
    disc_params = model.discriminator_parameters()
    opt_g = Adam(gen_params, lr=config.learning_rate)
    opt_d = Adam(disc_params, lr=config.d_lr)

    history: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_windows)
        d_losses, g_losses = [], []
        for start in range(0, n_windows, config.batch_size):
            batch = order[start: start + config.batch_size]
            if len(batch) < 2:
                continue  # batch norm needs >= 2 samples
            feat_b = windows.features[batch]
            real_b = windows.real_windows[batch]
            last29_b = windows.last29[batch]

            # discriminator step: fake windows are detached from the generator
            preds = model.generate_scaled(feat_b)
            fake_const = np.hstack([last29_b, preds.data[:, None]])
            d_real = model.discriminate_scaled(real_b, train=True)
            d_fake = model.discriminate_scaled(fake_const, train=True)
            if config.loss == "paper":
                loss_d = gan_loss(d_real, d_fake)
            else:
                loss_d = _bce_d_loss(d_real, d_fake)
            opt_d.zero_grad()
            loss_d.backward()
            opt_d.step()

            # generator + latent step against the updated discriminator
            fake = concat([Tensor(last29_b), preds.reshape(-1, 1)], axis=1)
            d_fake_g = model.discriminate_scaled(fake, train=True)
            penalty = l1_penalty(model.lstm.parameters(), config.l1_lambda)
            if config.loss == "paper":
                adv = gan_loss(Tensor(d_real.data), d_fake_g)
                objective = -adv + penalty
            else:
                eps = 1e-12
                adv = (d_fake_g + eps).log().mean()
                objective = -adv + penalty
            opt_g.zero_grad()
            objective.backward()
            opt_g.step()

            d_val, g_val = loss_d.item(), adv.item()
            if not (math.isfinite(d_val) and math.isfinite(g_val)):
                raise NumericError(
                    f"non-finite loss at epoch {epoch} "
                    f"(last checkpoint is the most recent interval write)"
                )
            d_losses.append(d_val)
            g_losses.append(g_val)

        model.epoch = epoch
        history.append(
            {
                "epoch": epoch,
                "d_loss": float(np.mean(d_losses)),
                "g_loss": float(np.mean(g_losses)),
            }
        )
        if checkpoint_dir is not None and epoch % config.checkpoint_interval == 0:
            model.save(checkpoint_dir)
    if checkpoint_dir is not None:
        model.save(checkpoint_dir)
        log_path = Path(checkpoint_dir) / "training_log.json"
        log_path.write_text(
            json.dumps({"seed": config.seed, "epochs": history}), encoding="utf-8"
        )
    return history


def train_supervised(
    model: GanModel,
    features: FeatureMatrix,
    target: PriceSeries,
    config: TrainConfig,
) -> list[dict]:
    """Squared-error training of the generator alone (the FC-LSTM baseline)."""
    if features.width != model.gen_config.input_features:
        raise ValidationError("feature width does not match generator config")
    date_set = set(features.dates)
    closes = np.array([b.close for b in target.bars if b.date in date_set])
    model.price_scaler = MinMaxScaler.fit(closes)
    model.feature_scaler = MinMaxScaler.fit(features.rows)
    model.target_ticker = target.ticker

    windows = _build_windows(model, features, target)
    n_windows = len(windows.targets)
    rng = np.random.default_rng(config.seed)
    opt = Adam(model.generator_parameters(include_latent=False),
               lr=config.learning_rate)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_windows)
        losses = []
        for start in range(0, n_windows, config.batch_size):
            batch = order[start: start + config.batch_size]
            preds = model.generate_scaled(windows.features[batch])
            err = preds - Tensor(windows.targets[batch])
            loss = (err * err).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
        model.epoch = epoch
        history.append({"epoch": epoch, "mse": float(np.mean(losses))})
    return history


def forecast_horizon(
    model: GanModel,
    features: FeatureMatrix,
    target: PriceSeries,
    n_days: int,
) -> np.ndarray:
    """Predict ``n_days`` closes past the end of ``features``.

    Day 1 uses the last real feature window. Later days splice the model's
    own predicted closes into the rolling window: the target ticker's
    close-derived features are recomputed from predictions, while volume,
    adjusted close, and every other ticker's columns hold their last real
    values. Ground truth after the forecast start is never read.
    """
    if n_days < 1:
        raise ValidationError("horizon must be >= 1")
    seq = model.gen_config.sequence_length
    if len(features.dates) < seq:
        raise ValidationError(f"need at least {seq} feature rows")
    if model.target_ticker is None:
        raise ValidationError("model has no target ticker; train it first")
    cols = features.columns_for(model.target_ticker)
    absent = [f for f in FEATURE_CATALOG if f not in cols]
    if absent:
        raise ValidationError(
            f"feature matrix lacks {model.target_ticker} columns: {absent}"
        )
    if model.arima_fit is None:
        raise ValidationError("model is missing the ARIMA fit needed for rollout")

    close_by_date = {b.date: b.close for b in target.bars}
    missing = [d for d in features.dates[-(TRAILING_WINDOW + 6):] if d not in close_by_date]
    if missing:
        raise ValidationError(f"target series missing close for {missing[0]}")
    trailing = [close_by_date[d] for d in features.dates[-(TRAILING_WINDOW + 6):]]
    rows = [features.rows[i].copy() for i in range(len(features.dates) - seq,
                                                   len(features.dates))]
    preds: list[float] = []
    for _ in range(n_days):
        window = np.stack(rows[-seq:])
        pred = float(generator_forward(model, window))
        if not math.isfinite(pred):
            raise NumericError("non-finite forecast")
        prev_close = trailing[-1]
        prev_row = rows[-1]
        trailing.append(pred)
        tail = np.asarray(trailing[-TRAILING_WINDOW:], dtype=float)

        row = prev_row.copy()
        row[cols["close"]] = pred
        row[cols["log_return"]] = math.log(pred / prev_close)
        row[cols["sma7"]] = float(np.mean(trailing[-7:]))
        row[cols["sma21"]] = float(np.mean(tail))
        row[cols["ema12"]] = ema_step(pred, prev_row[cols["ema12"]], 12)
        row[cols["ema26"]] = ema_step(pred, prev_row[cols["ema26"]], 26)
        row[cols["macd"]] = row[cols["ema12"]] - row[cols["ema26"]]
        std20 = float(np.std(trailing[-20:]))
        row[cols["bollinger_upper"]] = row[cols["sma21"]] + std20
        row[cols["bollinger_lower"]] = row[cols["sma21"]] - std20
        spec = spectral.dft(tail)
        row[cols["fourier_recon_k3"]] = spectral.reconstruct_topk(spec, 3)[-1]
        row[cols["fourier_recon_k9"]] = spectral.reconstruct_topk(spec, 9)[-1]
        row[cols["arima_forecast_1d"]] = arima_mod.forecast(
            model.arima_fit, np.asarray(trailing), 1
        )[0]
        if arima_mod._zero_variance(tail):
            rho1 = 0.0
        else:
            rho1 = arima_mod.acf(tail, 1)[1]
        row[cols["acf_lag1"]] = rho1
        row[cols["pacf_lag1"]] = rho1
        rows.append(row)
        preds.append(pred)
    return np.asarray(preds)
