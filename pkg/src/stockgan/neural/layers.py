"""Differentiable layers: dense, LSTM, 1-d convolution, batch norm.

Only what the generator/discriminator architecture needs. Gradients for
every layer are exercised against central finite differences in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError, ValidationError
from .tensor import Parameter, Tensor, _result, as_tensor


def xavier_init(shape: tuple[int, ...], rng: np.random.Generator | int) -> np.ndarray:
    """Uniform init within +/- sqrt(6 / (fan_in + fan_out)); deterministic per seed."""
    if len(shape) < 2:
        raise ValidationError(f"xavier_init needs >= 2 dims, got {shape}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if len(shape) == 2:
        fan_in, fan_out = shape
    else:
        receptive = int(np.prod(shape[2:]))
        fan_in, fan_out = shape[1] * receptive, shape[0] * receptive
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def dense_forward(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b."""
    if x.shape[-1] != w.shape[0]:
        raise ValidationError(f"dense shapes {x.shape} x {w.shape} do not conform")
    return x @ w + b


def relu(x: Tensor) -> Tensor:
    return as_tensor(x).relu()


def leaky_relu(x: Tensor, alpha: float = 0.01) -> Tensor:
    return as_tensor(x).leaky_relu(alpha)


@dataclass
class LstmParams:
    """Fused gate weights; gate order along the last axis is (i, f, g, o)."""

    w_x: Parameter
    w_h: Parameter
    b: Parameter
    hidden: int

    @classmethod
    def create(cls, input_dim: int, hidden: int, rng: np.random.Generator,
               prefix: str = "lstm") -> "LstmParams":
        b = np.zeros(4 * hidden)
        b[hidden: 2 * hidden] = 1.0  # forget-gate bias at 1 stabilizes early training
        return cls(
            w_x=Parameter(xavier_init((input_dim, 4 * hidden), rng), f"{prefix}.w_x"),
            w_h=Parameter(xavier_init((hidden, 4 * hidden), rng), f"{prefix}.w_h"),
            b=Parameter(b, f"{prefix}.b"),
            hidden=hidden,
        )

    def parameters(self) -> list[Parameter]:
        return [self.w_x, self.w_h, self.b]


def lstm_cell(x_t: Tensor, h: Tensor, c: Tensor, p: LstmParams) -> tuple[Tensor, Tensor]:
    hid = p.hidden
    z = x_t @ p.w_x + h @ p.w_h + p.b
    i = z[:, :hid].sigmoid()
    f = z[:, hid: 2 * hid].sigmoid()
    g = z[:, 2 * hid: 3 * hid].tanh()
    o = z[:, 3 * hid:].sigmoid()
    c_new = f * c + i * g
    return o * c_new.tanh(), c_new


def lstm_forward(
    x_seq: Tensor,
    p: LstmParams,
    h0: Tensor | None = None,
    c0: Tensor | None = None,
) -> Tensor:
    """Run the cell over (batch, T, features); returns the final hidden state."""
    batch, steps, feats = x_seq.shape
    if feats != p.w_x.shape[0]:
        raise ValidationError(
            f"lstm expects {p.w_x.shape[0]} input features, got {feats}"
        )
    h = h0 if h0 is not None else Tensor(np.zeros((1, p.hidden)))
    c = c0 if c0 is not None else Tensor(np.zeros((1, p.hidden)))
    for t in range(steps):
        h, c = lstm_cell(x_seq[:, t, :], h, c, p)
    return h


def conv1d_forward(x: Tensor, kernels: Tensor, bias: Tensor, stride: int = 2) -> Tensor:
    """Valid cross-correlation of (B, C_in, L) with (C_out, C_in, K) kernels."""
    b, c_in, length = x.shape
    c_out, c_in_k, k = kernels.shape
    if c_in != c_in_k:
        raise ValidationError(f"conv channels mismatch: {c_in} vs {c_in_k}")
    if length < k:
        raise ValidationError(f"input length {length} shorter than kernel {k}")
    l_out = (length - k) // stride + 1
    xd, wd = x.data, kernels.data
    s0, s1, s2 = xd.strides
    windows = np.lib.stride_tricks.as_strided(
        xd, shape=(b, c_in, l_out, k), strides=(s0, s1, s2 * stride, s2)
    )
    out_data = np.einsum("bclk,ock->bol", windows, wd) + bias.data[None, :, None]
    out = _result(out_data, (x, kernels, bias))
    if out.requires_grad:
        def backward(g):
            if bias.requires_grad:
                bias._accumulate(g.sum(axis=(0, 2)))
            if kernels.requires_grad:
                kernels._accumulate(np.einsum("bclk,bol->ock", windows, g))
            if x.requires_grad:
                dx = np.zeros_like(xd)
                for kk in range(k):
                    dx[:, :, kk: kk + stride * l_out: stride] += np.einsum(
                        "bol,oc->bcl", g, wd[:, :, kk]
                    )
                x._accumulate(dx)
        out._backward = backward
    return out


class BatchNorm:
    """Batch normalization with running statistics.

    Normalizes over all axes except the channel axis (axis 1 for 3-d conv
    activations, the feature axis for 2-d inputs).
    """

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5,
                 name: str = "bn"):
        self.gamma = Parameter(np.ones(channels), f"{name}.gamma")
        self.beta = Parameter(np.zeros(channels), f"{name}.beta")
        self.momentum = momentum
        self.eps = eps
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)

    def parameters(self) -> list[Parameter]:
        return [self.gamma, self.beta]

    def _axes_and_shape(self, x: Tensor) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if x.data.ndim == 2:
            return (0,), (1, -1)
        if x.data.ndim == 3:
            return (0, 2), (1, -1, 1)
        raise ValidationError(f"batchnorm supports 2-d/3-d inputs, got {x.shape}")

    def forward(self, x: Tensor, train: bool) -> Tensor:
        axes, param_shape = self._axes_and_shape(x)
        gamma = self.gamma.reshape(*param_shape)
        beta = self.beta.reshape(*param_shape)
        if train:
            if x.shape[0] < 2:
                raise ValidationError("batchnorm needs batch >= 2 in train mode")
            mu = x.mean(axis=axes, keepdims=True)
            centered = x - mu
            var = (centered * centered).mean(axis=axes, keepdims=True)
            self.running_mean = (
                self.momentum * self.running_mean
                + (1 - self.momentum) * mu.data.reshape(-1)
            )
            self.running_var = (
                self.momentum * self.running_var
                + (1 - self.momentum) * var.data.reshape(-1)
            )
            return gamma * (centered / (var + self.eps).sqrt()) + beta
        rm = Tensor(self.running_mean.reshape(param_shape))
        rv = Tensor(self.running_var.reshape(param_shape))
        return gamma * ((x - rm) / (rv + self.eps).sqrt()) + beta


def l1_penalty(params: list[Parameter], lam: float) -> Tensor:
    """lam * sum |w| over the given parameters."""
    if lam < 0:
        raise ValidationError("l1 coefficient must be >= 0")
    total = Tensor(0.0)
    for p in params:
        total = total + p.abs().sum()
    return total * lam


def check_finite(name: str, arr: np.ndarray) -> None:
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite values in {name}")
