"""Minimal differentiable building blocks for the forecasting networks."""

from .checkpoint import load_checkpoint, save_checkpoint
from .layers import (
    BatchNorm,
    LstmParams,
    check_finite,
    conv1d_forward,
    dense_forward,
    l1_penalty,
    leaky_relu,
    lstm_cell,
    lstm_forward,
    relu,
    xavier_init,
)
from .optim import Adam
from .tensor import Parameter, Tensor, as_tensor, concat

__all__ = [
    "Adam",
    "BatchNorm",
    "LstmParams",
    "Parameter",
    "Tensor",
    "as_tensor",
    "check_finite",
    "concat",
    "conv1d_forward",
    "dense_forward",
    "l1_penalty",
    "leaky_relu",
    "load_checkpoint",
    "lstm_cell",
    "lstm_forward",
    "relu",
    "save_checkpoint",
    "xavier_init",
]
