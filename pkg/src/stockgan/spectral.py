"""Discrete Fourier analysis and sparse sinusoid reconstructions.

The transform is the direct O(N^2) summation, vectorized in blocks; at
a few thousand samples that is fast enough and keeps the arithmetic
transparent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_BLOCK = 256  # rows of the DFT matrix materialized at a time


@dataclass(frozen=True)
class Spectrum:
    """DFT coefficients of a real series."""

    coefficients: np.ndarray
    source_length: int

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.source_length:
            raise ValidationError("spectrum length mismatch")


def dft(x: np.ndarray | list[float]) -> Spectrum:
    """X_m = sum_n x_n * exp(-2i pi m n / N)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        raise ValidationError("dft of empty series")
    coeffs = np.empty(n, dtype=complex)
    idx = np.arange(n)
    for start in range(0, n, _BLOCK):
        m = idx[start: start + _BLOCK]
        coeffs[start: start + _BLOCK] = np.exp(
            -2j * np.pi * np.outer(m, idx) / n
        ) @ x
    return Spectrum(coefficients=coeffs, source_length=n)


def inverse_complex(s: Spectrum) -> np.ndarray:
    """(1/N) sum_m X_m * exp(+2i pi m n / N), without dropping the imaginary part."""
    coeffs = s.coefficients
    n = s.source_length
    out = np.empty(n, dtype=complex)
    idx = np.arange(n)
    for start in range(0, n, _BLOCK):
        m = idx[start: start + _BLOCK]
        out[start: start + _BLOCK] = np.exp(
            2j * np.pi * np.outer(m, idx) / n
        ) @ coeffs
    return out / n


def idft(s: Spectrum) -> np.ndarray:
    """x_n = (1/N) sum_m X_m * exp(+2i pi m n / N); small imaginary residue dropped."""
    return inverse_complex(s).real


def _bin_groups(n: int) -> list[tuple[int, ...]]:
    """Conjugate-symmetric bin groups: DC, (m, N-m) pairs, and Nyquist if even."""
    groups: list[tuple[int, ...]] = [(0,)]
    for m in range(1, (n + 1) // 2):
        groups.append((m, n - m))
    if n % 2 == 0 and n >= 2:
        groups.append((n // 2,))
    return groups


def truncate_topk(s: Spectrum, k: int) -> Spectrum:
    """Zero all bins except the k largest-magnitude conjugate-symmetric groups."""
    n = s.source_length
    if k < 0 or k > n:
        raise ValidationError(f"k={k} outside [0, {n}]")
    groups = _bin_groups(n)
    # stable order: magnitude descending, then low frequency first
    ranked = sorted(
        range(len(groups)),
        key=lambda g: (-abs(s.coefficients[groups[g][0]]), g),
    )
    keep = np.zeros(n, dtype=bool)
    for g in ranked[:k]:
        for m in groups[g]:
            keep[m] = True
    return Spectrum(coefficients=np.where(keep, s.coefficients, 0.0), source_length=n)


def reconstruct_topk(s: Spectrum, k: int) -> np.ndarray:
    """Inverse transform keeping only the k largest-magnitude bin groups.

    Bins are zeroed in conjugate pairs so the reconstruction stays real.
    """
    return idft(truncate_topk(s, k))


def trailing_reconstruction_features(
    x: np.ndarray | list[float], window: int = 21, ks: tuple[int, ...] = (3, 9)
) -> dict[str, np.ndarray]:
    """Per-day trailing-window reconstructions used as trend features.

    For each day t >= window-1, the last ``window`` values are decomposed and
    the final sample of each top-k reconstruction is taken. Causal: day t
    uses values up to t only. NaN inside the warmup.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    out = {f"fourier_recon_k{k}": np.full(n, np.nan) for k in ks}
    for t in range(window - 1, n):
        spec = dft(x[t - window + 1: t + 1])
        for k in ks:
            out[f"fourier_recon_k{k}"][t] = reconstruct_topk(spec, k)[-1]
    return out
