"""AR(p) estimation on differenced series, ACF/PACF, and forecasting.

Estimation is conditional least squares: ordinary least squares of x_t on
an intercept and the p lagged values, after d rounds of differencing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ArimaSpec:
    """Model order (p, d, q); q must be 0 here."""

    p: int
    d: int
    q: int = 0

    def __post_init__(self) -> None:
        if self.q != 0:
            raise ValidationError("moving-average terms are not supported")
        if self.p < 0 or self.d not in (0, 1):
            raise ValidationError(f"unsupported order (p={self.p}, d={self.d})")


@dataclass(frozen=True)
class ArimaFit:
    """Fitted AR coefficients on the differenced scale."""

    spec: ArimaSpec
    phi: np.ndarray
    intercept: float
    sigma2: float

    def __post_init__(self) -> None:
        if len(self.phi) != self.spec.p:
            raise ValidationError("phi length does not match order p")
        if self.sigma2 < 0:
            raise ValidationError("negative residual variance")

    def to_json(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "p": self.spec.p,
            "d": self.spec.d,
            "q": self.spec.q,
            "phi": [float(v) for v in self.phi],
            "intercept": float(self.intercept),
            "sigma2": float(self.sigma2),
        }
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "ArimaFit":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            spec=ArimaSpec(p=raw["p"], d=raw["d"], q=raw["q"]),
            phi=np.asarray(raw["phi"], dtype=float),
            intercept=float(raw["intercept"]),
            sigma2=float(raw["sigma2"]),
        )


def difference(x: np.ndarray | list[float], d: int) -> np.ndarray:
    """Apply the first-difference operator d times."""
    x = np.asarray(x, dtype=float)
    if len(x) <= d:
        raise ValidationError(f"series of length {len(x)} too short to difference {d}x")
    for _ in range(d):
        x = x[1:] - x[:-1]
    return x


def _zero_variance(x: np.ndarray) -> bool:
    """Variance indistinguishable from rounding noise at the series' scale."""
    scale = max(1.0, float(np.abs(x).max()))
    return float(x.var()) <= 1e-24 * scale * scale


def acf(x: np.ndarray | list[float], max_lag: int) -> np.ndarray:
    """Autocorrelation with the biased (1/N) covariance estimator; rho_0 = 1."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n <= max_lag:
        raise ValidationError(f"need more than {max_lag} points, got {n}")
    if _zero_variance(x):
        raise ValidationError("zero variance series")
    xc = x - x.mean()
    c0 = float(xc @ xc) / n
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for lag in range(1, max_lag + 1):
        rho[lag] = float(xc[:-lag] @ xc[lag:]) / n / c0
    return rho


def pacf(x: np.ndarray | list[float], max_lag: int) -> np.ndarray:
    """Partial autocorrelation via the Durbin-Levinson recursion on the ACF."""
    rho = acf(x, max_lag)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    if max_lag == 0:
        return out
    phi_prev = np.array([rho[1]])
    out[1] = rho[1]
    for k in range(2, max_lag + 1):
        num = rho[k] - phi_prev @ rho[k - 1:0:-1]
        den = 1.0 - phi_prev @ rho[1:k]
        phi_kk = num / den
        phi_prev = np.append(phi_prev - phi_kk * phi_prev[::-1], phi_kk)
        out[k] = phi_kk
    return out


def fit_ar(x: np.ndarray | list[float], spec: ArimaSpec) -> ArimaFit:
    """Conditional least squares fit of an AR(p) on the d-times differenced series."""
    z = difference(x, spec.d)
    if len(z) <= 10 * spec.p:
        raise ValidationError(
            f"differenced length {len(z)} too short for p={spec.p} (need > {10 * spec.p})"
        )
    # design matrix: intercept plus p lagged columns
    rows = len(z) - spec.p
    design = np.ones((rows, spec.p + 1))
    for lag in range(1, spec.p + 1):
        design[:, lag] = z[spec.p - lag: len(z) - lag]
    target = z[spec.p:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < spec.p + 1:
        raise ValidationError("singular design matrix (constant differenced series?)")
    residuals = target - design @ coef
    return ArimaFit(
        spec=spec,
        phi=coef[1:],
        intercept=float(coef[0]),
        sigma2=float(residuals @ residuals) / rows,
    )


def forecast(fit: ArimaFit, history: np.ndarray | list[float], steps: int) -> np.ndarray:
    """Iterate the AR recursion ``steps`` days ahead, then undo differencing.

    Beyond the first step the recursion consumes its own outputs. For d=1 the
    forecast differences are cumulatively summed from the last observed level.
    """
    history = np.asarray(history, dtype=float)
    p, d = fit.spec.p, fit.spec.d
    if len(history) < p + d:
        raise ValidationError(f"history of {len(history)} too short (need >= {p + d})")
    if steps == 0:
        return np.empty(0)
    z = difference(history, d) if d else history.copy()
    recent = list(z[len(z) - p:]) if p else []
    preds = []
    for _ in range(steps):
        nxt = fit.intercept
        for i in range(p):
            nxt += fit.phi[i] * recent[-1 - i]
        preds.append(nxt)
        if p:
            recent.append(nxt)
    preds = np.asarray(preds)
    if d == 0:
        return preds
    return history[-1] + np.cumsum(preds)


def one_step_forecasts(fit: ArimaFit, x: np.ndarray | list[float]) -> np.ndarray:
    """In-sample next-day forecast available at each day t (NaN inside warmup).

    Value at index t is the forecast of x[t+1] given x[:t+1], using the fixed
    fitted coefficients; causal by construction.
    """
    x = np.asarray(x, dtype=float)
    p, d = fit.spec.p, fit.spec.d
    n = len(x)
    out = np.full(n, np.nan)
    start = p + d  # first t with p differences available
    if n <= start:
        return out
    z = difference(x, d) if d else x
    # z[j] corresponds to day j + d
    for t in range(start, n):
        j = t - d
        step = fit.intercept + float(fit.phi @ z[j - p + 1: j + 1][::-1]) if p else fit.intercept
        out[t] = x[t] + step if d else step
    return out


def rolling_correlation_features(
    x: np.ndarray | list[float], window: int = 21
) -> dict[str, np.ndarray]:
    """Trailing-window lag-1 ACF and PACF per day, used as features.

    Constant windows get 0.0 rather than an error so that indicator rows stay
    defined under flat (e.g. simulated) prices; the acf/pacf operations keep
    their strict zero-variance contract.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    acf1 = np.full(n, np.nan)
    pacf1 = np.full(n, np.nan)
    for t in range(window - 1, n):
        tail = x[t - window + 1: t + 1]
        if _zero_variance(tail):
            acf1[t] = pacf1[t] = 0.0
        else:
            rho = acf(tail, 1)
            acf1[t] = rho[1]
            pacf1[t] = rho[1]  # Durbin-Levinson base case: pacf[1] == acf[1]
    return {"acf_lag1": acf1, "pacf_lag1": pacf1}
