"""Spread construction, OU half-life estimation, and z-scoring.

spread_t = sum_i hedge_i * price_{i,t}. The speed of mean reversion comes
from regressing the daily spread change on the lagged spread level (with
intercept); a negative slope lam gives half-life -ln(2)/lam, otherwise the
spread shows no measured mean reversion and the half-life is unbounded.

Z-scores use the full-sample mean and sample (n-1) standard deviation.
NOTE: full-sample standardization is in-sample and embeds look-ahead bias;
it matches the single-period research backtest this engine reproduces. Use
`rolling_window` for a bias-free variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._ols import ols_qr
from .errors import DegenerateInputError, ValidationError
from .market_data import DatedSeries, PricePanel

MIN_HALF_LIFE_OBS = 30


@dataclass(frozen=True)
class SpreadSeries:
    """Spread values plus their full-sample standardization."""

    dates: tuple
    values: np.ndarray
    mean: float
    std: float
    zscores: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class HalfLifeEstimate:
    """OU speed from the change-on-level regression."""

    mean_reversion_speed: float  # slope lam; mean-reverting when negative
    intercept: float
    half_life_days: float        # -ln(2)/lam, or math.inf when lam >= 0


def standardize(values: np.ndarray, rolling_window: int | None = None) -> np.ndarray:
    """(x - mean)/std with sample std; optional trailing-window variant.

    With `rolling_window` set, each point is standardized against the
    trailing window ending at that point (the first window-1 points use the
    partial window), removing the full-sample look-ahead.
    """
    x = np.asarray(values, dtype=float)
    if rolling_window is None:
        if len(x) < 2:
            raise DegenerateInputError("need at least 2 points to standardize")
        std = float(np.std(x, ddof=1))
        if std == 0.0 or np.ptp(x) == 0.0:
            raise DegenerateInputError("zero variance, z-scores undefined")
        return (x - x.mean()) / std
    if rolling_window < 2:
        raise ValidationError("rolling_window must be at least 2")
    out = np.empty(len(x))
    out[0] = 0.0  # a one-point window carries no dispersion information
    for t in range(1, len(x)):
        lo = max(0, t - rolling_window + 1)
        window = x[lo : t + 1]
        std = float(np.std(window, ddof=1))
        if std == 0.0 or np.ptp(window) == 0.0:
            raise DegenerateInputError(f"zero variance in window ending at {t}")
        out[t] = (x[t] - window.mean()) / std
    return out


def compute_spread(panel: PricePanel, hedge_ratio: np.ndarray) -> SpreadSeries:
    """Dot the hedge ratio into each date's prices and standardize."""
    h = np.asarray(hedge_ratio, dtype=float)
    if h.shape != (panel.n_instruments,):
        raise ValidationError(
            f"hedge ratio length {h.shape} does not match panel width "
            f"{panel.n_instruments}"
        )
    values = h @ panel.prices
    if len(values) < 2:
        raise DegenerateInputError("spread needs at least 2 dates for mean/std")
    std = float(np.std(values, ddof=1))
    if std == 0.0 or np.ptp(values) == 0.0:
        raise DegenerateInputError("constant spread, z-scores undefined")
    mean = float(values.mean())
    return SpreadSeries(
        dates=panel.dates,
        values=values,
        mean=mean,
        std=std,
        zscores=(values - mean) / std,
    )


def estimate_half_life(
    spread: SpreadSeries | DatedSeries | np.ndarray,
) -> HalfLifeEstimate:
    """OLS of the daily spread change on the lagged spread level."""
    if isinstance(spread, (SpreadSeries, DatedSeries)):
        s = np.asarray(spread.values, dtype=float)
    else:
        s = np.asarray(spread, dtype=float)
    if len(s) < MIN_HALF_LIFE_OBS:
        raise DegenerateInputError(
            f"need at least {MIN_HALF_LIFE_OBS} observations, got {len(s)}"
        )
    if np.ptp(s) == 0.0:
        raise DegenerateInputError("constant spread has no reversion speed")
    ds = np.diff(s)
    X = np.column_stack([np.ones(len(ds)), s[:-1]])
    fit = ols_qr(X, ds)
    lam = float(fit.coef[1])
    half_life = -math.log(2.0) / lam if lam < 0 else math.inf
    return HalfLifeEstimate(
        mean_reversion_speed=lam,
        intercept=float(fit.coef[0]),
        half_life_days=half_life,
    )
