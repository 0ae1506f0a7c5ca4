"""Augmented Dickey-Fuller unit-root testing and I(d) classification.

The ADF regression includes a drift term but no time trend:

    dy_t = a + b*y_{t-1} + g_1*dy_{t-1} + ... + g_p*dy_{t-p} + e_t

The lag order p is chosen by minimizing BIC = n*ln(RSS/n) + k*ln(n) with
k = p + 2, over a common estimation sample (all candidates drop the first
max_lag differences) so the criteria are comparable. The maximum lag
follows Schwert's rule floor(12*(T/100)^(1/4)).

The t-ratio on b is compared against finite-sample critical values for the
drift case, interpolated in 1/T between tabulated sample sizes. The 95%
column can be re-verified by Monte Carlo via `simulate_adf_null_statistics`
(also wired to the `verify-critical-values` CLI command).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._ols import ols_qr
from .errors import DegenerateInputError
from .market_data import DatedSeries

# Finite-sample critical values of the Dickey-Fuller t-statistic for the
# regression with constant and no trend, tabulated by effective sample size.
# The asymptotic 95% value is -2.86; the 95% column has been re-verified by
# Monte Carlo (see tests/test_acceptance.py, criterion 11).
_ADF_CV_SAMPLE_SIZES = (25, 50, 100, 250, 500, math.inf)
ADF_CRITICAL_VALUES = {
    0.90: (-2.63, -2.60, -2.58, -2.57, -2.57, -2.57),
    0.95: (-3.00, -2.93, -2.89, -2.88, -2.87, -2.86),
    0.99: (-3.75, -3.58, -3.51, -3.46, -3.44, -3.43),
}


def adf_critical_value(sample_size: int, level: float = 0.95) -> float:
    """Drift-case DF critical value, interpolated linearly in 1/T."""
    if level not in ADF_CRITICAL_VALUES:
        raise ValueError(f"no table for level {level}")
    table = ADF_CRITICAL_VALUES[level]
    xs = [1.0 / t for t in _ADF_CV_SAMPLE_SIZES]  # descending in x
    x = 1.0 / max(sample_size, 1)
    if x >= xs[0]:
        return table[0]
    for i in range(len(xs) - 1):
        lo, hi = xs[i + 1], xs[i]
        if lo <= x <= hi:
            frac = (x - lo) / (hi - lo)
            return table[i + 1] + frac * (table[i] - table[i + 1])
    return table[-1]


def schwert_max_lag(sample_size: int) -> int:
    """Schwert's rule of thumb: floor(12 * (T/100)^(1/4))."""
    if sample_size < 1:
        raise ValueError("sample_size must be positive")
    return int(math.floor(12.0 * (sample_size / 100.0) ** 0.25))


@dataclass(frozen=True)
class AdfOutcome:
    """Result of one ADF regression at the BIC-selected lag."""

    statistic: float
    chosen_lag: int
    critical_value_95: float
    reject_unit_root: bool
    intercept: float
    level_coefficient: float
    lag_coefficients: tuple[float, ...]


class IntegrationOrder(enum.Enum):
    I0 = "I0"
    I1 = "I1"
    I2PLUS = "I2plus"


def _adf_design(y: np.ndarray, max_lag: int, p: int):
    """Design matrix and response for lag p on the common sample."""
    dy = np.diff(y)
    t0 = max_lag  # first usable index into dy
    resp = dy[t0:]
    n = resp.shape[0]
    cols = [np.ones(n), y[t0 : len(y) - 1]]
    for i in range(1, p + 1):
        cols.append(dy[t0 - i : len(dy) - i])
    return np.column_stack(cols), resp


def adf_test(
    series: DatedSeries | np.ndarray,
    max_lag: int | None = None,
    level: float = 0.95,
) -> AdfOutcome:
    """ADF test with drift, BIC lag selection, Schwert max lag.

    All candidate lags are fit on the sample left after trimming max_lag
    observations, so their BIC values are comparable.
    """
    y = series.values if isinstance(series, DatedSeries) else np.asarray(series, float)
    y = y.ravel()
    T = len(y)
    if max_lag is None:
        max_lag = schwert_max_lag(T)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if T < max_lag + 10:
        raise DegenerateInputError(
            f"series length {T} too short for max_lag {max_lag}"
        )
    if np.ptp(y) == 0.0:
        raise DegenerateInputError("constant series has no unit-root test")

    best = None  # (bic, p, fit, X)
    for p in range(max_lag + 1):
        X, resp = _adf_design(y, max_lag, p)
        fit = ols_qr(X, resp)
        n = len(resp)
        k = p + 2
        rss = max(float(fit.rss), np.finfo(float).tiny)
        bic = n * math.log(rss / n) + k * math.log(n)
        if best is None or bic < best[0]:
            best = (bic, p, fit, X)

    _, p, fit, X = best
    n, k = X.shape
    sigma2 = float(fit.rss) / (n - k)
    se_level = math.sqrt(sigma2 * fit.xtx_inv[1, 1])
    statistic = float(fit.coef[1]) / se_level
    cv = adf_critical_value(n, level)
    return AdfOutcome(
        statistic=statistic,
        chosen_lag=p,
        critical_value_95=cv,
        reject_unit_root=statistic < cv,
        intercept=float(fit.coef[0]),
        level_coefficient=float(fit.coef[1]),
        lag_coefficients=tuple(float(c) for c in fit.coef[2:]),
    )


def classify_integration_order(
    series: DatedSeries | np.ndarray,
    max_lag: int | None = None,
) -> IntegrationOrder:
    """I(0)/I(1)/I(2+) from ADF on levels and on first differences."""
    y = series.values if isinstance(series, DatedSeries) else np.asarray(series, float)
    levels = adf_test(y, max_lag=max_lag)
    diffs = adf_test(np.diff(y), max_lag=max_lag)
    if levels.reject_unit_root:
        return IntegrationOrder.I0
    if diffs.reject_unit_root:
        return IntegrationOrder.I1
    return IntegrationOrder.I2PLUS


def simulate_adf_null_statistics(
    n_draws: int,
    sample_size: int = 500,
    seed: int = 0,
    batch: int = 4000,
) -> np.ndarray:
    """Dickey-Fuller t-statistics under the driftless random-walk null.

    Uses the lag-0 regression (correct under the null), vectorized across
    draws, for Monte Carlo verification of the embedded critical values.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n_draws)
    done = 0
    while done < n_draws:
        b = min(batch, n_draws - done)
        y = np.cumsum(rng.standard_normal((b, sample_size)), axis=1)
        x = y[:, :-1]
        d = np.diff(y, axis=1)
        n = x.shape[1]
        xc = x - x.mean(axis=1, keepdims=True)
        dc = d - d.mean(axis=1, keepdims=True)
        sxx = np.sum(xc * xc, axis=1)
        sxy = np.sum(xc * dc, axis=1)
        beta = sxy / sxx
        resid = dc - beta[:, None] * xc
        sigma2 = np.sum(resid * resid, axis=1) / (n - 2)
        out[done : done + b] = beta / np.sqrt(sigma2 / sxx)
        done += b
    return out
