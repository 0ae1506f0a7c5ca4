"""Mean-reversion position state machine, P&L, and performance metrics.

Entry/exit rules on the z-score z_t (entry > exit, defaults 1 and 0):
flat and z < -entry  -> long the spread; flat and z > entry -> short;
long and z > -exit   -> flat;            short and z < exit -> flat.
Exits are evaluated before entries, so a single day can flip a position.

P&L accrues on the previous day's position (the trade executes at the
close that generated the signal, so no same-bar look-ahead):

    r_t = (pos_{t-1} * (spread_t - spread_{t-1}) - cost_t) / GMV_{t-1}

where GMV_{t-1} = sum_i |h_i| * p_{i,t-1} is the gross market value and
cost_t = |pos_t - pos_{t-1}| * sum_i |h_i| * per_unit_cost_i is charged
only when the position changes. APR compounds geometrically over a
252-day year; Sharpe uses sample std and a zero risk-free rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError, SharpeUndefinedError, ValidationError
from .market_data import PricePanel

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class PositionSeries:
    """Units of the spread portfolio held per date: +1 long, -1 short, 0 flat."""

    dates: tuple
    positions: np.ndarray  # int array

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=int)
        if len(pos) != len(self.dates):
            raise ValidationError("positions and dates lengths differ")
        if not np.all(np.isin(pos, (-1, 0, 1))):
            raise ValidationError("positions must be in {-1, 0, +1}")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class CostModel:
    """Per-unit transaction cost by instrument id (quote currency)."""

    per_unit_cost: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, value in self.per_unit_cost.items():
            if value < 0:
                raise ValidationError(f"negative cost for {key!r}")

    def cost_for(self, instrument_id: str) -> float:
        return float(self.per_unit_cost.get(instrument_id, 0.0))


class Metrics(NamedTuple):
    apr: float
    sharpe: float
    max_drawdown: float


@dataclass(frozen=True)
class BacktestReport:
    dates: tuple
    positions: np.ndarray
    daily_returns: np.ndarray
    cumulative_returns: np.ndarray  # prod(1+r) - 1, running
    apr: float
    sharpe: float  # nan when return variance is zero
    max_drawdown: float
    total_transaction_cost: float


def generate_mr_positions(
    zscores: np.ndarray,
    entry: float = 1.0,
    exit: float = 0.0,
    dates: tuple | None = None,
) -> PositionSeries:
    """Stateful scan of the entry/exit rules, starting flat."""
    if exit >= entry:
        raise ValidationError("exit threshold must be below entry threshold")
    z = np.asarray(zscores, dtype=float)
    out = np.zeros(len(z), dtype=int)
    state = 0
    for t, zt in enumerate(z):
        if state == 1 and zt > -exit:
            state = 0
        elif state == -1 and zt < exit:
            state = 0
        if state == 0:
            if zt < -entry:
                state = 1
            elif zt > entry:
                state = -1
        out[t] = state
    if dates is None:
        dates = tuple(range(len(z)))
    return PositionSeries(dates=dates, positions=out)


def compute_metrics(daily_returns: np.ndarray) -> Metrics:
    """APR (geometric, 252-day year), Sharpe (zero risk-free), max drawdown.

    Zero return variance raises SharpeUndefinedError with the APR and max
    drawdown attached, since both remain well defined.
    """
    r = np.asarray(daily_returns, dtype=float)
    if len(r) < 2:
        raise DegenerateInputError("need at least 2 returns for metrics")
    if np.any(1.0 + r <= 0.0):
        raise DegenerateInputError("a daily return wiped out the equity")
    equity = np.concatenate([[1.0], np.cumprod(1.0 + r)])  # unit starting equity
    apr = float(equity[-1] ** (TRADING_DAYS_PER_YEAR / len(r)) - 1.0)
    peaks = np.maximum.accumulate(equity)
    max_drawdown = float(np.min(equity / peaks - 1.0))
    std = float(np.std(r, ddof=1))
    # ptp catches constant returns whose float mean is not exactly
    # representable, where std comes out tiny but nonzero
    if std == 0.0 or np.ptp(r) == 0.0:
        raise SharpeUndefinedError(
            "zero return variance, Sharpe undefined",
            apr=apr,
            max_drawdown=max_drawdown,
        )
    sharpe = math.sqrt(TRADING_DAYS_PER_YEAR) * float(r.mean()) / std
    return Metrics(apr=apr, sharpe=sharpe, max_drawdown=max_drawdown)


def compute_pnl(
    panel: PricePanel,
    hedge_ratio: np.ndarray,
    positions: PositionSeries,
    costs: CostModel | None = None,
) -> BacktestReport:
    """Daily returns of trading the spread at the given positions.

    Day 0 carries only the entry cost (if any); from day 1 on, the previous
    day's position earns the spread change. The position before the window
    is flat.
    """
    h = np.asarray(hedge_ratio, dtype=float)
    if h.shape != (panel.n_instruments,):
        raise ValidationError("hedge ratio length does not match panel width")
    if len(positions) != panel.n_dates:
        raise ValidationError("positions length does not match panel dates")
    if costs is None:
        costs = CostModel()
    spread = h @ panel.prices
    gmv = np.abs(h) @ panel.prices
    if np.any(gmv <= 0.0):
        raise DegenerateInputError("zero gross market value")
    per_unit_trade_cost = float(
        sum(abs(hi) * costs.cost_for(iid) for hi, iid in zip(h, panel.instrument_ids))
    )
    pos = positions.positions
    prev_pos = np.concatenate([[0], pos[:-1]])
    trade_units = np.abs(pos - prev_pos)
    trade_cost = trade_units * per_unit_trade_cost
    pnl = np.zeros(panel.n_dates)
    pnl[1:] = pos[:-1] * np.diff(spread)
    denom = np.concatenate([[gmv[0]], gmv[:-1]])
    daily_returns = (pnl - trade_cost) / denom
    try:
        metrics = compute_metrics(daily_returns)
        apr, sharpe, max_dd = metrics
    except SharpeUndefinedError as exc:
        apr, sharpe, max_dd = exc.apr, math.nan, exc.max_drawdown
    return BacktestReport(
        dates=panel.dates,
        positions=pos,
        daily_returns=daily_returns,
        cumulative_returns=np.cumprod(1.0 + daily_returns) - 1.0,
        apr=apr,
        sharpe=sharpe,
        max_drawdown=max_dd,
        total_transaction_cost=float(trade_cost.sum()),
    )


def max_drawdown_bruteforce(daily_returns: np.ndarray) -> float:
    """O(n^2) oracle: min over all peak<=trough pairs of trough/peak - 1."""
    equity = np.concatenate(
        [[1.0], np.cumprod(1.0 + np.asarray(daily_returns, dtype=float))]
    )
    worst = 0.0
    for i in range(len(equity)):
        for j in range(i, len(equity)):
            worst = min(worst, equity[j] / equity[i] - 1.0)
    return worst
