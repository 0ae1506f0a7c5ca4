"""Price and macro data ingestion, panel alignment, and synthetic fixtures.

Daily close prices arrive as `date,close` CSVs, one file per instrument.
Monthly macro indicators arrive as `month,value` CSVs. Panels are built by
inner-joining the date sets so no price is ever fabricated; the minimum
overlap (default 30 trading days) keeps downstream regressions well-posed.

The synthetic generator produces random-walk panels, optionally planting a
known cointegrating relationship: the last column is a weighted combination
of the driver columns plus a mean-reverting Ornstein-Uhlenbeck disturbance,
so tests can check that the scan recovers the planted hedge ratio.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CsvParseError,
    DegenerateInputError,
    InsufficientOverlapError,
    ValidationError,
)

DEFAULT_MIN_OVERLAP = 30


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DatedSeries:
    """A date-indexed series of real values (dates strictly ascending)."""

    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if len(self.dates) != len(self.values):
            raise ValidationError("dates and values lengths differ")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly ascending")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("series contains non-finite values")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class PriceSeries(DatedSeries):
    """Daily close prices for one instrument; all prices finite and > 0."""

    instrument_id: str = ""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.values <= 0):
            raise ValidationError(
                f"non-positive price in series {self.instrument_id!r}"
            )


@dataclass(frozen=True)
class PricePanel:
    """Date-aligned close prices: `prices[i, t]` is instrument i on date t."""

    dates: tuple[dt.date, ...]
    prices: np.ndarray  # shape (n_instruments, n_dates)
    instrument_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "prices", _readonly(self.prices))
        if self.prices.ndim != 2:
            raise ValidationError("prices must be a 2-D matrix")
        n, t = self.prices.shape
        if n != len(self.instrument_ids) or t != len(self.dates):
            raise ValidationError("panel shape does not match labels")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("panel dates must be strictly ascending")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise ValidationError("panel prices must be finite and positive")

    @property
    def n_instruments(self) -> int:
        return self.prices.shape[0]

    @property
    def n_dates(self) -> int:
        return self.prices.shape[1]

    def subpanel(self, indices: Sequence[int]) -> "PricePanel":
        """Panel restricted to the given instrument indices, in that order."""
        idx = list(indices)
        return PricePanel(
            dates=self.dates,
            prices=self.prices[idx, :],
            instrument_ids=tuple(self.instrument_ids[i] for i in idx),
        )

    def levels(self) -> np.ndarray:
        """Observation-major copy, shape (n_dates, n_instruments)."""
        return np.array(self.prices.T)


@dataclass(frozen=True)
class MonthlySeries:
    """Monthly indicator values; months contiguous and strictly ascending."""

    months: tuple[str, ...]  # "YYYY-MM"
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if len(self.months) != len(self.values):
            raise ValidationError("months and values lengths differ")
        keys = [_month_key(m) for m in self.months]
        for a, b in zip(keys, keys[1:]):
            if b != a + 1:
                raise ValidationError("months must be contiguous and ascending")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("monthly values must be finite")

    def __len__(self) -> int:
        return len(self.months)


def _month_key(month: str) -> int:
    try:
        y, m = month.split("-")
        year, mon = int(y), int(m)
    except ValueError as exc:
        raise ValidationError(f"bad month {month!r}, expected YYYY-MM") from exc
    if not 1 <= mon <= 12:
        raise ValidationError(f"bad month {month!r}, expected YYYY-MM")
    return year * 12 + (mon - 1)


def load_price_csv(path: str, instrument_id: str | None = None) -> PriceSeries:
    """Parse a `date,close` CSV into a PriceSeries sorted by date.

    Rejects duplicate dates and non-positive prices; parse failures name
    the offending line number.
    """
    rows: list[tuple[dt.date, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "close"]:
            raise CsvParseError(f"{path}: expected header 'date,close'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise CsvParseError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise CsvParseError(f"{path}:{lineno}: bad date {row[0]!r}") from exc
            try:
                close = float(row[1])
            except ValueError as exc:
                raise CsvParseError(f"{path}:{lineno}: bad close {row[1]!r}") from exc
            if not math.isfinite(close) or close <= 0:
                raise ValidationError(f"{path}:{lineno}: non-positive close {close}")
            rows.append((day, close))
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise ValidationError(f"{path}: duplicate date {a.isoformat()}")
    name = instrument_id if instrument_id is not None else path
    return PriceSeries(
        dates=tuple(r[0] for r in rows),
        values=np.array([r[1] for r in rows]),
        instrument_id=name,
    )


def load_monthly_csv(path: str) -> MonthlySeries:
    """Parse a `month,value` CSV (months `YYYY-MM`) into a MonthlySeries."""
    rows: list[tuple[int, str, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["month", "value"]:
            raise CsvParseError(f"{path}: expected header 'month,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise CsvParseError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            month = row[0].strip()
            key = _month_key(month)
            try:
                value = float(row[1])
            except ValueError as exc:
                raise CsvParseError(f"{path}:{lineno}: bad value {row[1]!r}") from exc
            rows.append((key, month, value))
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    return MonthlySeries(
        months=tuple(r[1] for r in rows),
        values=np.array([r[2] for r in rows]),
    )


def align_panel(
    series_list: Sequence[PriceSeries],
    min_overlap: int = DEFAULT_MIN_OVERLAP,
) -> PricePanel:
    """Inner-join price series on their common dates.

    Column order follows input order. Raises InsufficientOverlapError when
    fewer than `min_overlap` dates are shared by every series.
    """
    if len(series_list) < 2:
        raise ValidationError("need at least 2 series to build a panel")
    for s in series_list:
        if len(s) == 0:
            raise ValidationError("cannot align an empty series")
    common = set(series_list[0].dates)
    for s in series_list[1:]:
        common &= set(s.dates)
    if len(common) < max(min_overlap, 1):
        raise InsufficientOverlapError(
            f"only {len(common)} common dates, need >= {min_overlap}"
        )
    dates = tuple(sorted(common))
    cols = []
    for s in series_list:
        lookup = dict(zip(s.dates, s.values))
        cols.append([lookup[d] for d in dates])
    return PricePanel(
        dates=dates,
        prices=np.array(cols),
        instrument_ids=tuple(s.instrument_id for s in series_list),
    )


def difference_series(series: DatedSeries) -> DatedSeries:
    """First differences; the output drops the first input date."""
    if len(series) < 2:
        raise DegenerateInputError("cannot difference a series shorter than 2")
    return DatedSeries(
        dates=series.dates[1:],
        values=np.diff(series.values),
    )


def trading_days(start: dt.date, count: int) -> tuple[dt.date, ...]:
    """`count` consecutive weekdays starting at the first weekday >= start."""
    out: list[dt.date] = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return tuple(out)


@dataclass(frozen=True)
class CointegrationRecipe:
    """Plant a cointegrating relation in the synthetic panel.

    The extra column is `sum_i weights[i] * driver_i + OU noise` where the
    OU disturbance mean-reverts with the given half-life (Euler step, one
    day). The planted cointegrating vector against (drivers..., extra) is
    proportional to (weights..., -1).
    """

    weights: tuple[float, ...]
    noise_scale: float = 1.0
    half_life_days: float = 10.0


@dataclass(frozen=True)
class SynthConfig:
    """Parameters for generate_synthetic_panel."""

    n_walks: int = 2
    n_days: int = 500
    noise_scale: float = 1.0
    start_price: float = 100.0
    start_date: dt.date = field(default=dt.date(2008, 1, 2))
    recipe: CointegrationRecipe | None = None


def simulate_ou(
    rng: np.random.Generator,
    n: int,
    half_life_days: float,
    noise_scale: float,
    x0: float = 0.0,
) -> np.ndarray:
    """Mean-reverting path via the Euler step x_t = x_{t-1}(1 - k) + noise.

    The reversion speed k = ln(2)/half_life, so a regression of the daily
    change on the level recovers slope -k and half-life -ln(2)/slope.
    """
    if half_life_days <= 0:
        raise ValidationError("half_life_days must be positive")
    if noise_scale <= 0:
        raise ValidationError("noise_scale must be positive")
    kappa = math.log(2.0) / half_life_days
    eps = rng.standard_normal(n) * noise_scale
    x = np.empty(n)
    prev = x0
    for t in range(n):
        prev = prev * (1.0 - kappa) + eps[t]
        x[t] = prev
    return x


def generate_synthetic_panel(seed: int, config: SynthConfig) -> PricePanel:
    """Deterministic random-walk panel, optionally with a planted relation.

    Pure function of (seed, config): the same pair always yields a
    bit-identical panel.
    """
    if config.noise_scale <= 0:
        raise ValidationError("noise_scale must be positive")
    if config.n_walks < 1:
        raise ValidationError("need at least one random walk")
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((config.n_walks, config.n_days)) * config.noise_scale
    walks = config.start_price + np.cumsum(steps, axis=1)
    columns = [walks[i] for i in range(config.n_walks)]
    ids = [f"SYN{i + 1}" for i in range(config.n_walks)]
    if config.recipe is not None:
        recipe = config.recipe
        if len(recipe.weights) != config.n_walks:
            raise ValidationError("recipe weights must match n_walks")
        if recipe.noise_scale <= 0:
            raise ValidationError("recipe noise_scale must be positive")
        ou = simulate_ou(rng, config.n_days, recipe.half_life_days, recipe.noise_scale)
        combo = np.zeros(config.n_days)
        for w, col in zip(recipe.weights, columns):
            combo += w * col
        columns.append(combo + ou)
        ids.append(f"SYN{config.n_walks + 1}")
    prices = np.array(columns)
    if np.any(prices <= 0):
        raise ValidationError(
            "synthetic prices went non-positive; raise start_price or lower noise"
        )
    return PricePanel(
        dates=trading_days(config.start_date, config.n_days),
        prices=prices,
        instrument_ids=tuple(ids),
    )
