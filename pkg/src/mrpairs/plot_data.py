"""Plot-data files: CSVs plus self-contained SVG line charts.

Reproduces the content of the research figures (spread with half-life,
standardized spread with positions, daily and cumulative returns) as data
files and minimal vector graphics, with no external renderer required.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .backtest import BacktestReport, PositionSeries
from .spread_dynamics import SpreadSeries

_SVG_W, _SVG_H, _SVG_PAD = 900, 300, 40


def svg_line_chart(path: str, title: str, xs, series: dict[str, np.ndarray]) -> None:
    """Write a fixed-size SVG with one polyline per named series."""
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    n = len(xs)
    all_vals = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    lo, hi = float(np.min(all_vals)), float(np.max(all_vals))
    if not math.isfinite(lo) or not math.isfinite(hi):
        lo, hi = 0.0, 1.0
    if hi == lo:
        hi = lo + 1.0
    inner_w = _SVG_W - 2 * _SVG_PAD
    inner_h = _SVG_H - 2 * _SVG_PAD

    def px(i: int) -> float:
        return _SVG_PAD + inner_w * (i / max(n - 1, 1))

    def py(v: float) -> float:
        return _SVG_PAD + inner_h * (1.0 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_PAD}" y="20" font-family="sans-serif" font-size="14">'
        f"{title}</text>",
        f'<rect x="{_SVG_PAD}" y="{_SVG_PAD}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#cccccc"/>',
    ]
    for color, (name, values) in zip(colors, series.items()):
        pts = " ".join(
            f"{px(i):.2f},{py(float(v)):.2f}" for i, v in enumerate(values)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.2"><title>{name}</title></polyline>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_plot_data(
    report: BacktestReport,
    spread: SpreadSeries,
    positions: PositionSeries,
    half_life_days: float,
    out_dir: str,
) -> list[str]:
    """Write spread/zscore/returns CSVs and a matching SVG for each."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "spread.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,spread,half_life_days\n")
        for day, value in zip(spread.dates, spread.values):
            fh.write(f"{day.isoformat()},{float(value)!r},{half_life_days!r}\n")
    svg_line_chart(
        os.path.join(out_dir, "spread.svg"),
        f"Portfolio spread (half-life {half_life_days:.2f} days)",
        spread.dates,
        {"spread": spread.values},
    )
    written.append(path)

    path = os.path.join(out_dir, "zscore_positions.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,zscore,position\n")
        for day, z, pos in zip(spread.dates, spread.zscores, positions.positions):
            fh.write(f"{day.isoformat()},{float(z)!r},{pos}\n")
    svg_line_chart(
        os.path.join(out_dir, "zscore_positions.svg"),
        "Standardized spread and positions",
        spread.dates,
        {
            "zscore": spread.zscores,
            "position": positions.positions.astype(float),
        },
    )
    written.append(path)

    path = os.path.join(out_dir, "returns.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,daily_return,cumulative_return\n")
        for day, r, c in zip(
            report.dates, report.daily_returns, report.cumulative_returns
        ):
            fh.write(f"{day.isoformat()},{float(r)!r},{float(c)!r}\n")
    svg_line_chart(
        os.path.join(out_dir, "returns.svg"),
        "Daily and cumulative returns",
        report.dates,
        {
            "daily_return": report.daily_returns,
            "cumulative_return": report.cumulative_returns,
        },
    )
    written.append(path)
    return written
