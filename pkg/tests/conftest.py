"""Shared fixtures: synthetic panels and CSV fixture writers."""

import numpy as np
import pytest

from mrpairs.market_data import (
    CointegrationRecipe,
    SynthConfig,
    generate_synthetic_panel,
)

RECIPE_CONFIG = SynthConfig(
    n_walks=1,
    n_days=1500,
    noise_scale=1.0,
    start_price=500.0,
    recipe=CointegrationRecipe(weights=(2.0,), noise_scale=1.0, half_life_days=10.0),
)


@pytest.fixture
def recipe_panel():
    """Two instruments with planted cointegrating vector (1, -0.5)."""
    return generate_synthetic_panel(1, RECIPE_CONFIG)


@pytest.fixture
def independent_panel():
    """Two independent random walks, no cointegration."""
    return generate_synthetic_panel(
        1, SynthConfig(n_walks=2, n_days=1500, noise_scale=1.0, start_price=500.0)
    )


def write_price_csv(path, dates, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,close\n")
        for day, value in zip(dates, values):
            fh.write(f"{day.isoformat()},{float(value)!r}\n")
    return str(path)


def write_monthly_csv(path, months, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("month,value\n")
        for month, value in zip(months, values):
            fh.write(f"{month},{float(value)!r}\n")
    return str(path)
