"""Monthly macro direction forecasting and signal expansion.

Directions (Up/Down/Flat) are labelled from month-over-month changes with
a configurable flat band. A one-vs-rest linear classifier trained with
regularized hinge loss and deterministic full-batch subgradient descent
forecasts the direction; a `month,direction` oracle CSV can stand in for
the model so the downstream fusion pipeline is testable on its own.

Direction-to-signal convention: the macro indicators move opposite to the
majors-vs-USD exchange rates, so a forecast increase maps to Short, a
decrease to Long, and flat to Flat. Monthly signals broadcast to every
trading day of their month.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoverageError,
    CsvParseError,
    DegenerateLabelsError,
    ValidationError,
)
from .market_data import MonthlySeries

MODEL_FORMAT_VERSION = 1


class DirectionLabel(enum.Enum):
    # Declaration order is the tie-break order for argmax predictions.
    UP = "up"
    DOWN = "down"
    FLAT = "flat"


class Signal(enum.Enum):
    LONG = "long"
    SHORT = "short"
    FLAT = "flat"


CLASS_ORDER = (DirectionLabel.UP, DirectionLabel.DOWN, DirectionLabel.FLAT)
SIGNAL_ORDER = (Signal.LONG, Signal.SHORT, Signal.FLAT)


@dataclass(frozen=True)
class SignalSeries:
    """One trading signal per daily date."""

    dates: tuple
    signals: tuple

    def __post_init__(self):
        if len(self.dates) != len(self.signals):
            raise ValidationError("dates and signals lengths differ")
        if any(not isinstance(s, Signal) for s in self.signals):
            raise ValidationError("signals must be Signal values")

    def __len__(self) -> int:
        return len(self.signals)


def label_directions(
    series: MonthlySeries, flat_epsilon: float = 0.0
) -> list[DirectionLabel]:
    """Direction of each month-over-month change; length = input - 1."""
    if flat_epsilon < 0:
        raise ValidationError("flat_epsilon must be non-negative")
    if len(series) < 2:
        raise ValidationError("need at least 2 months to label directions")
    out = []
    for change in np.diff(series.values):
        if change > flat_epsilon:
            out.append(DirectionLabel.UP)
        elif change < -flat_epsilon:
            out.append(DirectionLabel.DOWN)
        else:
            out.append(DirectionLabel.FLAT)
    return out


# Feature recipe: lagged levels (1-3 months), lagged changes (1-3 months),
# and the 3-month mean of the changes. 7 features per month.
N_FEATURES = 7
_FEATURE_BURN_IN = 4  # first month index with a full feature vector


def build_direction_features(
    series: MonthlySeries, flat_epsilon: float = 0.0
) -> tuple[np.ndarray, list[DirectionLabel], tuple[str, ...]]:
    """Feature matrix, labels, and target months for direction training."""
    v = series.values
    if len(v) < _FEATURE_BURN_IN + 2:
        raise ValidationError("too few months to build features")
    d = np.diff(v)
    rows, labels, months = [], [], []
    all_labels = label_directions(series, flat_epsilon)  # label[i] is month i+1
    for t in range(_FEATURE_BURN_IN, len(v)):
        lag_levels = [v[t - 1], v[t - 2], v[t - 3]]
        lag_changes = [d[t - 2], d[t - 3], d[t - 4]]  # changes into months t-1..t-3
        rows.append(lag_levels + lag_changes + [float(np.mean(lag_changes))])
        labels.append(all_labels[t - 1])
        months.append(series.months[t])
    return np.array(rows), labels, tuple(months)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 400
    learning_rate: float = 0.5
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class DirectionModel:
    """One-vs-rest linear hinge classifier with an internal scaler."""

    weights: np.ndarray       # (3, n_features), rows in CLASS_ORDER
    biases: np.ndarray        # (3,)
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    epochs: int
    seed: int
    l2: float
    training_accuracy: float

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


def _standardize_features(X, mean, std):
    return (X - mean) / std


def train_direction_classifier(
    features: np.ndarray,
    labels: list[DirectionLabel],
    config: TrainConfig | None = None,
) -> DirectionModel:
    """Deterministic full-batch subgradient descent on the hinge loss.

    Each class gets a +1/-1 one-vs-rest problem; the step size decays as
    lr/sqrt(epoch). No randomness enters the updates, so identical inputs
    give bitwise-identical weights.
    """
    if config is None:
        config = TrainConfig()
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or len(X) != len(labels):
        raise ValidationError("features must be 2-D with one row per label")
    if len(X) < 24:
        raise ValidationError("need at least 24 training rows")
    if len({lab for lab in labels}) < 2:
        raise DegenerateLabelsError("training labels contain a single class")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    Xs = _standardize_features(X, mean, std)
    n, d = Xs.shape
    W = np.zeros((len(CLASS_ORDER), d))
    b = np.zeros(len(CLASS_ORDER))
    targets = np.array(
        [[1.0 if lab is cls else -1.0 for lab in labels] for cls in CLASS_ORDER]
    )
    for epoch in range(config.epochs):
        eta = config.learning_rate / np.sqrt(epoch + 1.0)
        margins = targets * (W @ Xs.T + b[:, None])
        active = (margins < 1.0).astype(float) * targets
        grad_w = config.l2 * W - (active @ Xs) / n
        grad_b = -active.sum(axis=1) / n
        W -= eta * grad_w
        b -= eta * grad_b
    scores = W @ Xs.T + b[:, None]
    predicted = np.argmax(scores, axis=0)
    truth = np.array([CLASS_ORDER.index(lab) for lab in labels])
    accuracy = float(np.mean(predicted == truth))
    return DirectionModel(
        weights=W,
        biases=b,
        scaler_mean=mean,
        scaler_std=std,
        epochs=config.epochs,
        seed=config.seed,
        l2=config.l2,
        training_accuracy=accuracy,
    )


def predict_directions(
    model: DirectionModel, features: np.ndarray
) -> list[DirectionLabel]:
    """Argmax of class scores; ties break toward the first class in order."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValidationError(
            f"feature width {X.shape} does not match model ({model.n_features})"
        )
    Xs = _standardize_features(X, model.scaler_mean, model.scaler_std)
    scores = model.weights @ Xs.T + model.biases[:, None]
    return [CLASS_ORDER[i] for i in np.argmax(scores, axis=0)]


def direction_to_signal(label: DirectionLabel) -> Signal:
    """Forecast increase -> short the majors, decrease -> long, flat -> flat."""
    if label is DirectionLabel.UP:
        return Signal.SHORT
    if label is DirectionLabel.DOWN:
        return Signal.LONG
    return Signal.FLAT


def expand_monthly_to_daily(
    monthly_signals: dict[str, Signal], daily_dates: tuple
) -> SignalSeries:
    """Broadcast each month's signal to all its trading days."""
    signals = []
    for day in daily_dates:
        month = f"{day.year:04d}-{day.month:02d}"
        if month not in monthly_signals:
            raise CoverageError(f"no monthly signal covers {month}")
        signals.append(monthly_signals[month])
    return SignalSeries(dates=tuple(daily_dates), signals=tuple(signals))


def save_model(model: DirectionModel, path: str) -> None:
    """Flat text persistence; floats are hex so round-trips are bitwise."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"mrpairs-direction-model v{MODEL_FORMAT_VERSION}\n")
        fh.write(f"classes {' '.join(c.value for c in CLASS_ORDER)}\n")
        fh.write(f"n_features {model.n_features}\n")
        fh.write(
            f"meta epochs={model.epochs} seed={model.seed} "
            f"l2={model.l2.hex()} accuracy={model.training_accuracy.hex()}\n"
        )
        for name, vec in (
            ("scaler_mean", model.scaler_mean),
            ("scaler_std", model.scaler_std),
            ("biases", model.biases),
        ):
            fh.write(f"{name} {' '.join(float(x).hex() for x in vec)}\n")
        for i, cls in enumerate(CLASS_ORDER):
            row = " ".join(float(x).hex() for x in model.weights[i])
            fh.write(f"weights:{cls.value} {row}\n")


def load_model(path: str) -> DirectionModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != f"mrpairs-direction-model v{MODEL_FORMAT_VERSION}":
        raise ValidationError(f"{path}: not a model file of a supported version")
    fields = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        fields[key] = rest
    if fields.get("classes") != " ".join(c.value for c in CLASS_ORDER):
        raise ValidationError(f"{path}: unexpected class order")
    meta = dict(item.split("=", 1) for item in fields["meta"].split())
    parse_vec = lambda s: np.array([float.fromhex(tok) for tok in s.split()])
    weights = np.vstack([parse_vec(fields[f"weights:{c.value}"]) for c in CLASS_ORDER])
    return DirectionModel(
        weights=weights,
        biases=parse_vec(fields["biases"]),
        scaler_mean=parse_vec(fields["scaler_mean"]),
        scaler_std=parse_vec(fields["scaler_std"]),
        epochs=int(meta["epochs"]),
        seed=int(meta["seed"]),
        l2=float.fromhex(meta["l2"]),
        training_accuracy=float.fromhex(meta["accuracy"]),
    )


def load_forecast_oracle_csv(path: str) -> dict[str, DirectionLabel]:
    """Parse a `month,direction` CSV with direction in {up,down,flat}."""
    by_value = {c.value: c for c in CLASS_ORDER}
    out: dict[str, DirectionLabel] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != [
            "month",
            "direction",
        ]:
            raise CsvParseError(f"{path}: expected header 'month,direction'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise CsvParseError(f"{path}:{lineno}: expected 2 fields")
            month = row[0].strip()
            direction = row[1].strip().lower()
            if direction not in by_value:
                raise CsvParseError(f"{path}:{lineno}: bad direction {row[1]!r}")
            if month in out:
                raise ValidationError(f"{path}: duplicate month {month}")
            out[month] = by_value[direction]
    if not out:
        raise ValidationError(f"{path}: no data rows")
    return out
