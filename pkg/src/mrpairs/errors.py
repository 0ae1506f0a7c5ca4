"""Exception hierarchy shared across the engine.

Every error carries a CLI exit code: 2 for validation problems,
3 for numerical degeneracies, 4 for I/O failures.
"""


class PipelineError(Exception):
    """Base class for all engine errors."""

    exit_code = 2


class ValidationError(PipelineError):
    """Bad input: malformed files, invalid parameters, broken invariants."""

    exit_code = 2


class CsvParseError(ValidationError):
    """A CSV row failed to parse; message names the offending line."""


class InsufficientOverlapError(ValidationError):
    """Too few common dates across the series being aligned."""


class CoverageError(ValidationError):
    """A daily date falls in a month with no monthly signal."""


class AlignmentError(ValidationError):
    """Series that must share a calendar do not."""


class DegenerateInputError(PipelineError):
    """Numerically degenerate input (zero variance, constant series, ...)."""

    exit_code = 3


class SingularityError(DegenerateInputError):
    """Rank-deficient regressor or moment matrix."""


class NoCointegrationError(DegenerateInputError):
    """Hedge ratio requested from a rank-zero Johansen outcome."""


class DegenerateLabelsError(DegenerateInputError):
    """Classifier training set contains a single class."""


class SharpeUndefinedError(DegenerateInputError):
    """Zero return variance; APR and max drawdown are still available."""

    def __init__(self, message: str, apr: float, max_drawdown: float):
        super().__init__(message)
        self.apr = apr
        self.max_drawdown = max_drawdown


class OptimizationDegenerateError(DegenerateInputError):
    """Every weight probe produced a degenerate backtest."""
