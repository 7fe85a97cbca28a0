"""Error types and numerical guards."""
import functools
from typing import Callable, Optional

import numpy as np


class EstimationError(Exception):
    """Base exception for coefficient estimation errors."""
    pass


class ConfigurationError(EstimationError):
    """Invalid experiment configuration."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class NumericalBlowUpError(EstimationError):
    """A stepper or filter produced non-finite values."""
    pass


class DimensionMismatchError(EstimationError, ValueError):
    """Array shapes do not agree."""
    pass


class InsufficientSamplesError(EstimationError, ValueError):
    """Too few samples for the requested statistic."""
    pass


def _all_finite(value) -> bool:
    if isinstance(value, np.ndarray):
        return bool(np.all(np.isfinite(value)))
    if isinstance(value, (float, np.floating)):
        # -inf log-likelihoods are legitimate, nan is not
        return not np.isnan(value)
    if isinstance(value, tuple):
        return all(_all_finite(v) for v in value)
    for attr in ("u", "p", "mean", "cov", "members"):
        field = getattr(value, attr, None)
        if isinstance(field, np.ndarray) and not np.all(np.isfinite(field)):
            return False
    return True


def guard_finite(func: Callable) -> Callable:
    """
    Decorator that turns non-finite results into NumericalBlowUpError.

    Args:
        func: Stepper or filter function to wrap

    Returns:
        Wrapped function
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            result = func(*args, **kwargs)
        if not _all_finite(result):
            raise NumericalBlowUpError(
                f"{func.__name__} produced non-finite values; the step size is likely unstable"
            )
        return result

    return wrapper


def require_finite(array: np.ndarray, name: str) -> None:
    """Reject non-finite input arrays."""
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite values")


class DivergenceLog:
    """Record proposals whose likelihood evaluation failed."""

    def __init__(self):
        self.entries: list[dict] = []

    def log_error(
        self,
        cycle: int,
        error: Exception,
        context: Optional[dict] = None
    ):
        """
        Log a failed evaluation.

        Args:
            cycle: MH cycle index
            error: The exception that occurred
            context: Additional context information
        """
        self.entries.append({
            'cycle': cycle,
            'error': str(error),
            'error_type': type(error).__name__,
            'context': context or {}
        })

    def has_errors(self) -> bool:
        return len(self.entries) > 0

    def get_error_summary(self) -> dict:
        """Count logged failures by error type."""
        summary: dict[str, int] = {}
        for entry in self.entries:
            error_type = entry['error_type']
            summary[error_type] = summary.get(error_type, 0) + 1
        return summary
