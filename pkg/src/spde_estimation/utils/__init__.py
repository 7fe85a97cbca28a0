"""Error types, numerical guards and estimate metrics."""
from .errors import (
    EstimationError,
    ConfigurationError,
    NumericalBlowUpError,
    DimensionMismatchError,
    InsufficientSamplesError,
    guard_finite,
    require_finite,
    DivergenceLog
)
from .metrics import (
    compute_rmse,
    boxplot_stats,
    boxplot_table
)

__all__ = [
    # Errors
    "EstimationError",
    "ConfigurationError",
    "NumericalBlowUpError",
    "DimensionMismatchError",
    "InsufficientSamplesError",
    "guard_finite",
    "require_finite",
    "DivergenceLog",
    # Metrics
    "compute_rmse",
    "boxplot_stats",
    "boxplot_table"
]
