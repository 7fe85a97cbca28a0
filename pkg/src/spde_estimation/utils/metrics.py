"""Error metrics and box-plot statistics for parameter estimates."""
from typing import Sequence, Union

import numpy as np

from ..models.fields import FourierCoefficients
from ..models.inference import BoxplotStats
from .errors import DimensionMismatchError, InsufficientSamplesError

Samples = Union[np.ndarray, Sequence[FourierCoefficients]]


def _as_matrix(samples: Samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return np.atleast_2d(samples.astype(float))
    if len(samples) == 0:
        raise InsufficientSamplesError("no samples given")
    return np.array([s.coeffs for s in samples], dtype=float).reshape(len(samples), -1)


def compute_rmse(samples: Samples, truth: FourierCoefficients) -> np.ndarray:
    """
    Per-coordinate root mean square error of samples against the truth.

    Args:
        samples: Post-burn-in samples, shape (K, 2*n_modes+1)
        truth: Reference coefficients

    Returns:
        Array of length 2*n_modes+1
    """
    matrix = _as_matrix(samples)
    if matrix.shape[0] == 0 or matrix.size == 0:
        raise InsufficientSamplesError("RMSE needs at least one sample")
    if matrix.shape[1] != truth.size:
        raise DimensionMismatchError(f"samples have {matrix.shape[1]} coordinates, truth has {truth.size}")
    return np.sqrt(np.mean((matrix - truth.array) ** 2, axis=0))


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    """Quartiles by linear interpolation; whiskers at the extreme points within 1.5 IQR."""
    values = np.asarray(values, dtype=float)
    if values.size < 5:
        raise InsufficientSamplesError(f"box-plot statistics need at least 5 samples, got {values.size}")
    q1, median, q3 = np.percentile(values, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    outliers = np.sort(values[(values < lo_fence) | (values > hi_fence)])
    return BoxplotStats(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        outliers=[float(v) for v in outliers],
    )


def boxplot_table(samples: Samples) -> list[BoxplotStats]:
    """One box per coefficient column."""
    matrix = _as_matrix(samples)
    return [boxplot_stats(matrix[:, i]) for i in range(matrix.shape[1])]
