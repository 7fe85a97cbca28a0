"""Fourier parameterization of strictly positive coefficient fields."""
import json
import logging
from typing import Union

import numpy as np

from ..models.fields import ClosedFormField, FourierCoefficients, Grid

logger = logging.getLogger(__name__)


def fourier_basis(n_modes: int, x: np.ndarray) -> np.ndarray:
    """
    Design matrix of the log-field series.

    Args:
        n_modes: Number of (A_k, B_k) pairs
        x: Evaluation points

    Returns:
        Array of shape (len(x), 2*n_modes+1) in canonical coefficient order
    """
    x = np.asarray(x, dtype=float)
    columns = [np.ones_like(x)]
    for k in range(1, n_modes + 1):
        columns.append(np.sin(k * x) / k ** 2)
        columns.append(np.cos(k * x) / k ** 2)
    return np.stack(columns, axis=-1)


def sample_true_coefficients(n_modes: int, rng: np.random.Generator) -> FourierCoefficients:
    """Draw 2*n_modes+1 i.i.d. standard-normal coefficients."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    return FourierCoefficients(
        n_modes=n_modes,
        coeffs=tuple(float(v) for v in rng.standard_normal(2 * n_modes + 1)),
    )


def log_field(coeffs: FourierCoefficients, grid: Grid) -> np.ndarray:
    return fourier_basis(coeffs.n_modes, grid.points) @ coeffs.array


def evaluate_field(coeffs: FourierCoefficients, grid: Grid) -> np.ndarray:
    """C(x_i) = exp(g(x_i)); positive for any finite coefficients."""
    return np.exp(log_field(coeffs, grid))


def evaluate_log_field(source: Union[FourierCoefficients, ClosedFormField], grid: Grid) -> np.ndarray:
    if isinstance(source, ClosedFormField):
        return source.log_values(grid.points)
    return log_field(source, grid)


def velocity_values(source: Union[FourierCoefficients, ClosedFormField], grid: Grid) -> np.ndarray:
    """Field values on the grid from either coefficients or a closed-form truth."""
    return np.exp(evaluate_log_field(source, grid))


def project_log_field(source: ClosedFormField, grid: Grid, n_modes: int) -> FourierCoefficients:
    """
    Least-squares coefficients of a closed-form log-field on the grid.

    Used as the RMSE reference when the truth is not a coefficient vector.
    """
    basis = fourier_basis(n_modes, grid.points)
    solution, *_ = np.linalg.lstsq(basis, source.log_values(grid.points), rcond=None)
    residual = np.max(np.abs(basis @ solution - source.log_values(grid.points)))
    if residual > 1e-6:
        logger.info(f"Truth {source.value} is not representable with {n_modes} modes "
                    f"(max residual {residual:.3g}); using its projection as reference")
    return FourierCoefficients.from_array(solution)


def coeffs_to_json(coeffs: FourierCoefficients) -> str:
    """Flat JSON array in canonical order."""
    return json.dumps(list(coeffs.coeffs))


def coeffs_from_json(text: str) -> FourierCoefficients:
    return FourierCoefficients.from_array(np.asarray(json.loads(text), dtype=float))
