"""Periodic finite-difference stencils and the advection drift operator."""
from typing import Union

import numpy as np

from ..models.states import StencilKind, TransportStencil
from ..utils.errors import DimensionMismatchError, require_finite


def _shift(u: np.ndarray, offset: int) -> np.ndarray:
    """Periodic u_{i+offset} along the last axis."""
    return np.roll(u, -offset, axis=-1)


def apply_stencil(u: np.ndarray, dx: float, kind: Union[StencilKind, str]) -> np.ndarray:
    """
    Apply a periodic difference operator along the last axis.

    Args:
        u: Grid values, shape (..., N)
        dx: Grid spacing
        kind: Operator name

    Returns:
        Array of the same shape as u
    """
    u = np.asarray(u, dtype=float)
    require_finite(u, "stencil input")
    return _stencil(u, dx, kind)


def _stencil(u: np.ndarray, dx: float, kind: Union[StencilKind, str]) -> np.ndarray:
    kind = StencilKind(kind)
    if kind in (StencilKind.D1, StencilKind.D1T, StencilKind.D1D1T) and u.shape[-1] < 3:
        raise ValueError("the three-point stencils need at least 3 grid points")

    if kind is StencilKind.D1:
        return (3 * u - 4 * _shift(u, -1) + _shift(u, -2)) / (2 * dx)
    if kind is StencilKind.D1T:
        return (_shift(u, 2) - 4 * _shift(u, 1) + 3 * u) / (2 * dx)
    if kind is StencilKind.D1D1T:
        return (3 * _shift(u, 2) - 16 * _shift(u, 1) + 26 * u
                - 16 * _shift(u, -1) + 3 * _shift(u, -2)) / (4 * dx ** 2)
    if kind is StencilKind.D2:
        return (u - _shift(u, -1)) / dx
    if kind is StencilKind.D2T:
        return (u - _shift(u, 1)) / dx
    return (-_shift(u, 1) + 2 * u - _shift(u, -1)) / dx ** 2


def stencil_matrix(kind: Union[StencilKind, str], n: int, dx: float) -> np.ndarray:
    """Dense N x N matrix of a stencil."""
    return _stencil(np.eye(n), dx, kind).T


def advection_drift(
    u: np.ndarray,
    c: np.ndarray,
    mu: float,
    dx: float,
    orientation: TransportStencil = TransportStencil.UPWIND,
) -> np.ndarray:
    """
    Semi-discrete drift of du/dt = d(Cu)/dx + mu d2u/dx2.

    ``printed`` uses D1(c*u) - mu D1D1T u; ``upwind`` uses -D1T(c*u) - mu D1D1T u,
    which differences along the transport direction for C > 0.
    """
    u = np.asarray(u, dtype=float)
    c = np.asarray(c, dtype=float)
    if u.shape[-1] != c.shape[-1]:
        raise DimensionMismatchError(f"state length {u.shape[-1]} != field length {c.shape[-1]}")
    flux = c * u
    if TransportStencil(orientation) is TransportStencil.PRINTED:
        transport = _stencil(flux, dx, StencilKind.D1)
    else:
        transport = -_stencil(flux, dx, StencilKind.D1T)
    return transport - mu * _stencil(u, dx, StencilKind.D1D1T)


def drift_matrix(
    c: np.ndarray,
    mu: float,
    dx: float,
    orientation: TransportStencil = TransportStencil.UPWIND,
) -> np.ndarray:
    """Dense advection drift F with F @ u == advection_drift(u, ...)."""
    n = len(c)
    if TransportStencil(orientation) is TransportStencil.PRINTED:
        transport = stencil_matrix(StencilKind.D1, n, dx) * c[None, :]
    else:
        transport = -stencil_matrix(StencilKind.D1T, n, dx) * c[None, :]
    return transport - mu * stencil_matrix(StencilKind.D1D1T, n, dx)


def wave_force(u: np.ndarray, c: np.ndarray, dx: float) -> np.ndarray:
    """(C_{i+1} w_{i+1} - C_i w_i)/dx with w_i = (u_i - u_{i-1})/dx."""
    w = _stencil(u, dx, StencilKind.D2)
    return -_stencil(c * w, dx, StencilKind.D2T)


def wave_strain(u: np.ndarray, dx: float) -> np.ndarray:
    return _stencil(u, dx, StencilKind.D2)
