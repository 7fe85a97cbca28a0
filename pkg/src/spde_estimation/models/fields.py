"""Pydantic models for coefficient fields and the spatial grid."""
import math
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FourierCoefficients(BaseModel):
    """
    Hyper-parameter vector of a log-field.

    Ordered (A0, A1, B1, A2, B2, ..., A_n, B_n); the field is
    C(x) = exp(A0 + sum_k A_k/k^2 sin(kx) + B_k/k^2 cos(kx)).
    """
    model_config = ConfigDict(frozen=True)

    n_modes: int = Field(..., ge=1)
    coeffs: Tuple[float, ...]

    @field_validator("coeffs")
    @classmethod
    def _finite(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(v) for v in value):
            raise ValueError("coefficients must be finite")
        return value

    @model_validator(mode="after")
    def _length(self) -> "FourierCoefficients":
        if len(self.coeffs) != 2 * self.n_modes + 1:
            raise ValueError(
                f"expected {2 * self.n_modes + 1} coefficients for {self.n_modes} modes, "
                f"got {len(self.coeffs)}"
            )
        return self

    @classmethod
    def from_array(cls, values: np.ndarray) -> "FourierCoefficients":
        values = np.asarray(values, dtype=float).ravel()
        if values.size < 3 or values.size % 2 == 0:
            raise ValueError(f"coefficient vector length must be odd and >= 3, got {values.size}")
        return cls(n_modes=(values.size - 1) // 2, coeffs=tuple(float(v) for v in values))

    @classmethod
    def zeros(cls, n_modes: int) -> "FourierCoefficients":
        return cls(n_modes=n_modes, coeffs=(0.0,) * (2 * n_modes + 1))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def size(self) -> int:
        return len(self.coeffs)

    def mode_numbers(self) -> np.ndarray:
        """Mode number per coordinate: 1 for A0, k for the (A_k, B_k) pair."""
        return np.concatenate(([1], np.repeat(np.arange(1, self.n_modes + 1), 2))).astype(float)

    def labels(self) -> list[str]:
        names = ["A0"]
        for k in range(1, self.n_modes + 1):
            names += [f"A{k}", f"B{k}"]
        return names


class Grid(BaseModel):
    """Periodic uniform 1-D grid with points x_i = i*dx, i = 1..N."""
    model_config = ConfigDict(frozen=True)

    n_points: int = Field(..., ge=1)
    length: float = Field(2 * math.pi, gt=0)

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return np.arange(1, self.n_points + 1) * self.spacing

    def periodic_distance(self) -> np.ndarray:
        """Matrix of wrapped index distances between grid points."""
        idx = np.arange(self.n_points)
        diff = np.abs(idx[:, None] - idx[None, :])
        return np.minimum(diff, self.n_points - diff)


class ClosedFormField(str, Enum):
    """Closed-form log-fields used as ground truth."""
    SIN_2PI = "sin2pi"
    SIN = "sin"

    def log_values(self, x: np.ndarray) -> np.ndarray:
        if self is ClosedFormField.SIN_2PI:
            return np.sin(2 * np.pi * x)
        return np.sin(x)
