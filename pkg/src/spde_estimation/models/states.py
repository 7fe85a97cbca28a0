"""Pydantic models for SPDE states and model settings."""
from enum import Enum
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .fields import ClosedFormField, FourierCoefficients, Grid


class ModelKind(str, Enum):
    """Stochastic PDE families."""
    ADVECTION = "advection"
    WAVE = "wave"


class TransportStencil(str, Enum):
    """Orientation of the three-point transport stencil."""
    UPWIND = "upwind"
    PRINTED = "printed"


class StencilKind(str, Enum):
    """Periodic finite-difference operators."""
    D1 = "D1"
    D1T = "D1T"
    D2 = "D2"
    D2T = "D2T"
    D1D1T = "D1D1T"
    D2D2T = "D2D2T"


class ModelConfig(BaseModel):
    """Discretization and physical constants of one SPDE."""
    model_config = ConfigDict(frozen=True)

    grid: Grid
    dt: float = Field(..., gt=0)
    mu: float = Field(0.0, ge=0)
    sigma: float = Field(0.0, ge=0)
    velocity: Union[FourierCoefficients, ClosedFormField]
    transport_stencil: TransportStencil = TransportStencil.UPWIND

    def with_velocity(self, velocity: Union[FourierCoefficients, ClosedFormField]) -> "ModelConfig":
        return self.model_copy(update={"velocity": velocity})


class NoiseIncrement(BaseModel):
    """One time step of discretized space-time white noise."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    step: float = Field(..., gt=0)
    spacing: float = Field(..., gt=0)
    sigma: float = Field(..., ge=0)

    @property
    def variance(self) -> float:
        return self.sigma ** 2 * self.step / self.spacing


class AdvectionState(BaseModel):
    """Grid values u_i of the advection model at time index n."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray
    time_index: int = Field(0, ge=0)

    @field_validator("u")
    @classmethod
    def _vector(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        if value.ndim != 1:
            raise ValueError("u must be one-dimensional")
        return value

    @property
    def vector(self) -> np.ndarray:
        return self.u


class WaveState(BaseModel):
    """Displacement u and velocity p of the wave model at time index n."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray
    p: np.ndarray
    time_index: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _shapes(self) -> "WaveState":
        if np.shape(self.u) != np.shape(self.p) or np.ndim(self.u) != 1:
            raise ValueError("u and p must be one-dimensional with equal length")
        return self

    @property
    def vector(self) -> np.ndarray:
        """Stacked (p, u) vector."""
        return np.concatenate((self.p, self.u))

    @classmethod
    def from_vector(cls, vector: np.ndarray, time_index: int = 0) -> "WaveState":
        n = vector.shape[-1] // 2
        return cls(p=vector[:n].copy(), u=vector[n:].copy(), time_index=time_index)


SPDEState = Union[AdvectionState, WaveState]
