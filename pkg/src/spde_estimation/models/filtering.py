"""Pydantic models shared by the Kalman-Bucy filters."""
from enum import Enum
from functools import cached_property
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from ..utils.errors import DimensionMismatchError


class GaussianBelief(BaseModel):
    """KBF mean vector and covariance matrix."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    cov: np.ndarray

    @model_validator(mode="after")
    def _shapes(self) -> "GaussianBelief":
        n = np.shape(self.mean)[0]
        if np.shape(self.cov) != (n, n):
            raise DimensionMismatchError(
                f"covariance shape {np.shape(self.cov)} does not match mean length {n}"
            )
        return self

    @classmethod
    def isotropic(cls, mean: np.ndarray, std: float) -> "GaussianBelief":
        mean = np.asarray(mean, dtype=float)
        return cls(mean=mean.copy(), cov=std ** 2 * np.eye(mean.size))


class ObservationModel(BaseModel):
    """Linear observation operator H with noise covariance R."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    h_matrix: np.ndarray
    r_matrix: np.ndarray
    dt: float = Field(..., gt=0)

    @field_validator("h_matrix", "r_matrix")
    @classmethod
    def _matrix(cls, value: np.ndarray) -> np.ndarray:
        value = np.atleast_2d(np.asarray(value, dtype=float))
        if value.ndim != 2:
            raise ValueError("expected a 2-D matrix")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "ObservationModel":
        r, n = self.h_matrix.shape
        if r > n:
            raise ValueError(f"more observations ({r}) than state components ({n})")
        if self.r_matrix.shape != (r, r):
            raise DimensionMismatchError(f"R must be {r}x{r}, got {self.r_matrix.shape}")
        if not np.allclose(self.r_matrix, self.r_matrix.T, atol=1e-12):
            raise ValueError("R must be symmetric")
        try:
            np.linalg.cholesky(self.r_matrix)
        except np.linalg.LinAlgError as e:
            raise ValueError("R must be positive definite") from e
        return self

    @property
    def n_obs(self) -> int:
        return self.h_matrix.shape[0]

    @property
    def n_state(self) -> int:
        return self.h_matrix.shape[1]

    @cached_property
    def r_factor(self) -> Tuple[np.ndarray, bool]:
        return linalg.cho_factor(self.r_matrix)

    @cached_property
    def r_sqrt(self) -> np.ndarray:
        """Lower Cholesky factor of R."""
        return np.linalg.cholesky(self.r_matrix)

    def solve_r(self, rhs: np.ndarray) -> np.ndarray:
        """Apply R^-1 along the first axis of rhs."""
        return linalg.cho_solve(self.r_factor, rhs)

    @cached_property
    def gain_map(self) -> np.ndarray:
        """H^T R^-1, shape (n, r)."""
        return self.solve_r(self.h_matrix).T

    def check_state(self, vector: np.ndarray) -> None:
        if np.shape(vector)[-1] != self.n_state:
            raise DimensionMismatchError(
                f"state length {np.shape(vector)[-1]} does not match H with {self.n_state} columns"
            )


class ObservationIncrement(BaseModel):
    """Measurement increment dy over one time step."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dy: np.ndarray
    time_index: int = 0

    @field_validator("dy")
    @classmethod
    def _finite(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError("observation increment contains non-finite entries")
        return value


class TaperKind(str, Enum):
    """Compactly supported correlation tapers."""
    GASPARI_COHN = "gaspari_cohn"


class LocalizationSpec(BaseModel):
    """Distance-based covariance taper."""
    model_config = ConfigDict(frozen=True)

    radius: float = Field(..., gt=0)
    kind: TaperKind = TaperKind.GASPARI_COHN


class StateEnsemble(BaseModel):
    """M state members stored row-wise."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    members: np.ndarray

    @field_validator("members")
    @classmethod
    def _shape(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        if value.ndim != 2 or value.shape[0] < 2:
            raise ValueError("an ensemble needs a (M, n) array with M >= 2")
        return value

    @property
    def m_size(self) -> int:
        return self.members.shape[0]
