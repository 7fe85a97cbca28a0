"""Pydantic models for parameter inference: MH chains, dual clouds, results."""
import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .fields import FourierCoefficients


class ProposalMode(str, Enum):
    """How the mode number scales the proposal spread."""
    PER_COORDINATE = "per_coordinate"
    FIXED = "fixed"


class ProposalSpec(BaseModel):
    """Autoregressive proposal N(lambda cos(phi), (omega/aleph) sin(phi))."""
    model_config = ConfigDict(frozen=True)

    phi: float = math.pi / 4
    omega: float = Field(1.0, gt=0)
    mode: ProposalMode = ProposalMode.PER_COORDINATE
    prior_std: Optional[float] = Field(None, gt=0)

    @field_validator("phi")
    @classmethod
    def _angle(cls, value: float) -> float:
        if not 0 < value < math.pi / 2:
            raise ValueError("phi must lie strictly between 0 and pi/2")
        return value

    def scales(self, coeffs: FourierCoefficients) -> np.ndarray:
        """Per-coordinate proposal standard deviation."""
        if self.mode is ProposalMode.FIXED:
            aleph = np.full(coeffs.size, float(coeffs.n_modes))
        else:
            aleph = coeffs.mode_numbers()
        return self.omega / aleph * math.sin(self.phi)


class ChainEntry(BaseModel):
    """One recorded MH cycle."""
    model_config = ConfigDict(frozen=True)

    coeffs: FourierCoefficients
    loglik: float
    accepted: bool


class ChainState(BaseModel):
    """Incumbent point of an MH chain with its recorded history."""

    current: FourierCoefficients
    current_loglik: float
    history: List[ChainEntry] = Field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        if not self.history:
            return 0.0
        return sum(entry.accepted for entry in self.history) / len(self.history)

    def samples(self, burn_in: int = 0) -> np.ndarray:
        """History coefficients from index burn_in on, shape (n, 2*n_modes+1)."""
        return np.array([entry.coeffs.coeffs for entry in self.history[burn_in:]], dtype=float)


class ParameterParticleCloud(BaseModel):
    """L equally weighted parameter hypotheses, each with its own state estimate."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    particles: np.ndarray
    states: np.ndarray

    @model_validator(mode="after")
    def _counts(self) -> "ParameterParticleCloud":
        if self.particles.ndim != 2 or self.states.ndim != 2:
            raise ValueError("particles and states must be 2-D arrays")
        if self.particles.shape[0] != self.states.shape[0]:
            raise ValueError(
                f"{self.particles.shape[0]} particles but {self.states.shape[0]} state estimates"
            )
        return self

    @property
    def l_size(self) -> int:
        return self.particles.shape[0]

    @property
    def parameter_mean(self) -> np.ndarray:
        return self.particles.mean(axis=0)

    @property
    def state_mean(self) -> np.ndarray:
        return self.states.mean(axis=0)


class DualTrajectory(BaseModel):
    """Per-step cloud means of a dual filter run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    parameter_means: np.ndarray
    state_means: np.ndarray
    parameter_spread: np.ndarray


class BoxplotStats(BaseModel):
    """Five-number summary with Tukey whiskers."""

    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: List[float] = Field(default_factory=list)


class ResultBundle(BaseModel):
    """Everything one experiment produced."""

    method: str
    labels: List[str]
    reference: List[float]
    rmse: List[float]
    boxplots: List[BoxplotStats]
    acceptance_rates: List[float] = Field(default_factory=list)
    divergences: Dict[str, int] = Field(default_factory=dict)
    final_estimate: List[float]
    timings: Dict[str, float] = Field(default_factory=dict)
    config: Dict[str, Any]

    @model_validator(mode="after")
    def _lengths(self) -> "ResultBundle":
        if len(self.rmse) != len(self.labels):
            raise ValueError("one RMSE value per coefficient is required")
        return self

    def summary(self) -> Dict[str, Any]:
        """JSON-ready summary without wall-clock timings."""
        return self.model_dump(mode="json", exclude={"timings"})
