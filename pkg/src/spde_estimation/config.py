"""Configuration management for coefficient estimation experiments."""
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .models.fields import ClosedFormField, FourierCoefficients, Grid
from .models.filtering import LocalizationSpec, TaperKind
from .models.inference import ProposalMode, ProposalSpec
from .models.states import ModelConfig, ModelKind, TransportStencil
from .utils.errors import ConfigurationError

# box-plot statistics need five post-burn-in samples
MIN_SAMPLES = 5


class Method(str, Enum):
    """Estimation procedures."""
    MH_KBF = "mh_kbf"
    MH_ENKBF = "mh_enkbf"
    DUAL_KBF_ENKBF = "dual_kbf_enkbf"
    DUAL_ENKBF = "dual_enkbf"

    @property
    def is_mh(self) -> bool:
        return self in (Method.MH_KBF, Method.MH_ENKBF)

    @property
    def uses_ensemble_state(self) -> bool:
        return self in (Method.MH_ENKBF, Method.DUAL_ENKBF)


class ExperimentConfig(BaseSettings):
    """Experiment settings loaded from TOML, environment variables and CLI flags."""
    model_config = SettingsConfigDict(
        env_prefix="SPDE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="forbid",
        protected_namespaces=(),
    )

    # Model
    model_kind: ModelKind = ModelKind.ADVECTION
    n_points: int = Field(32, ge=3)
    length: float = Field(2 * math.pi, gt=0)
    dt: float = Field(0.01, gt=0)
    n_steps: int = Field(100, ge=1)
    mu: float = Field(0.01, ge=0)
    sigma: float = Field(0.1, ge=0)
    obs_noise: float = Field(0.1, gt=0)
    transport_stencil: TransportStencil = TransportStencil.UPWIND

    # Truth: a closed-form log-field, explicit coefficients, or random draws
    truth_log_field: Optional[ClosedFormField] = None
    truth_coeffs: Optional[List[float]] = None

    # Estimation
    method: Method = Method.MH_KBF
    n_modes: int = Field(2, ge=1)
    m_size: int = Field(100, ge=2)
    l_particles: int = Field(100, ge=1)
    n_cycles: int = Field(300, ge=1)
    burn_in: int = Field(150, ge=0)
    localization_radius: Optional[float] = Field(10.0, gt=0)
    localization_kind: TaperKind = TaperKind.GASPARI_COHN
    phi: float = Field(math.pi / 4, gt=0, lt=math.pi / 2)
    omega: float = Field(1.0, gt=0)
    proposal_mode: ProposalMode = ProposalMode.PER_COORDINATE
    prior_std: Optional[float] = Field(None, gt=0)
    init_coeffs: Optional[List[float]] = None
    initial_spread: float = Field(0.1, gt=0)
    param_spread: float = Field(0.5, gt=0)
    ensemble_process_noise: bool = True

    # Execution
    n_chains: int = Field(1, ge=1)
    chain_batch_size: int = Field(4, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    filter_seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    log_level: str = "INFO"

    @model_validator(mode="after")
    def _cross_field(self) -> "ExperimentConfig":
        problems = []
        horizon = self.n_cycles if self.method.is_mh else self.n_steps
        if horizon - self.burn_in < MIN_SAMPLES:
            problems.append(f"burn_in ({self.burn_in}) must leave at least {MIN_SAMPLES} of the "
                            f"{'n_cycles' if self.method.is_mh else 'n_steps'} ({horizon}) as samples")
        if (self.method.uses_ensemble_state and self.localization_radius is not None
                and self.localization_radius > self.n_points / 2):
            problems.append(f"localization_radius ({self.localization_radius}) exceeds n_points/2")
        n_coeffs = 2 * self.n_modes + 1
        if self.truth_coeffs is not None:
            if len(self.truth_coeffs) < n_coeffs or len(self.truth_coeffs) % 2 == 0:
                problems.append(f"truth_coeffs needs an odd length >= {n_coeffs}, got {len(self.truth_coeffs)}")
            if self.truth_log_field is not None:
                problems.append("set either truth_log_field or truth_coeffs, not both")
        if self.init_coeffs is not None and len(self.init_coeffs) != n_coeffs:
            problems.append(f"init_coeffs needs length {n_coeffs}, got {len(self.init_coeffs)}")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    @property
    def grid(self) -> Grid:
        return Grid(n_points=self.n_points, length=self.length)

    @property
    def effective_filter_seed(self) -> int:
        return self.seed if self.filter_seed is None else self.filter_seed

    def model_settings(self, velocity) -> ModelConfig:
        return ModelConfig(grid=self.grid, dt=self.dt, mu=self.mu, sigma=self.sigma,
                           velocity=velocity, transport_stencil=self.transport_stencil)

    def proposal(self) -> ProposalSpec:
        return ProposalSpec(phi=self.phi, omega=self.omega, mode=self.proposal_mode, prior_std=self.prior_std)

    def localization(self) -> Optional[LocalizationSpec]:
        if self.localization_radius is None:
            return None
        return LocalizationSpec(radius=self.localization_radius, kind=self.localization_kind)

    def initial_coefficients(self) -> FourierCoefficients:
        if self.init_coeffs is None:
            return FourierCoefficients.zeros(self.n_modes)
        return FourierCoefficients(n_modes=self.n_modes, coeffs=tuple(self.init_coeffs))

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


_DESK = {
    "n_points": 32, "dt": 0.005, "n_steps": 1000, "mu": 0.01, "sigma": 0.05, "obs_noise": 0.05,
    "n_modes": 2, "truth_coeffs": [0.0, 1.0, 0.0, 0.0, 0.0],
    "m_size": 100, "l_particles": 100, "localization_radius": 8.0,
}

_FULL = {
    "n_points": 100, "dt": 0.01, "n_steps": 1000, "mu": 0.001, "n_modes": 10,
    "m_size": 1000, "localization_radius": 10.0,
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "advection-desk": {**_DESK, "model_kind": "advection", "method": "mh_kbf",
                       "n_cycles": 300, "burn_in": 150, "phi": 0.1},
    "wave-desk": {**_DESK, "model_kind": "wave", "method": "mh_kbf", "sigma": 0.2,
                  "n_cycles": 300, "burn_in": 150, "phi": 0.1},
    "dual-advection-desk": {**_DESK, "model_kind": "advection", "method": "dual_kbf_enkbf",
                            "n_steps": 500, "burn_in": 250},
    "dual-wave-desk": {**_DESK, "model_kind": "wave", "method": "dual_kbf_enkbf", "sigma": 0.2,
                       "n_steps": 500, "burn_in": 250},
    "advection-full": {**_FULL, "model_kind": "advection", "method": "mh_enkbf", "sigma": 0.1,
                       "truth_log_field": "sin2pi", "n_cycles": 1000, "burn_in": 500},
    "wave-full": {**_FULL, "model_kind": "wave", "method": "mh_enkbf", "sigma": 0.2,
                  "truth_log_field": "sin", "n_cycles": 1000, "burn_in": 500},
    "dual-advection-full": {**_FULL, "model_kind": "advection", "method": "dual_enkbf", "sigma": 0.1,
                            "truth_log_field": "sin2pi", "l_particles": 1000, "burn_in": 500},
    "dual-wave-full": {**_FULL, "model_kind": "wave", "method": "dual_enkbf", "sigma": 0.2,
                       "truth_log_field": "sin", "l_particles": 1000, "burn_in": 500},
}


def load_toml(path: Path) -> Dict[str, Any]:
    with path.open("rb") as f:
        return tomllib.load(f)


def get_settings(
    config_path: Optional[Path] = None,
    preset: Optional[str] = None,
    **overrides: Any,
) -> ExperimentConfig:
    """
    Build experiment settings.

    Precedence: overrides, then the TOML file, then the preset, then
    SPDE_* environment variables / .env, then field defaults.

    Args:
        config_path: Optional TOML file with a flat table of fields
        preset: Optional preset name from PRESETS
        overrides: Explicit values, typically CLI flags

    Returns:
        ExperimentConfig instance
    """
    values: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError([f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"])
        values.update(PRESETS[preset])
    if config_path is not None:
        values.update(load_toml(config_path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    env_file = Path(".env")
    if env_file.exists():
        return ExperimentConfig(_env_file=env_file, **values)
    return ExperimentConfig(**values)
