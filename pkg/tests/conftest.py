"""Shared fixtures for the estimation test suite."""
import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import pytest

from spde_estimation.dynamics.noise import derive_rng
from spde_estimation.dynamics.observation import default_observation_model, synthesize_observations
from spde_estimation.dynamics.steppers import simulate
from spde_estimation.models.fields import FourierCoefficients, Grid
from spde_estimation.models.filtering import ObservationIncrement, ObservationModel
from spde_estimation.models.states import ModelConfig, ModelKind

TwinData = Tuple[np.ndarray, ObservationModel, List[ObservationIncrement]]


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """No SPDE_* variables or stray .env file leak into a test."""
    for key in list(os.environ):
        if key.upper().startswith("SPDE_"):
            monkeypatch.delenv(key)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def grid32() -> Grid:
    return Grid(n_points=32)


@pytest.fixture
def truth_coeffs() -> FourierCoefficients:
    return FourierCoefficients(n_modes=2, coeffs=(0.0, 1.0, 0.0, 0.0, 0.0))


@pytest.fixture
def advection_config(grid32, truth_coeffs) -> ModelConfig:
    return ModelConfig(grid=grid32, dt=0.005, mu=0.01, sigma=0.1, velocity=truth_coeffs)


@pytest.fixture
def wave_config(grid32, truth_coeffs) -> ModelConfig:
    return ModelConfig(grid=grid32, dt=0.005, mu=0.01, sigma=0.2, velocity=truth_coeffs)


@pytest.fixture
def make_twin() -> Callable[..., TwinData]:
    """Build truth trajectory plus observations for a model and seed."""

    def _make(
        model_kind: ModelKind,
        config: ModelConfig,
        n_steps: int,
        seed: int = 0,
        obs_noise: float = 0.1,
    ) -> TwinData:
        trajectory = simulate(model_kind, config, n_steps, derive_rng(seed, "truth-state"))
        obs = default_observation_model(model_kind, config.grid, config.dt, obs_noise)
        obs_seq = synthesize_observations(trajectory, obs, derive_rng(seed, "observations"))
        return trajectory, obs, obs_seq

    return _make


SMOKE_SETTINGS = {
    "n_points": 16,
    "dt": 0.005,
    "n_steps": 100,
    "n_cycles": 50,
    "burn_in": 25,
    "localization_radius": 4.0,
    "truth_coeffs": [0.0, 1.0, 0.0, 0.0, 0.0],
    "phi": 0.1,
}


@pytest.fixture
def smoke_settings() -> Dict[str, Any]:
    """Settings small enough for a full experiment in a unit test."""
    return dict(SMOKE_SETTINGS)


@pytest.fixture
def write_toml(tmp_path) -> Callable[..., Path]:
    """Write a flat settings table; JSON scalars and arrays are valid TOML values."""

    def _write(values: Dict[str, Any], name: str = "experiment.toml") -> Path:
        path = tmp_path / name
        path.write_text("".join(f"{key} = {json.dumps(value)}\n" for key, value in values.items()))
        return path

    return _write
