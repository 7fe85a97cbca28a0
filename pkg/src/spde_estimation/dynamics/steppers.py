"""Time stepping for the stochastic advection and wave equations."""
import logging
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..models.fields import ClosedFormField, FourierCoefficients, Grid
from ..models.states import (
    AdvectionState, ModelConfig, ModelKind, NoiseIncrement, SPDEState, StencilKind, WaveState,
)
from ..utils.errors import DimensionMismatchError, guard_finite
from .fields import velocity_values
from .noise import noise_std, spacetime_noise_increment
from .stencils import _stencil, advection_drift, drift_matrix, wave_force, wave_strain

logger = logging.getLogger(__name__)


class LinearDynamics(BaseModel):
    """
    Linear drift F and continuous-time diffusion G of a discretized model.

    One Euler step reads x + F x dt + G dW with Cov(G dW) = diag(g)^2 dt.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    drift: np.ndarray
    diffusion: np.ndarray
    dt: float

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @property
    def noise_mask(self) -> np.ndarray:
        return self.diffusion > 0

    @property
    def process_cov(self) -> np.ndarray:
        """G G^T (continuous time)."""
        return np.diag(self.diffusion ** 2)


def initial_state(model_kind: Union[ModelKind, str], grid: Grid) -> SPDEState:
    """u0 = sin(x) for advection; u0 = exp(-4(x - L/2)^2), p0 = 0 for the wave model."""
    x = grid.points
    if ModelKind(model_kind) is ModelKind.ADVECTION:
        return AdvectionState(u=np.sin(x))
    return WaveState(u=np.exp(-4 * (x - 0.5 * grid.length) ** 2), p=np.zeros_like(x))


def state_dim(model_kind: Union[ModelKind, str], grid: Grid) -> int:
    return grid.n_points * (1 if ModelKind(model_kind) is ModelKind.ADVECTION else 2)


def _check_noise(noise: NoiseIncrement, n: int) -> None:
    if noise.values.shape[-1] != n:
        raise DimensionMismatchError(f"noise length {noise.values.shape[-1]} != grid size {n}")


@guard_finite
def advection_step(state: AdvectionState, config: ModelConfig, noise: NoiseIncrement) -> AdvectionState:
    """Euler-Maruyama: u_{n+1} = u_n + drift(u_n) dt + noise."""
    _check_noise(noise, config.grid.n_points)
    c = velocity_values(config.velocity, config.grid)
    drift = advection_drift(state.u, c, config.mu, config.grid.spacing, config.transport_stencil)
    return AdvectionState.model_construct(
        u=state.u + drift * config.dt + noise.values,
        time_index=state.time_index + 1,
    )


def verlet_update(
    u: np.ndarray,
    p: np.ndarray,
    c: np.ndarray,
    dt: float,
    mu: float,
    dx: float,
    noise: Union[np.ndarray, float] = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Three-stage Verlet step on arrays of shape (..., N).

    The mu-term of the closing half-step is evaluated at the half-step p.
    """
    half = 0.5 * dt
    p_half = p + half * (wave_force(u, c, dx) - mu * _stencil(p, dx, StencilKind.D2D2T))
    u_next = u + dt * p_half
    p_next = (p_half + half * (wave_force(u_next, c, dx) - mu * _stencil(p_half, dx, StencilKind.D2D2T))
              + noise)
    return u_next, p_next


@guard_finite
def wave_step(state: WaveState, config: ModelConfig, noise: NoiseIncrement) -> WaveState:
    """Verlet step with the noise entering the closing half-step of p."""
    _check_noise(noise, config.grid.n_points)
    c = velocity_values(config.velocity, config.grid)
    u_next, p_next = verlet_update(
        state.u, state.p, c, config.dt, config.mu, config.grid.spacing, noise.values
    )
    return WaveState.model_construct(u=u_next, p=p_next, time_index=state.time_index + 1)


def wave_step_matrix(c: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Noise-free Verlet step as a (2N, 2N) matrix acting on stacked (p, u)."""
    n = config.grid.n_points
    basis = np.eye(2 * n)
    u_next, p_next = verlet_update(basis[:, n:], basis[:, :n], c, config.dt, config.mu, config.grid.spacing)
    return np.concatenate((p_next, u_next), axis=1).T


def linear_dynamics(
    model_kind: Union[ModelKind, str],
    config: ModelConfig,
    velocity: Union[FourierCoefficients, ClosedFormField, None] = None,
) -> LinearDynamics:
    """
    Drift and diffusion operators for the filters.

    For the wave model the drift is (M - I)/dt with M the noise-free Verlet
    step, so x + F x dt reproduces the Verlet step exactly.
    """
    grid = config.grid
    c = velocity_values(velocity if velocity is not None else config.velocity, grid)
    g = config.sigma / np.sqrt(grid.spacing)
    if ModelKind(model_kind) is ModelKind.ADVECTION:
        return LinearDynamics(
            drift=drift_matrix(c, config.mu, grid.spacing, config.transport_stencil),
            diffusion=np.full(grid.n_points, g),
            dt=config.dt,
        )
    step = wave_step_matrix(c, config)
    diffusion = np.concatenate((np.full(grid.n_points, g), np.zeros(grid.n_points)))
    return LinearDynamics(drift=(step - np.eye(2 * grid.n_points)) / config.dt, diffusion=diffusion, dt=config.dt)


def wave_energy(state: WaveState, c: np.ndarray, dx: float) -> float:
    """Discrete energy 1/2 sum(p_i^2 + C_i w_i^2) dx."""
    w = wave_strain(state.u, dx)
    return float(0.5 * np.sum(state.p ** 2 + c * w ** 2) * dx)


def simulate(
    model_kind: Union[ModelKind, str],
    config: ModelConfig,
    n_steps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Run the stochastic model from its initial state.

    Returns:
        Array of shape (n_steps + 1, dim) of state vectors (stacked (p, u) for the wave model)
    """
    model_kind = ModelKind(model_kind)
    grid = config.grid
    state = initial_state(model_kind, grid)
    step = advection_step if model_kind is ModelKind.ADVECTION else wave_step
    trajectory = np.empty((n_steps + 1, state_dim(model_kind, grid)))
    trajectory[0] = state.vector
    for n in range(1, n_steps + 1):
        noise = spacetime_noise_increment(grid.n_points, config.sigma, config.dt, grid.spacing, rng)
        state = step(state, config, noise)
        trajectory[n] = state.vector
    logger.debug(f"Simulated {n_steps} {model_kind.value} steps "
                 f"(noise std {noise_std(config.sigma, config.dt, grid.spacing):.3g})")
    return trajectory
