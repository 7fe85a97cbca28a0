"""Continuous-time measurement increments and observation operators."""
import logging
from typing import List, Union

import numpy as np

from ..models.fields import Grid
from ..models.filtering import ObservationIncrement, ObservationModel
from ..models.states import ModelKind

logger = logging.getLogger(__name__)


def default_observation_model(
    model_kind: Union[ModelKind, str],
    grid: Grid,
    dt: float,
    obs_noise: float,
) -> ObservationModel:
    """Full observation of u; for the wave model H = [0 | I] on the stacked (p, u) state."""
    if obs_noise <= 0:
        raise ValueError(f"obs_noise must be positive, got {obs_noise}")
    n = grid.n_points
    identity = np.eye(n)
    if ModelKind(model_kind) is ModelKind.ADVECTION:
        h_matrix = identity
    else:
        h_matrix = np.hstack((np.zeros((n, n)), identity))
    return ObservationModel(h_matrix=h_matrix, r_matrix=obs_noise ** 2 * identity, dt=dt)


def observe(
    state_vector: np.ndarray,
    model: ObservationModel,
    rng: np.random.Generator,
    time_index: int = 0,
) -> ObservationIncrement:
    """dy = H x dt + R^{1/2} xi with xi ~ N(0, I dt)."""
    state_vector = np.asarray(state_vector, dtype=float)
    model.check_state(state_vector)
    xi = np.sqrt(model.dt) * rng.standard_normal(model.n_obs)
    dy = model.h_matrix @ state_vector * model.dt + model.r_sqrt @ xi
    return ObservationIncrement(dy=dy, time_index=time_index)


def synthesize_observations(
    trajectory: np.ndarray,
    model: ObservationModel,
    rng: np.random.Generator,
) -> List[ObservationIncrement]:
    """Observe trajectory rows 1..T; row 0 is the initial state and is not observed."""
    increments = [observe(trajectory[n], model, rng, time_index=n) for n in range(1, len(trajectory))]
    logger.info(f"Synthesized {len(increments)} observation increments of size {model.n_obs}")
    return increments
