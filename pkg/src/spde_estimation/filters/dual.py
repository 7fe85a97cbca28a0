"""Dual state/parameter filters: KBF-EnKBF and EnKBF-EnKBF."""
import logging
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..dynamics.steppers import LinearDynamics, initial_state, linear_dynamics
from ..models.fields import FourierCoefficients
from ..models.filtering import LocalizationSpec, ObservationIncrement, ObservationModel
from ..models.inference import DualTrajectory, ParameterParticleCloud
from ..models.states import ModelConfig, ModelKind
from ..utils.errors import DimensionMismatchError, NumericalBlowUpError
from .enkbf import _enkbf_cycle, localization_taper
from .kbf import infer_model_kind

logger = logging.getLogger(__name__)


class DualMode(str, Enum):
    """State filter paired with the parameter EnKBF."""
    KBF_ENKBF = "kbf_enkbf"
    ENKBF = "enkbf"


def cross_covariance(particles: np.ndarray, states: np.ndarray) -> np.ndarray:
    """D = 1/(L-1) sum_j (lambda_j - mean)(u_j - mean)^T; zero for a single particle."""
    l_size = particles.shape[0]
    if states.shape[0] != l_size:
        raise DimensionMismatchError(f"{l_size} particles but {states.shape[0]} state estimates")
    if l_size < 2:
        return np.zeros((particles.shape[1], states.shape[1]))
    lam = particles - particles.mean(axis=0)
    dev = states - states.mean(axis=0)
    return lam.T @ dev / (l_size - 1)


def parameter_update(
    cloud: ParameterParticleCloud,
    incr: ObservationIncrement,
    obs: ObservationModel,
) -> ParameterParticleCloud:
    """lambda_j <- lambda_j + D H^T R^-1 (dy - 0.5 (H u_j + H u_mean) dt)."""
    obs.check_state(cloud.states)
    d_matrix = cross_covariance(cloud.particles, cloud.states)
    observed = cloud.states @ obs.h_matrix.T
    innovations = incr.dy - 0.5 * (observed + observed.mean(axis=0)) * obs.dt
    gain = d_matrix @ obs.gain_map
    return ParameterParticleCloud(particles=cloud.particles + innovations @ gain.T, states=cloud.states)


def particle_dynamics(model_kind: ModelKind, config: ModelConfig, particles: np.ndarray) -> LinearDynamics:
    """Stacked drift matrices, one per parameter particle."""
    per_particle = [linear_dynamics(model_kind, config, FourierCoefficients.from_array(lam)) for lam in particles]
    return LinearDynamics(
        drift=np.stack([dyn.drift for dyn in per_particle]),
        diffusion=per_particle[0].diffusion,
        dt=config.dt,
    )


def dual_kbf_enkbf_step(
    cloud: ParameterParticleCloud,
    covariances: np.ndarray,
    config: ModelConfig,
    incr: ObservationIncrement,
    obs: ObservationModel,
) -> Tuple[ParameterParticleCloud, np.ndarray]:
    """
    KBF predict/analysis per particle with F(lambda_j), then the parameter update.

    Args:
        cloud: Particles with their KBF means
        covariances: One KBF covariance per particle, shape (L, n, n)
    """
    dynamics = particle_dynamics(infer_model_kind(config, obs), config, cloud.particles)
    drift, dt = dynamics.drift, dynamics.dt
    with np.errstate(over="ignore", invalid="ignore"):
        means = cloud.states + np.einsum("lij,lj->li", drift, cloud.states) * dt
        fp = drift @ covariances
        covs = covariances + (fp + np.swapaxes(fp, -1, -2) + dynamics.process_cov) * dt
        covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))

        gain = covs @ obs.gain_map
        innovations = incr.dy - means @ obs.h_matrix.T * obs.dt
        means = means + np.einsum("lij,lj->li", gain, innovations)
        covs = covs - gain @ obs.h_matrix @ covs * obs.dt
        covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))
    if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
        raise NumericalBlowUpError("dual KBF state estimate became non-finite")
    updated = parameter_update(ParameterParticleCloud(particles=cloud.particles, states=means), incr, obs)
    return updated, covs


def dual_enkbf_step(
    cloud: ParameterParticleCloud,
    state_ensembles: np.ndarray,
    config: ModelConfig,
    incr: ObservationIncrement,
    obs: ObservationModel,
    loc: Optional[LocalizationSpec],
    rng: np.random.Generator,
    process_noise: bool = True,
) -> Tuple[ParameterParticleCloud, np.ndarray]:
    """
    EnKBF step of every (L, M, n) member under its particle's drift, then the parameter update.

    The state estimate of particle j is the mean of its M members.
    """
    dynamics = particle_dynamics(infer_model_kind(config, obs), config, cloud.particles)
    taper = None
    if loc is not None:
        taper = localization_taper(obs.n_state, loc, config.grid.n_points)
    _, members = _enkbf_cycle(state_ensembles, dynamics, incr, obs, taper, rng, process_noise)
    states = members.mean(axis=1)
    updated = parameter_update(ParameterParticleCloud(particles=cloud.particles, states=states), incr, obs)
    return updated, members


def initial_cloud(
    init: FourierCoefficients,
    state: np.ndarray,
    l_size: int,
    spread: float,
    rng: np.random.Generator,
) -> ParameterParticleCloud:
    """Particles init + N(0, spread^2) per coordinate, all sharing the initial state estimate."""
    particles = init.array + spread * rng.standard_normal((l_size, init.size))
    return ParameterParticleCloud(particles=particles, states=np.tile(state, (l_size, 1)))


def run_dual(
    mode: Union[DualMode, str],
    config: ModelConfig,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
    l_size: int,
    m_size: int,
    init_cloud: Union[ParameterParticleCloud, FourierCoefficients],
    rng: np.random.Generator,
    loc: Optional[LocalizationSpec] = None,
    initial_spread: float = 0.1,
    param_spread: float = 0.5,
    process_noise: bool = True,
) -> DualTrajectory:
    """
    Iterate a dual filter over all increments, recording cloud means per step.

    Args:
        init_cloud: A ready cloud, or centre coefficients to draw one around
    """
    if len(obs_seq) == 0:
        raise ValueError("observation sequence is empty")
    mode = DualMode(mode)
    model_kind = infer_model_kind(config, obs)
    x0 = initial_state(model_kind, config.grid).vector
    if isinstance(init_cloud, FourierCoefficients):
        cloud = initial_cloud(init_cloud, x0, l_size, param_spread, rng)
    else:
        cloud = init_cloud
    n = x0.size

    if mode is DualMode.KBF_ENKBF:
        covariances = np.tile(initial_spread ** 2 * np.eye(n), (cloud.l_size, 1, 1))
    else:
        ensembles = x0 + initial_spread * rng.standard_normal((cloud.l_size, m_size, n))
        cloud = ParameterParticleCloud(particles=cloud.particles, states=ensembles.mean(axis=1))

    steps = len(obs_seq)
    parameter_means = np.empty((steps, cloud.particles.shape[1]))
    state_means = np.empty((steps, n))
    spread = np.empty(steps)
    logger.info(f"Running {mode.value} dual filter: L={cloud.l_size}"
                + (f", M={m_size}" if mode is DualMode.ENKBF else "") + f", {steps} steps")
    for t, incr in enumerate(obs_seq):
        if mode is DualMode.KBF_ENKBF:
            cloud, covariances = dual_kbf_enkbf_step(cloud, covariances, config, incr, obs)
        else:
            cloud, ensembles = dual_enkbf_step(cloud, ensembles, config, incr, obs, loc, rng, process_noise)
        parameter_means[t] = cloud.parameter_mean
        state_means[t] = cloud.state_mean
        spread[t] = float(np.sqrt(np.mean(cloud.particles.var(axis=0))))
        logger.debug(f"Step {t}: parameter mean {np.array2string(parameter_means[t], precision=3)}")
    return DualTrajectory(parameter_means=parameter_means, state_means=state_means, parameter_spread=spread)
