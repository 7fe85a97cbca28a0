"""Ensemble Kalman-Bucy filter with perturbed observations and localization."""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..dynamics.steppers import LinearDynamics, initial_state, linear_dynamics
from ..models.fields import ClosedFormField, FourierCoefficients
from ..models.filtering import (
    LocalizationSpec,
    ObservationIncrement,
    ObservationModel,
    StateEnsemble,
    TaperKind,
)
from ..models.states import ModelConfig
from ..utils.errors import NumericalBlowUpError
from .kbf import infer_model_kind, loglik_increment

logger = logging.getLogger(__name__)


def gaspari_cohn(distance: np.ndarray, half_width: float) -> np.ndarray:
    """
    Fifth-order compactly supported taper; 1 at 0, 0 beyond 2*half_width.

    Args:
        distance: Nonnegative distances
        half_width: Taper parameter c
    """
    z = np.asarray(distance, dtype=float) / half_width
    taper = np.zeros_like(z)
    inner = z <= 1.0
    outer = (z > 1.0) & (z < 2.0)
    zi = z[inner]
    taper[inner] = (((-0.25 * zi + 0.5) * zi + 0.625) * zi - 5.0 / 3.0) * zi ** 2 + 1.0
    zo = z[outer]
    taper[outer] = ((((zo / 12.0 - 0.5) * zo + 0.625) * zo + 5.0 / 3.0) * zo - 5.0) * zo \
        + 4.0 - 2.0 / (3.0 * zo)
    return np.clip(taper, 0.0, 1.0)


_TAPERS = {
    TaperKind.GASPARI_COHN: gaspari_cohn,
}


def localization_taper(dim: int, loc: LocalizationSpec, n_points: Optional[int] = None) -> np.ndarray:
    """
    Taper matrix on periodic grid distance, tiled over stacked variable blocks.

    Args:
        dim: State dimension
        loc: Localization settings
        n_points: Grid size; dim must be a multiple of it
    """
    n_points = n_points or dim
    if dim % n_points:
        raise ValueError(f"state dimension {dim} is not a multiple of the grid size {n_points}")
    if loc.radius > n_points / 2:
        raise ValueError(f"localization radius {loc.radius} exceeds half the grid ({n_points / 2})")
    idx = np.arange(n_points)
    diff = np.abs(idx[:, None] - idx[None, :])
    rho = _TAPERS[loc.kind](np.minimum(diff, n_points - diff), loc.radius)
    blocks = dim // n_points
    return np.tile(rho, (blocks, blocks))


def ensemble_covariance(members: np.ndarray) -> np.ndarray:
    """(M-1)-normalized covariance of members shaped (..., M, n)."""
    anomalies = members - members.mean(axis=-2, keepdims=True)
    m_size = members.shape[-2]
    return np.swapaxes(anomalies, -1, -2) @ anomalies / (m_size - 1)


def ensemble_statistics(
    ens: StateEnsemble,
    loc: Optional[LocalizationSpec] = None,
    n_points: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Member mean and (localized) covariance."""
    cov = ensemble_covariance(ens.members)
    if loc is not None:
        cov = cov * localization_taper(cov.shape[0], loc, n_points)
    return ens.members.mean(axis=0), cov


def predict_members(
    members: np.ndarray,
    dynamics: LinearDynamics,
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    """
    u + F u dt for members shaped (..., M, n), plus model noise when rng is given.

    The drift may be a single (n, n) matrix or one per leading batch entry.
    """
    drift = dynamics.drift
    predicted = members + members @ np.swapaxes(drift, -1, -2) * dynamics.dt
    if rng is not None and np.any(dynamics.noise_mask):
        scale = dynamics.diffusion * np.sqrt(dynamics.dt)
        predicted = predicted + scale * rng.standard_normal(members.shape)
    return predicted


def analyze_members(
    predicted: np.ndarray,
    cov: np.ndarray,
    incr: ObservationIncrement,
    obs: ObservationModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """u + P H^T R^-1 (dy + eps - H u dt) with eps ~ N(0, R dt), members shaped (..., M, n)."""
    gain = cov @ obs.gain_map
    xi = rng.standard_normal(predicted.shape[:-1] + (obs.n_obs,))
    eps = np.sqrt(obs.dt) * xi @ obs.r_sqrt.T
    innovations = incr.dy + eps - predicted @ obs.h_matrix.T * obs.dt
    return predicted + innovations @ np.swapaxes(gain, -1, -2)


def _check_members(members: np.ndarray) -> None:
    if not np.all(np.isfinite(members)):
        raise NumericalBlowUpError("ensemble member became non-finite")


def _enkbf_cycle(
    members: np.ndarray,
    dynamics: LinearDynamics,
    incr: ObservationIncrement,
    obs: ObservationModel,
    taper: Optional[np.ndarray],
    rng: np.random.Generator,
    process_noise: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    """One predict/analysis cycle; returns (prediction mean, analysis members)."""
    with np.errstate(over="ignore", invalid="ignore"):
        predicted = predict_members(members, dynamics, rng if process_noise else None)
        _check_members(predicted)
        cov = ensemble_covariance(predicted)
        if taper is not None:
            cov = cov * taper
        analysis = analyze_members(predicted, cov, incr, obs, rng)
    _check_members(analysis)
    return predicted.mean(axis=-2), analysis


def enkbf_step(
    ens: StateEnsemble,
    config: ModelConfig,
    incr: ObservationIncrement,
    obs: ObservationModel,
    loc: Optional[LocalizationSpec],
    rng: np.random.Generator,
    process_noise: bool = True,
    dynamics: Optional[LinearDynamics] = None,
) -> StateEnsemble:
    """Advance every member through prediction and perturbed-observation analysis."""
    obs.check_state(ens.members)
    if dynamics is None:
        dynamics = linear_dynamics(infer_model_kind(config, obs), config)
    taper = None
    if loc is not None:
        taper = localization_taper(obs.n_state, loc, config.grid.n_points)
    _, analysis = _enkbf_cycle(ens.members, dynamics, incr, obs, taper, rng, process_noise)
    return StateEnsemble(members=analysis)


def initial_ensemble(
    config: ModelConfig,
    obs: ObservationModel,
    m_size: int,
    spread: float,
    rng: np.random.Generator,
) -> StateEnsemble:
    """Members drawn around the model initial state with isotropic spread."""
    mean = initial_state(infer_model_kind(config, obs), config.grid).vector
    return StateEnsemble(members=mean + spread * rng.standard_normal((m_size, mean.size)))


def run_enkbf(
    config: ModelConfig,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
    coeffs: Union[FourierCoefficients, ClosedFormField],
    m_size: int,
    loc: Optional[LocalizationSpec],
    rng: np.random.Generator,
    initial_spread: float = 0.1,
    process_noise: bool = True,
    ensemble: Optional[StateEnsemble] = None,
) -> Tuple[np.ndarray, float]:
    """
    Filter a sequence with an M-member ensemble.

    Returns:
        Prediction-mean trajectory (T, n) and the log-likelihood summed at the
        prediction ensemble means
    """
    if len(obs_seq) == 0:
        raise ValueError("observation sequence is empty")
    dynamics = linear_dynamics(infer_model_kind(config, obs), config, coeffs)
    if ensemble is None:
        ensemble = initial_ensemble(config, obs, m_size, initial_spread, rng)
    taper = None
    if loc is not None:
        taper = localization_taper(obs.n_state, loc, config.grid.n_points)

    members = ensemble.members
    means = np.empty((len(obs_seq), members.shape[-1]))
    total = 0.0
    for n, incr in enumerate(obs_seq):
        means[n], members = _enkbf_cycle(members, dynamics, incr, obs, taper, rng, process_noise)
        total += loglik_increment(incr, means[n], obs)
    logger.debug(f"EnKBF run (M={members.shape[0]}) over {len(obs_seq)} steps: "
                 f"log-likelihood {total:.6g}")
    return means, total
