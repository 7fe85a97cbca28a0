"""Euler-discretized Kalman-Bucy filter with observation-increment likelihood."""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..dynamics.steppers import LinearDynamics, initial_state, linear_dynamics
from ..models.fields import ClosedFormField, FourierCoefficients
from ..models.filtering import GaussianBelief, ObservationIncrement, ObservationModel
from ..models.states import ModelConfig, ModelKind
from ..utils.errors import DimensionMismatchError, guard_finite

logger = logging.getLogger(__name__)


def _symmetrize(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + cov.T)


def _process_cov(g_op: np.ndarray) -> np.ndarray:
    g_op = np.asarray(g_op, dtype=float)
    if g_op.ndim == 1:
        return np.diag(g_op ** 2)
    return g_op @ g_op.T


@guard_finite
def kbf_predict(
    belief: GaussianBelief,
    f_op: np.ndarray,
    g_op: np.ndarray,
    dt: float,
) -> GaussianBelief:
    """
    mean <- mean + F mean dt; P <- P + (F P + P F^T + G G^T) dt.

    Args:
        belief: Current belief
        f_op: Drift matrix F
        g_op: Diffusion matrix G, or the diagonal of a diagonal G
        dt: Time step
    """
    f_op = np.atleast_2d(f_op)
    if f_op.shape != belief.cov.shape:
        raise DimensionMismatchError(f"F shape {f_op.shape} does not match covariance {belief.cov.shape}")
    fp = f_op @ belief.cov
    cov = belief.cov + (fp + fp.T + _process_cov(g_op)) * dt
    return GaussianBelief.model_construct(mean=belief.mean + f_op @ belief.mean * dt, cov=_symmetrize(cov))


@guard_finite
def kbf_analysis(
    belief: GaussianBelief,
    incr: ObservationIncrement,
    obs: ObservationModel,
) -> GaussianBelief:
    """mean <- mean + P H^T R^-1 (dy - H mean dt); P <- P - P H^T R^-1 H P dt."""
    obs.check_state(belief.mean)
    gain = belief.cov @ obs.gain_map
    innovation = incr.dy - obs.h_matrix @ belief.mean * obs.dt
    mean = belief.mean + gain @ innovation
    cov = belief.cov - gain @ obs.h_matrix @ belief.cov * obs.dt
    return GaussianBelief.model_construct(mean=mean, cov=_symmetrize(cov))


def loglik_increment(
    incr: ObservationIncrement,
    predicted_mean: np.ndarray,
    obs: ObservationModel,
) -> float:
    """-1/2 r^T (R dt)^-1 r with r = dy - H mean dt; Gaussian constants dropped."""
    obs.check_state(predicted_mean)
    residual = incr.dy - obs.h_matrix @ predicted_mean * obs.dt
    return float(-0.5 * residual @ obs.solve_r(residual) / obs.dt)


def infer_model_kind(config: ModelConfig, obs: ObservationModel) -> ModelKind:
    """Advection states have N components, wave states 2N."""
    return ModelKind.ADVECTION if obs.n_state == config.grid.n_points else ModelKind.WAVE


def initial_belief(model_kind: Union[ModelKind, str], config: ModelConfig, spread: float) -> GaussianBelief:
    return GaussianBelief.isotropic(initial_state(model_kind, config.grid).vector, spread)


def filter_sequence(
    belief: GaussianBelief,
    dynamics: LinearDynamics,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
) -> Tuple[np.ndarray, float, GaussianBelief]:
    """
    Alternate predict and analysis over a run of increments.

    Returns:
        Analysis means (T, n), summed log-likelihood at the prediction means,
        and the final belief so a sequence can be processed in pieces
    """
    means = np.empty((len(obs_seq), belief.mean.size))
    total = 0.0
    for n, incr in enumerate(obs_seq):
        belief = kbf_predict(belief, dynamics.drift, dynamics.diffusion, dynamics.dt)
        total += loglik_increment(incr, belief.mean, obs)
        belief = kbf_analysis(belief, incr, obs)
        means[n] = belief.mean
    return means, total, belief


def run_kbf(
    config: ModelConfig,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
    coeffs: Union[FourierCoefficients, ClosedFormField],
    initial_spread: float = 0.1,
    belief: Optional[GaussianBelief] = None,
) -> Tuple[np.ndarray, float]:
    """
    Filter a whole observation sequence with the drift built from coeffs.

    Returns:
        Analysis mean trajectory (T, n) and total log-likelihood
    """
    if len(obs_seq) == 0:
        raise ValueError("observation sequence is empty")
    model_kind = infer_model_kind(config, obs)
    dynamics = linear_dynamics(model_kind, config, coeffs)
    if belief is None:
        belief = initial_belief(model_kind, config, initial_spread)
    means, total, _ = filter_sequence(belief, dynamics, obs_seq, obs)
    logger.debug(f"KBF run over {len(obs_seq)} steps: log-likelihood {total:.6g}")
    return means, total

