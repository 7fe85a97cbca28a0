"""Metropolis-Hastings over Fourier coefficients with a filter-likelihood target."""
import logging
import math
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import stats

from ..filters.enkbf import run_enkbf
from ..filters.kbf import run_kbf
from ..models.fields import FourierCoefficients
from ..models.filtering import LocalizationSpec, ObservationIncrement, ObservationModel
from ..models.inference import ChainEntry, ChainState, ProposalSpec
from ..models.states import ModelConfig
from ..utils.errors import DivergenceLog, NumericalBlowUpError

logger = logging.getLogger(__name__)

LogLikelihood = Callable[[FourierCoefficients], float]


class FilterKind(str, Enum):
    """Filter used to evaluate the likelihood."""
    KBF = "kbf"
    ENKBF = "enkbf"


def _normal_logpdf(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> float:
    return float(np.sum(stats.norm.logpdf(x, loc=mean, scale=std)))


def propose(current: FourierCoefficients, spec: ProposalSpec, rng: np.random.Generator) -> FourierCoefficients:
    """Per coordinate: N(lambda_i cos(phi), (omega/aleph_i) sin(phi)), the second argument a std."""
    mean = current.array * math.cos(spec.phi)
    draw = mean + spec.scales(current) * rng.standard_normal(current.size)
    return FourierCoefficients(n_modes=current.n_modes, coeffs=tuple(draw.tolist()))


def transition_logdensity(to: FourierCoefficients, from_: FourierCoefficients, spec: ProposalSpec) -> float:
    """log rho(to | from_) of the autoregressive proposal."""
    if to.size != from_.size:
        raise ValueError(f"dimension mismatch: {to.size} vs {from_.size}")
    return _normal_logpdf(to.array, from_.array * math.cos(spec.phi), spec.scales(from_))


def log_prior(coeffs: FourierCoefficients, spec: ProposalSpec) -> float:
    """Independent N(0, prior_std^2) prior, or 0 when no prior is configured."""
    if spec.prior_std is None:
        return 0.0
    return _normal_logpdf(coeffs.array, np.zeros(coeffs.size), np.full(coeffs.size, spec.prior_std))


def mh_step(
    chain: ChainState,
    spec: ProposalSpec,
    loglik_fn: LogLikelihood,
    rng: np.random.Generator,
    divergences: Optional[DivergenceLog] = None,
) -> ChainState:
    """
    One Metropolis-Hastings cycle; the chain is updated in place and returned.

    The incumbent's likelihood is never re-evaluated. A proposal whose
    likelihood evaluation blows up counts as log-likelihood -inf.
    """
    proposal = propose(chain.current, spec, rng)
    try:
        proposed_loglik = loglik_fn(proposal)
    except NumericalBlowUpError as e:
        proposed_loglik = -math.inf
        if divergences is not None:
            divergences.log_error(len(chain.history), e, {"coeffs": list(proposal.coeffs)})
        logger.warning(f"Cycle {len(chain.history)}: proposal rejected after numerical blow-up")

    accepted = False
    if proposed_loglik > -math.inf:
        log_alpha = (proposed_loglik - chain.current_loglik
                     + log_prior(proposal, spec) - log_prior(chain.current, spec)
                     + transition_logdensity(chain.current, proposal, spec)
                     - transition_logdensity(proposal, chain.current, spec))
        accepted = bool(rng.uniform() < math.exp(min(0.0, log_alpha)))
    if accepted:
        chain.current = proposal
        chain.current_loglik = proposed_loglik
    chain.history.append(ChainEntry(coeffs=chain.current, loglik=chain.current_loglik, accepted=accepted))
    return chain


def filter_loglik(
    filter_kind: Union[FilterKind, str],
    config: ModelConfig,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
    rng: Optional[np.random.Generator] = None,
    m_size: int = 100,
    loc: Optional[LocalizationSpec] = None,
    initial_spread: float = 0.1,
    process_noise: bool = True,
) -> LogLikelihood:
    """Build coefficients -> total filter log-likelihood."""
    filter_kind = FilterKind(filter_kind)
    if filter_kind is FilterKind.ENKBF and rng is None:
        raise ValueError("the EnKBF likelihood needs a random stream")

    def loglik(coeffs: FourierCoefficients) -> float:
        if filter_kind is FilterKind.KBF:
            _, total = run_kbf(config, obs_seq, obs, coeffs, initial_spread=initial_spread)
        else:
            _, total = run_enkbf(config, obs_seq, obs, coeffs, m_size, loc, rng,
                                 initial_spread=initial_spread, process_noise=process_noise)
        return total

    return loglik


def run_mh(
    filter_kind: Union[FilterKind, str],
    config: ModelConfig,
    obs_seq: Sequence[ObservationIncrement],
    obs: ObservationModel,
    spec: ProposalSpec,
    n_cycles: int,
    init: FourierCoefficients,
    rng: np.random.Generator,
    m_size: int = 100,
    loc: Optional[LocalizationSpec] = None,
    initial_spread: float = 0.1,
    process_noise: bool = True,
    divergences: Optional[DivergenceLog] = None,
) -> ChainState:
    """
    Run n_cycles MH cycles, each evaluating the full-trajectory filter likelihood.

    Proposals and filter noise draw from separate streams spawned from rng.
    """
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    proposal_rng, filter_rng = rng.spawn(2)
    loglik_fn = filter_loglik(filter_kind, config, obs_seq, obs, filter_rng, m_size, loc,
                              initial_spread, process_noise)
    chain = ChainState(current=init, current_loglik=loglik_fn(init))
    logger.info(f"Starting {FilterKind(filter_kind).value} MH chain: {n_cycles} cycles, "
                f"initial log-likelihood {chain.current_loglik:.6g}")
    for cycle in range(n_cycles):
        mh_step(chain, spec, loglik_fn, proposal_rng, divergences)
        logger.debug(f"Cycle {cycle}: loglik {chain.current_loglik:.6g}, "
                     f"accepted={chain.history[-1].accepted}")
    rate = chain.acceptance_rate
    logger.info(f"Chain finished: acceptance rate {rate:.3f}")
    if rate < 0.01:
        logger.warning("Acceptance rate below 1%; consider a smaller phi or omega")
    return chain
