"""Twin-experiment orchestration: truth, observations, estimation, metrics, export."""
import asyncio
import logging
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import ExperimentConfig, Method
from .dynamics.fields import project_log_field, sample_true_coefficients
from .dynamics.noise import derive_rng
from .dynamics.observation import default_observation_model, synthesize_observations
from .dynamics.steppers import simulate
from .filters.dual import DualMode, run_dual
from .models.fields import ClosedFormField, FourierCoefficients
from .models.filtering import ObservationIncrement, ObservationModel
from .models.inference import ChainState, DualTrajectory, ResultBundle
from .sampling.metropolis import FilterKind, run_mh
from .utils import DivergenceLog, boxplot_table, compute_rmse
from .utils.export import (
    write_chain_csv,
    write_json,
    write_matrix_csv,
    write_observations_csv,
    write_trajectory_csv,
)

logger = logging.getLogger(__name__)

TruthSource = Union[FourierCoefficients, ClosedFormField]


class ExperimentRunner:
    """Runs one configured twin experiment end to end."""

    def __init__(self, settings: ExperimentConfig, out_dir: Optional[Path] = None):
        """
        Initialize the runner.

        Args:
            settings: Validated experiment settings
            out_dir: Directory for result files; nothing is written when None
        """
        self.settings = settings
        self.out_dir = out_dir
        self.divergences = DivergenceLog()
        self.timings: dict[str, float] = {}
        self._started = 0.0

    async def __aenter__(self):
        self._started = time.perf_counter()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        self.timings["total"] = time.perf_counter() - self._started
        logger.info(f"Experiment finished in {self.timings['total']:.2f}s")

    def truth_source(self) -> TruthSource:
        """Closed-form log-field, explicit coefficients, or seeded random coefficients."""
        s = self.settings
        if s.truth_log_field is not None:
            return s.truth_log_field
        if s.truth_coeffs is not None:
            return FourierCoefficients.from_array(np.asarray(s.truth_coeffs))
        return sample_true_coefficients(s.n_modes, derive_rng(s.seed, "truth-coeffs"))

    def reference_coefficients(self, truth: TruthSource) -> FourierCoefficients:
        """Coefficients that RMSE is measured against, in the estimated dimension."""
        n_coeffs = 2 * self.settings.n_modes + 1
        if isinstance(truth, ClosedFormField):
            return project_log_field(truth, self.settings.grid, self.settings.n_modes)
        return FourierCoefficients.from_array(truth.array[:n_coeffs])

    def simulate_truth(self, truth: TruthSource) -> Tuple[np.ndarray, ObservationModel, List[ObservationIncrement]]:
        """Truth trajectory and its observation increments; uses only data streams."""
        s = self.settings
        logger.info(f"Simulating {s.model_kind.value} truth: N={s.n_points}, T={s.n_steps}, dt={s.dt}")
        started = time.perf_counter()
        trajectory = simulate(s.model_kind, s.model_settings(truth), s.n_steps, derive_rng(s.seed, "truth-state"))
        obs = default_observation_model(s.model_kind, s.grid, s.dt, s.obs_noise)
        obs_seq = synthesize_observations(trajectory, obs, derive_rng(s.seed, "observations"))
        self.timings["simulate"] = time.perf_counter() - started
        return trajectory, obs, obs_seq

    def _run_chain(self, index: int, obs: ObservationModel, obs_seq: Sequence[ObservationIncrement]) -> ChainState:
        s = self.settings
        init = s.initial_coefficients()
        return run_mh(
            FilterKind.KBF if s.method is Method.MH_KBF else FilterKind.ENKBF,
            s.model_settings(init),
            obs_seq,
            obs,
            s.proposal(),
            s.n_cycles,
            init,
            derive_rng(s.effective_filter_seed, "mh-chain", index),
            m_size=s.m_size,
            loc=s.localization(),
            initial_spread=s.initial_spread,
            process_noise=s.ensemble_process_noise,
            divergences=self.divergences,
        )

    async def run_chains(self, obs: ObservationModel, obs_seq: Sequence[ObservationIncrement]) -> List[ChainState]:
        """Run independent chains concurrently in batches."""
        s = self.settings
        chains: List[ChainState] = []
        for start in range(0, s.n_chains, s.chain_batch_size):
            batch = range(start, min(start + s.chain_batch_size, s.n_chains))
            tasks = [asyncio.to_thread(self._run_chain, k, obs, obs_seq) for k in batch]
            chains.extend(await asyncio.gather(*tasks))
        return chains

    def run_dual_filter(self, obs: ObservationModel, obs_seq: Sequence[ObservationIncrement]) -> DualTrajectory:
        s = self.settings
        init = s.initial_coefficients()
        return run_dual(
            DualMode.KBF_ENKBF if s.method is Method.DUAL_KBF_ENKBF else DualMode.ENKBF,
            s.model_settings(init),
            obs_seq,
            obs,
            s.l_particles,
            s.m_size,
            init,
            derive_rng(s.effective_filter_seed, "dual"),
            loc=s.localization(),
            initial_spread=s.initial_spread,
            param_spread=s.param_spread,
            process_noise=s.ensemble_process_noise,
        )

    def summarize(
        self,
        samples: np.ndarray,
        reference: FourierCoefficients,
        final_estimate: np.ndarray,
        acceptance_rates: Sequence[float] = (),
    ) -> ResultBundle:
        """Metrics over post-burn-in samples."""
        return ResultBundle(
            method=self.settings.method.value,
            labels=reference.labels(),
            reference=list(reference.coeffs),
            rmse=compute_rmse(samples, reference).tolist(),
            boxplots=boxplot_table(samples),
            acceptance_rates=list(acceptance_rates),
            divergences=self.divergences.get_error_summary(),
            final_estimate=[float(v) for v in final_estimate],
            timings=self.timings,
            config=self.settings.echo(),
        )

    async def run(self) -> ResultBundle:
        """Run the full experiment."""
        s = self.settings
        truth = self.truth_source()
        reference = self.reference_coefficients(truth)
        trajectory, obs, obs_seq = self.simulate_truth(truth)

        dual: Optional[DualTrajectory] = None
        chains: List[ChainState] = []
        rates: List[float] = []
        started = time.perf_counter()
        logger.info(f"Dispatching {s.method.value}")
        if s.method.is_mh:
            chains = await self.run_chains(obs, obs_seq)
            samples = np.concatenate([chain.samples(s.burn_in) for chain in chains])
            final_estimate = samples.mean(axis=0)
            rates = [chain.acceptance_rate for chain in chains]
        else:
            dual = self.run_dual_filter(obs, obs_seq)
            samples = dual.parameter_means[s.burn_in:]
            final_estimate = dual.parameter_means[-1]
        self.timings["estimate"] = time.perf_counter() - started
        logger.info(f"Estimation took {self.timings['estimate']:.2f}s; discarded {s.burn_in} burn-in samples")
        bundle = self.summarize(samples, reference, final_estimate, rates)

        if self.divergences.has_errors():
            logger.warning(f"Numerical blow-ups during estimation: {self.divergences.get_error_summary()}")
        if self.out_dir is not None:
            self.export(bundle, trajectory, obs_seq, chains, dual)
        return bundle

    def export(
        self,
        bundle: ResultBundle,
        trajectory: np.ndarray,
        obs_seq: Sequence[ObservationIncrement],
        chains: Sequence[ChainState],
        dual: Optional[DualTrajectory],
    ) -> None:
        """Write CSV/JSON results; a single writer, deterministic content."""
        out = self.out_dir
        assert out is not None
        logger.info(f"Writing results to {out}")
        write_trajectory_csv(out / "truth.csv", trajectory)
        write_observations_csv(out / "observations.csv", obs_seq)
        if len(chains) == 1:
            write_chain_csv(out / "chain.csv", chains[0], bundle.labels)
        else:
            for k, chain in enumerate(chains):
                write_chain_csv(out / f"chain_{k}.csv", chain, bundle.labels)
        if dual is not None:
            write_matrix_csv(out / "trajectory.csv", bundle.labels, dual.parameter_means)
        write_json(out / "summary.json", bundle.summary())


def run_experiment(settings: ExperimentConfig, out_dir: Optional[Path] = None) -> ResultBundle:
    """Synchronous entry point around ExperimentRunner."""

    async def _main() -> ResultBundle:
        async with ExperimentRunner(settings, out_dir) as runner:
            return await runner.run()

    return asyncio.run(_main())
