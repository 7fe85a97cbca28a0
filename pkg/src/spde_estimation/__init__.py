"""Coefficient estimation for stochastic advection and wave equations."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from .config import PRESETS, get_settings
from .dynamics.fields import coeffs_from_json
from .dynamics.noise import derive_rng
from .dynamics.steppers import simulate
from .experiment import ExperimentRunner, run_experiment
from .models.states import ModelKind
from .utils import ConfigurationError, NumericalBlowUpError, boxplot_table, compute_rmse
from .utils.export import read_chain_csv, read_json, write_trajectory_csv

__all__ = ["ExperimentRunner", "get_settings", "main", "run_experiment", "setup_logging"]

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_BLOW_UP = 3


def setup_logging(level: str = "INFO"):
    """Setup logging configuration."""
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Estimate spatially varying coefficients of stochastic PDEs from noisy observations"
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="Set logging level (default: from config, else INFO)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a twin experiment and write results")
    run.add_argument("--config", type=Path, help="TOML file with experiment settings")
    run.add_argument("--out", type=Path, required=True, help="Output directory")
    run.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    run.add_argument("--preset", choices=sorted(PRESETS), help="Start from a named preset")

    sim = commands.add_parser("simulate", help="Simulate a truth trajectory to CSV")
    sim.add_argument("--model", choices=[kind.value for kind in ModelKind], required=True)
    sim.add_argument("--config", type=Path, help="TOML file with experiment settings")
    sim.add_argument("--out", type=Path, required=True, help="Output CSV file")
    sim.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")

    metrics = commands.add_parser("metrics", help="RMSE and box-plot statistics of a chain CSV")
    metrics.add_argument("--chain", type=Path, required=True, help="Chain CSV written by 'run'")
    metrics.add_argument("--truth", type=Path, required=True, help="JSON array of true coefficients")
    metrics.add_argument("--burn-in", type=int, default=0, help="Cycles to discard (default: 0)")

    compare = commands.add_parser("compare", help="Per-coordinate RMSE table of several runs")
    compare.add_argument("summaries", type=Path, nargs="+", help="summary.json files")
    return parser


def _cmd_run(args: argparse.Namespace) -> None:
    settings = get_settings(args.config, args.preset, seed=args.seed)
    setup_logging(args.log_level or settings.log_level)
    bundle = run_experiment(settings, args.out)

    print("=" * 60)
    print(f"{bundle.method} on {settings.model_kind.value}: N={settings.n_points}, T={settings.n_steps}")
    print("=" * 60)
    for label, ref, est, err in zip(bundle.labels, bundle.reference, bundle.final_estimate, bundle.rmse):
        print(f"{label:>4}  truth {ref:+.4f}  estimate {est:+.4f}  rmse {err:.4f}")
    if bundle.acceptance_rates:
        print(f"Acceptance rates: {', '.join(f'{r:.3f}' for r in bundle.acceptance_rates)}")
    print(f"Results written to {args.out}")


def _cmd_simulate(args: argparse.Namespace) -> None:
    settings = get_settings(args.config, model_kind=args.model, seed=args.seed)
    setup_logging(args.log_level or settings.log_level)
    runner = ExperimentRunner(settings)
    truth = runner.truth_source()
    trajectory = simulate(settings.model_kind, settings.model_settings(truth), settings.n_steps,
                          derive_rng(settings.seed, "truth-state"))
    write_trajectory_csv(args.out, trajectory)
    print(f"Wrote {trajectory.shape[0]} states of size {trajectory.shape[1]} to {args.out}")


def _cmd_metrics(args: argparse.Namespace) -> None:
    setup_logging(args.log_level or "INFO")
    labels, _, samples = read_chain_csv(args.chain)
    truth = coeffs_from_json(args.truth.read_text())
    if args.burn_in >= len(samples):
        raise ConfigurationError([f"burn_in ({args.burn_in}) must be smaller than the chain length ({len(samples)})"])
    kept = samples[args.burn_in:]
    rmse = compute_rmse(kept, truth)
    boxes = boxplot_table(kept)
    print(f"{'coef':>4} {'truth':>9} {'rmse':>9} {'median':>9} {'q1':>9} {'q3':>9} {'outliers':>8}")
    for label, ref, err, box in zip(labels, truth.coeffs, rmse, boxes):
        print(f"{label:>4} {ref:+9.4f} {err:9.4f} {box.median:+9.4f} {box.q1:+9.4f} {box.q3:+9.4f} "
              f"{len(box.outliers):8d}")


def _cmd_compare(args: argparse.Namespace) -> None:
    setup_logging(args.log_level or "INFO")
    summaries = [read_json(path) for path in args.summaries]
    labels: List[str] = summaries[0]["labels"]
    for path, summary in zip(args.summaries, summaries):
        if summary["labels"] != labels:
            raise ConfigurationError([f"{path} estimates {len(summary['labels'])} coefficients, "
                                      f"expected {len(labels)}"])
    names = [f"{s['method']}/{s['config']['model_kind']}" for s in summaries]
    width = max(12, *(len(name) for name in names))
    print(f"{'coef':>4} " + " ".join(f"{name:>{width}}" for name in names))
    for i, label in enumerate(labels):
        print(f"{label:>4} " + " ".join(f"{s['rmse'][i]:>{width}.4f}" for s in summaries))
    means = [float(np.mean(s["rmse"])) for s in summaries]
    print(f"{'mean':>4} " + " ".join(f"{m:>{width}.4f}" for m in means))


_COMMANDS = {
    "run": _cmd_run,
    "simulate": _cmd_simulate,
    "metrics": _cmd_metrics,
    "compare": _cmd_compare,
}


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for the CLI."""
    args = _build_parser().parse_args(argv)
    logger = logging.getLogger(__name__)

    try:
        _COMMANDS[args.command](args)
    except (ValidationError, ConfigurationError) as e:
        setup_logging(args.log_level or "INFO")
        logger.error(f"Invalid configuration: {e}")
        sys.exit(EXIT_CONFIG)
    except NumericalBlowUpError as e:
        logger.error(f"Numerical blow-up: {e}")
        sys.exit(EXIT_BLOW_UP)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(EXIT_FAILURE)
    except Exception as e:
        logger.error(f"Command failed: {e}")
        sys.exit(EXIT_FAILURE)

