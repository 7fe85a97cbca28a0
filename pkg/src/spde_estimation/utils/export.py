"""CSV and JSON writers/readers for chains, trajectories and observations."""
import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..models.filtering import ObservationIncrement
from ..models.inference import ChainState


def _fmt(value: float) -> str:
    # repr round-trips exactly and is stable across runs
    return repr(float(value))


def write_matrix_csv(path: Path, header: Sequence[str], rows: np.ndarray, index_name: str = "step") -> None:
    """Write rows with a leading integer index column."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([index_name, *header])
        for n, row in enumerate(np.atleast_2d(rows)):
            writer.writerow([n, *(_fmt(v) for v in row)])


def read_matrix_csv(path: Path) -> Tuple[List[str], np.ndarray]:
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row[1:]] for row in reader]
    return header[1:], np.array(rows, dtype=float)


def write_trajectory_csv(path: Path, trajectory: np.ndarray) -> None:
    """Rows are time indices, columns grid components."""
    write_matrix_csv(path, [f"x{i}" for i in range(trajectory.shape[1])], trajectory, index_name="time")


def write_chain_csv(path: Path, chain: ChainState, labels: Sequence[str]) -> None:
    """Columns: cycle, accepted, loglik, coefficients in canonical order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["cycle", "accepted", "loglik", *labels])
        for cycle, entry in enumerate(chain.history):
            writer.writerow([cycle, int(entry.accepted), _fmt(entry.loglik),
                             *(_fmt(v) for v in entry.coeffs.coeffs)])


def read_chain_csv(path: Path) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """Returns coefficient labels, accepted flags and the (cycles, p) sample matrix."""
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        accepted, samples = [], []
        for row in reader:
            accepted.append(bool(int(row[1])))
            samples.append([float(v) for v in row[3:]])
    return header[3:], np.array(accepted), np.array(samples, dtype=float)


def write_observations_csv(path: Path, increments: Sequence[ObservationIncrement]) -> None:
    rows = np.array([incr.dy for incr in increments])
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["time", *(f"dy{i}" for i in range(rows.shape[1]))])
        for incr, row in zip(increments, rows):
            writer.writerow([incr.time_index, *(_fmt(v) for v in row)])


def read_observations_csv(path: Path) -> List[ObservationIncrement]:
    with path.open(newline="") as f:
        reader = csv.reader(f)
        next(reader)
        return [
            ObservationIncrement(dy=np.array([float(v) for v in row[1:]]), time_index=int(row[0]))
            for row in reader
        ]


def write_json(path: Path, payload: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: Path) -> Any:
    return json.loads(path.read_text())
