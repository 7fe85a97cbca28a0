import json

import numpy as np

from spde_estimation.models.fields import FourierCoefficients
from spde_estimation.models.filtering import ObservationIncrement
from spde_estimation.models.inference import ChainEntry, ChainState
from spde_estimation.utils.export import (
    read_chain_csv,
    read_json,
    read_matrix_csv,
    read_observations_csv,
    write_chain_csv,
    write_json,
    write_observations_csv,
    write_trajectory_csv,
)


def test_chain_csv(tmp_path):
    first = FourierCoefficients(n_modes=1, coeffs=(0.1, -0.2, 1 / 3))
    second = FourierCoefficients(n_modes=1, coeffs=(0.5, 0.0, 2.0))
    chain = ChainState(current=second, current_loglik=-3.5, history=[
        ChainEntry(coeffs=first, loglik=-7.25, accepted=False),
        ChainEntry(coeffs=second, loglik=-3.5, accepted=True),
    ])
    path = tmp_path / "out" / "chain.csv"
    write_chain_csv(path, chain, first.labels())

    assert path.read_text().splitlines()[0] == "cycle,accepted,loglik,A0,A1,B1"
    labels, accepted, samples = read_chain_csv(path)
    assert labels == ["A0", "A1", "B1"]
    np.testing.assert_array_equal(accepted, [False, True])
    # repr formatting keeps every bit
    np.testing.assert_array_equal(samples, chain.samples())


def test_trajectory_csv(tmp_path):
    trajectory = np.arange(6.0).reshape(3, 2)
    path = tmp_path / "truth.csv"
    write_trajectory_csv(path, trajectory)
    header, rows = read_matrix_csv(path)
    assert path.read_text().startswith("time,x0,x1\n0,0.0,1.0\n")
    assert header == ["x0", "x1"]
    np.testing.assert_array_equal(rows, trajectory)


def test_observations_csv_keeps_time_indices(tmp_path):
    increments = [ObservationIncrement(dy=np.array([0.1, -0.2]), time_index=n) for n in (1, 2, 3)]
    path = tmp_path / "observations.csv"
    write_observations_csv(path, increments)
    restored = read_observations_csv(path)
    assert [incr.time_index for incr in restored] == [1, 2, 3]
    np.testing.assert_array_equal(restored[2].dy, [0.1, -0.2])


def test_json_is_sorted_and_stable(tmp_path):
    path = tmp_path / "summary.json"
    write_json(path, {"rmse": [0.5], "labels": ["A0"]})
    text = path.read_text()
    assert text.index('"labels"') < text.index('"rmse"')
    assert text.endswith("\n")
    assert read_json(path) == json.loads(text) == {"labels": ["A0"], "rmse": [0.5]}
