import math

import numpy as np
import pytest

from spde_estimation.config import get_settings
from spde_estimation.dynamics.fields import velocity_values
from spde_estimation.dynamics.noise import derive_rng, noise_std, spacetime_noise_increment
from spde_estimation.dynamics.stencils import drift_matrix
from spde_estimation.dynamics.steppers import (
    advection_step,
    initial_state,
    linear_dynamics,
    simulate,
    verlet_update,
    wave_energy,
    wave_step,
    wave_step_matrix,
)
from spde_estimation.models.fields import ClosedFormField, Grid
from spde_estimation.models.states import AdvectionState, ModelKind, NoiseIncrement, WaveState
from spde_estimation.utils.errors import DimensionMismatchError, NumericalBlowUpError


def zero_noise(config):
    return NoiseIncrement(values=np.zeros(config.grid.n_points), step=config.dt,
                          spacing=config.grid.spacing, sigma=0.0)


def test_initial_states():
    grid = Grid(n_points=4)
    np.testing.assert_allclose(initial_state(ModelKind.ADVECTION, grid).u, [1.0, 0.0, -1.0, 0.0], atol=1e-12)

    wave = initial_state(ModelKind.WAVE, Grid(n_points=100))
    np.testing.assert_array_equal(wave.p, np.zeros(100))
    assert wave.u.max() == pytest.approx(1.0)
    assert wave.vector.shape == (200,)


def test_constant_advection_state_is_unchanged(advection_config):
    state = AdvectionState(u=np.full(32, 0.7))
    # a constant u is carried unchanged only for a constant field
    config = advection_config.with_velocity(advection_config.velocity.model_copy(
        update={"coeffs": (0.4, 0.0, 0.0, 0.0, 0.0)}))
    after = advection_step(state, config, zero_noise(config))
    np.testing.assert_allclose(after.u, state.u, atol=1e-12)
    assert after.time_index == 1


def test_wave_at_rest_stays_at_rest(wave_config):
    state = WaveState(u=np.full(32, 0.3), p=np.zeros(32))
    after = wave_step(state, wave_config, zero_noise(wave_config))
    np.testing.assert_allclose(after.u, state.u, atol=1e-12)
    np.testing.assert_allclose(after.p, 0.0, atol=1e-12)


def test_noise_free_steps_match_matrices(advection_config, wave_config):
    rng = np.random.default_rng(0)
    c = velocity_values(advection_config.velocity, advection_config.grid)

    u = rng.standard_normal(32)
    f = drift_matrix(c, advection_config.mu, advection_config.grid.spacing)
    after = advection_step(AdvectionState(u=u), advection_config, zero_noise(advection_config))
    np.testing.assert_allclose(after.u, u + advection_config.dt * f @ u, rtol=1e-12, atol=1e-12)

    state = WaveState(u=rng.standard_normal(32), p=rng.standard_normal(32))
    stepped = wave_step(state, wave_config, zero_noise(wave_config))
    np.testing.assert_allclose(stepped.vector, wave_step_matrix(c, wave_config) @ state.vector,
                               rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_linear_dynamics_reproduces_one_step(kind, advection_config, wave_config):
    config = advection_config if kind is ModelKind.ADVECTION else wave_config
    dynamics = linear_dynamics(kind, config)
    x = np.random.default_rng(1).standard_normal(dynamics.dim)
    if kind is ModelKind.ADVECTION:
        expected = advection_step(AdvectionState(u=x), config, zero_noise(config)).vector
    else:
        expected = wave_step(WaveState.from_vector(x), config, zero_noise(config)).vector
    np.testing.assert_allclose(x + dynamics.drift @ x * config.dt, expected, rtol=1e-9, atol=1e-10)

    g = config.sigma / math.sqrt(config.grid.spacing)
    np.testing.assert_allclose(dynamics.diffusion[:32], g)
    if kind is ModelKind.WAVE:
        # noise drives p only
        assert np.all(dynamics.diffusion[32:] == 0)


def test_euler_maruyama_moments(advection_config):
    rng = derive_rng(5, "truth-state")
    state = AdvectionState(u=np.sin(advection_config.grid.points))
    c = velocity_values(advection_config.velocity, advection_config.grid)
    f = drift_matrix(c, advection_config.mu, advection_config.grid.spacing)
    expected = state.u + advection_config.dt * f @ state.u
    std = noise_std(advection_config.sigma, advection_config.dt, advection_config.grid.spacing)

    n_draws = 4000
    draws = np.empty((n_draws, 32))
    for k in range(n_draws):
        noise = spacetime_noise_increment(32, advection_config.sigma, advection_config.dt,
                                          advection_config.grid.spacing, rng)
        draws[k] = advection_step(state, advection_config, noise).u
    assert np.all(np.abs(draws.mean(axis=0) - expected) < 4 * std / math.sqrt(n_draws))
    assert draws.var(axis=0).mean() == pytest.approx(std ** 2, rel=0.05)


def test_verlet_conserves_energy():
    grid = Grid(n_points=100)
    c = np.ones(grid.n_points)
    state = initial_state(ModelKind.WAVE, grid)
    u, p = state.u, state.p
    start = wave_energy(state, c, grid.spacing)
    worst = 0.0
    for _ in range(10_000):
        u, p = verlet_update(u, p, c, 0.005, 0.0, grid.spacing)
        worst = max(worst, abs(wave_energy(WaveState(u=u, p=p), c, grid.spacing) - start))
    assert worst / start < 0.01


def test_verlet_is_time_reversible(wave_config):
    grid = wave_config.grid
    c = velocity_values(wave_config.velocity, grid)
    rng = np.random.default_rng(2)
    u0, p0 = rng.standard_normal(32), rng.standard_normal(32)
    u, p = u0, p0
    for _ in range(50):
        u, p = verlet_update(u, p, c, wave_config.dt, 0.0, grid.spacing)
    p = -p
    for _ in range(50):
        u, p = verlet_update(u, p, c, wave_config.dt, 0.0, grid.spacing)
    np.testing.assert_allclose(u, u0, atol=1e-9)
    np.testing.assert_allclose(-p, p0, atol=1e-9)


@pytest.mark.parametrize("preset", ["advection-full", "wave-full", "dual-advection-full", "dual-wave-full"])
def test_full_scale_settings_stay_finite(preset):
    settings = get_settings(preset=preset)
    trajectory = simulate(settings.model_kind, settings.model_settings(settings.truth_log_field),
                          settings.n_steps, derive_rng(0, "truth-state"))
    assert trajectory.shape[0] == settings.n_steps + 1
    assert np.all(np.isfinite(trajectory))


def test_simulate_shapes_and_determinism(advection_config, wave_config):
    first = simulate(ModelKind.WAVE, wave_config, 20, derive_rng(3, "truth-state"))
    again = simulate(ModelKind.WAVE, wave_config, 20, derive_rng(3, "truth-state"))
    assert first.shape == (21, 64)
    np.testing.assert_array_equal(first, again)
    assert simulate(ModelKind.ADVECTION, advection_config, 5, derive_rng(3, "truth-state")).shape == (6, 32)


def test_closed_form_velocity_is_accepted(advection_config):
    config = advection_config.with_velocity(ClosedFormField.SIN_2PI)
    assert np.all(np.isfinite(simulate(ModelKind.ADVECTION, config, 10, derive_rng(0, "truth-state"))))


def test_overflow_raises_blow_up(advection_config):
    u = np.where(np.arange(32) % 2 == 0, 1e308, -1e308)
    with pytest.raises(NumericalBlowUpError):
        advection_step(AdvectionState(u=u), advection_config, zero_noise(advection_config))


def test_noise_length_must_match_grid(advection_config):
    noise = NoiseIncrement(values=np.zeros(31), step=0.005, spacing=0.1, sigma=0.0)
    with pytest.raises(DimensionMismatchError):
        advection_step(AdvectionState(u=np.zeros(32)), advection_config, noise)
