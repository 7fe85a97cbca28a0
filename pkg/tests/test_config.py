import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from spde_estimation.config import PRESETS, ExperimentConfig, Method, get_settings
from spde_estimation.models.fields import FourierCoefficients
from spde_estimation.models.filtering import TaperKind
from spde_estimation.models.states import ModelKind
from spde_estimation.utils import ConfigurationError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_defaults_are_valid():
    settings = get_settings()
    assert settings.model_kind is ModelKind.ADVECTION
    assert settings.method is Method.MH_KBF
    assert settings.phi == pytest.approx(math.pi / 4)
    assert settings.effective_filter_seed == settings.seed == 0
    assert settings.initial_coefficients() == FourierCoefficients.zeros(2)
    assert settings.grid.spacing == pytest.approx(2 * math.pi / 32)


def test_burn_in_must_leave_samples():
    with pytest.raises(ValidationError, match="burn_in"):
        get_settings(n_cycles=100, burn_in=100)


def test_dual_burn_in_counts_steps():
    settings = get_settings(method="dual_kbf_enkbf", n_steps=500, burn_in=250)
    assert not settings.method.is_mh
    with pytest.raises(ValidationError, match="n_steps"):
        get_settings(method="dual_enkbf", n_steps=100, burn_in=150)


def test_all_problems_are_reported_together():
    with pytest.raises(ValidationError) as info:
        get_settings(method="mh_enkbf", n_cycles=10, burn_in=20, localization_radius=20.0, init_coeffs=[0.0])
    message = str(info.value)
    assert "burn_in" in message
    assert "localization_radius" in message
    assert "init_coeffs" in message


@pytest.mark.parametrize("method", list(Method))
def test_localization_radius_only_bounds_ensemble_filters(method):
    values = {"method": method, "n_points": 16, "localization_radius": 10.0, "n_steps": 100, "burn_in": 50}
    if method.uses_ensemble_state:
        with pytest.raises(ValidationError, match="localization_radius"):
            get_settings(**values)
    else:
        assert get_settings(**values).localization_radius == 10.0


@pytest.mark.parametrize("field, value", [("dt", 0.0), ("n_points", 2), ("phi", math.pi / 2), ("seed", -1)])
def test_field_bounds(field, value):
    with pytest.raises(ValidationError):
        get_settings(**{field: value})


def test_unknown_fields_are_rejected():
    with pytest.raises(ValidationError):
        ExperimentConfig(n_point=32)


def test_truth_sources_are_exclusive():
    with pytest.raises(ValidationError, match="either"):
        get_settings(truth_log_field="sin", truth_coeffs=[0.0, 1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValidationError, match="odd length"):
        get_settings(truth_coeffs=[0.0, 1.0, 0.0])


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("SPDE_N_POINTS", "64")
    monkeypatch.setenv("SPDE_MODEL_KIND", "wave")
    settings = get_settings()
    assert settings.n_points == 64
    assert settings.model_kind is ModelKind.WAVE


def test_dotenv_file(tmp_path):
    (tmp_path / ".env").write_text("SPDE_SIGMA=0.3\n")
    assert get_settings().sigma == pytest.approx(0.3)


def test_precedence(monkeypatch, write_toml):
    monkeypatch.setenv("SPDE_DT", "0.5")
    monkeypatch.setenv("SPDE_MU", "0.2")
    assert get_settings().dt == 0.5
    assert get_settings(preset="advection-desk").dt == 0.005

    path = write_toml({"dt": 0.02, "n_steps": 50})
    from_file = get_settings(path, preset="advection-desk")
    assert from_file.dt == 0.02
    assert from_file.n_steps == 50
    assert from_file.n_points == 32
    assert from_file.mu == 0.01

    overridden = get_settings(path, preset="advection-desk", dt=0.03, seed=None)
    assert overridden.dt == 0.03
    assert overridden.seed == 0


def test_unknown_preset():
    with pytest.raises(ConfigurationError, match="unknown preset"):
        get_settings(preset="nonexistent")


def test_echo_rebuilds_the_same_settings():
    settings = get_settings(preset="dual-wave-desk", filter_seed=7)
    echoed = settings.echo()
    assert echoed["model_kind"] == "wave"
    assert echoed["method"] == "dual_kbf_enkbf"
    assert ExperimentConfig(**echoed).echo() == echoed


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_config_files_match_presets(name):
    from_file = get_settings(CONFIG_DIR / f"{name}.toml")
    assert from_file.echo() == get_settings(preset=name).echo()


def test_derived_objects():
    settings = get_settings(preset="advection-desk", init_coeffs=[0.0, 0.5, 0.0, 0.0, 0.0], prior_std=3.0)
    spec = settings.proposal()
    assert spec.phi == 0.1
    assert spec.prior_std == 3.0
    assert settings.localization().radius == 8.0
    assert settings.localization().kind is TaperKind.GASPARI_COHN
    assert settings.initial_coefficients().coeffs[1] == 0.5
    model = settings.model_settings(settings.initial_coefficients())
    assert model.dt == settings.dt
    assert model.grid.n_points == 32


def test_desk_presets_keep_the_chain_length():
    for name in ("advection-desk", "wave-desk"):
        settings = get_settings(preset=name)
        assert (settings.n_cycles, settings.burn_in) == (300, 150)
        assert settings.n_steps * settings.dt == pytest.approx(5.0)


@pytest.mark.parametrize("name", ["advection-full", "wave-full", "dual-advection-full", "dual-wave-full"])
def test_full_scale_presets(name):
    settings = get_settings(preset=name)
    assert (settings.n_points, settings.n_steps, settings.dt, settings.mu) == (100, 1000, 0.01, 0.001)
    assert settings.m_size == 1000
    assert settings.n_modes == 10
    if not settings.method.is_mh:
        assert settings.l_particles == 1000
        assert settings.method is Method.DUAL_ENKBF


def test_unknown_taper_kind_is_a_configuration_error():
    with pytest.raises(ValidationError, match="localization_kind"):
        get_settings(localization_kind="boxcar")
