import math

import numpy as np
import pytest

from spde_estimation.dynamics.stencils import (
    advection_drift,
    apply_stencil,
    drift_matrix,
    stencil_matrix,
    wave_force,
)
from spde_estimation.models.states import StencilKind, TransportStencil
from spde_estimation.utils.errors import DimensionMismatchError

DX = 2 * math.pi / 100


@pytest.mark.parametrize("kind", list(StencilKind))
def test_constants_are_annihilated(kind):
    np.testing.assert_allclose(apply_stencil(np.full(10, 2.5), 0.3, kind), 0.0, atol=1e-12)


def test_d1_on_four_points():
    result = apply_stencil(np.array([1.0, 2.0, 3.0, 4.0]), 1.0, StencilKind.D1)
    np.testing.assert_allclose(result, [-5.0, 3.0, 1.0, 1.0])
    assert result.sum() == pytest.approx(0.0)


def test_d1_against_index_loop():
    u = np.random.default_rng(0).standard_normal(12)
    result = apply_stencil(u, 0.5, StencilKind.D1)
    n = len(u)
    expected = [(3 * u[i] - 4 * u[(i - 1) % n] + u[(i - 2) % n]) / (2 * 0.5) for i in range(n)]
    np.testing.assert_allclose(result, expected, atol=1e-12)


def test_rejects_non_finite_input():
    with pytest.raises(ValueError):
        apply_stencil(np.array([0.0, np.inf, 1.0, 2.0]), 1.0, StencilKind.D2)


def test_three_point_stencils_need_three_points():
    with pytest.raises(ValueError):
        apply_stencil(np.array([1.0, 2.0]), 1.0, StencilKind.D1)


def test_stencils_act_on_last_axis():
    batch = np.random.default_rng(1).standard_normal((3, 16))
    result = apply_stencil(batch, DX, StencilKind.D1D1T)
    for row, out in zip(batch, result):
        np.testing.assert_allclose(out, apply_stencil(row, DX, StencilKind.D1D1T), atol=1e-12)


class TestStencilMatrices:
    def test_adjoint_pairs(self):
        d1 = stencil_matrix(StencilKind.D1, 100, DX)
        d2 = stencil_matrix(StencilKind.D2, 100, DX)
        np.testing.assert_allclose(stencil_matrix(StencilKind.D1T, 100, DX), d1.T, atol=1e-12)
        np.testing.assert_allclose(stencil_matrix(StencilKind.D2T, 100, DX), d2.T, atol=1e-12)

    def test_adjoint_inner_product(self):
        rng = np.random.default_rng(2)
        u, v = rng.standard_normal(100), rng.standard_normal(100)
        lhs = apply_stencil(u, DX, StencilKind.D1) @ v
        rhs = u @ apply_stencil(v, DX, StencilKind.D1T)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_second_differences_compose(self):
        rng = np.random.default_rng(3)
        d1 = stencil_matrix(StencilKind.D1, 100, DX)
        d2 = stencil_matrix(StencilKind.D2, 100, DX)
        for _ in range(5):
            u = rng.standard_normal(100)
            np.testing.assert_allclose(apply_stencil(u, DX, StencilKind.D1D1T), d1 @ d1.T @ u,
                                       rtol=1e-12, atol=1e-9)
            np.testing.assert_allclose(apply_stencil(u, DX, StencilKind.D2D2T), d2 @ d2.T @ u,
                                       rtol=1e-12, atol=1e-9)

    def test_d1d1t_symmetric_psd(self):
        m = stencil_matrix(StencilKind.D1D1T, 100, 1.0)
        np.testing.assert_allclose(m, m.T, atol=1e-12)
        assert np.linalg.eigvalsh(m).min() >= -1e-10
        np.testing.assert_allclose(m.sum(axis=1), 0.0, atol=1e-12)


class TestAdvectionDrift:
    def test_constant_state_and_field_has_no_drift(self):
        drift = advection_drift(np.full(32, 3.0), np.full(32, 1.7), 0.05, DX)
        np.testing.assert_allclose(drift, 0.0, atol=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            advection_drift(np.zeros(8), np.ones(9), 0.0, DX)

    @pytest.mark.parametrize("orientation", list(TransportStencil))
    def test_matches_dense_matrix(self, orientation):
        rng = np.random.default_rng(4)
        c = np.exp(0.5 * rng.standard_normal(100))
        f = drift_matrix(c, 0.01, DX, orientation)
        for _ in range(100):
            u = rng.standard_normal(100)
            np.testing.assert_allclose(advection_drift(u, c, 0.01, DX, orientation), f @ u,
                                       rtol=1e-12, atol=1e-11)

    def test_printed_orientation_is_literal(self):
        rng = np.random.default_rng(5)
        u, c = rng.standard_normal(16), np.exp(rng.standard_normal(16))
        expected = (apply_stencil(c * u, DX, StencilKind.D1)
                    - 0.02 * apply_stencil(u, DX, StencilKind.D1D1T))
        np.testing.assert_allclose(advection_drift(u, c, 0.02, DX, TransportStencil.PRINTED), expected)

    @pytest.mark.parametrize("orientation", list(TransportStencil))
    def test_second_order_convergence(self, orientation):
        errors = []
        for n in (256, 512):
            x = np.arange(1, n + 1) * 2 * math.pi / n
            drift = advection_drift(np.sin(x), np.ones(n), 0.0, 2 * math.pi / n, orientation)
            errors.append(np.max(np.abs(drift - np.cos(x))))
        assert errors[1] < 1e-4
        assert 3.5 < errors[0] / errors[1] < 4.5


def test_wave_force_is_negative_gradient_of_strain_energy():
    rng = np.random.default_rng(6)
    u, c = rng.standard_normal(20), np.exp(rng.standard_normal(20))
    d2 = stencil_matrix(StencilKind.D2, 20, DX)
    np.testing.assert_allclose(wave_force(u, c, DX), -d2.T @ (c * (d2 @ u)), rtol=1e-12, atol=1e-9)
