"""Model validation and derived linear operators."""

import numpy as np
import pytest
import scipy.linalg

from gaussring.model import (
    CavitySpec,
    ChannelSpec,
    CoupledCavityModel,
    ModelError,
    derive_linear,
    validate_model,
)

OMEGA = 1.2e15
V = 7.15e7


def _random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def _model(gamma, g, C, n_channels, n_cavities):
    channels = [ChannelSpec(OMEGA, V, label=f"ch{j}") for j in range(n_channels)]
    cavities = [CavitySpec(OMEGA, V, label=f"cav{n}") for n in range(n_cavities)]
    return CoupledCavityModel(channels, cavities, gamma, g, C)


class TestSpecs:
    def test_channel_rejects_nonpositive_velocity(self):
        with pytest.raises(ModelError, match="group velocity"):
            ChannelSpec(OMEGA, 0.0)

    def test_channel_rejects_nonpositive_frequency(self):
        with pytest.raises(ModelError, match="carrier frequency"):
            ChannelSpec(-1.0, V)

    def test_cavity_rejects_nonpositive_velocity(self):
        with pytest.raises(ModelError, match="group velocity"):
            CavitySpec(OMEGA, -2.0)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ModelError, match="gamma must be"):
            _model(np.zeros((3, 2)), np.zeros((2, 2)), np.zeros((2, 2)), 2, 2)


class TestValidate:
    def test_valid_model_is_clean(self, rng):
        m = _model(np.ones((2, 3)), _random_hermitian(rng, 2),
                   _random_hermitian(rng, 3), 3, 2)
        assert validate_model(m) == []

    def test_non_hermitian_g_named_with_entry(self):
        g = np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex)
        m = _model(np.zeros((2, 2)), g, np.zeros((2, 2)), 2, 2)
        msgs = validate_model(m)
        assert any("g is not Hermitian" in s and "[" in s for s in msgs)

    def test_non_hermitian_C_named_with_entry(self):
        C = np.array([[0.0, 1j], [1j, 0.0]])
        m = _model(np.zeros((2, 2)), np.zeros((2, 2)), C, 2, 2)
        msgs = validate_model(m)
        assert any("C is not Hermitian" in s for s in msgs)

    def test_velocity_mismatch_in_point_coupling(self):
        channels = [ChannelSpec(OMEGA, V, label="a"),
                    ChannelSpec(OMEGA, 2 * V, label="b")]
        cavities = [CavitySpec(OMEGA, V)]
        C = np.array([[0.0, 1.0], [1.0, 0.0]]) * V
        m = CoupledCavityModel(channels, cavities, np.zeros((1, 2)),
                               np.zeros((1, 1)), C)
        msgs = validate_model(m)
        assert any("mismatched group velocities" in s for s in msgs)

    def test_tuned_checks_velocity_and_tuning(self):
        channels = [ChannelSpec(OMEGA, V)]
        cavities = [CavitySpec(OMEGA, 2 * V), CavitySpec(2 * OMEGA, 2 * V)]
        gamma = np.array([[1.0], [0.0]], dtype=complex)
        g = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        m = CoupledCavityModel(channels, cavities, gamma, g, np.zeros((1, 1)))
        msgs = validate_model(m, tuned=True)
        assert any("tuned solver requirement" in s for s in msgs)


class TestDeriveLinear:
    def test_rejects_non_hermitian(self):
        g = np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex)
        m = _model(np.zeros((2, 2)), g, np.zeros((2, 2)), 2, 2)
        with pytest.raises(ModelError, match="Hermitian"):
            derive_linear(m)

    def test_T_is_unitary(self, rng):
        for _ in range(10):
            C = _random_hermitian(rng, 4, scale=V)
            m = _model(np.zeros((2, 4)), np.zeros((2, 2)), C, 4, 2)
            d = derive_linear(m)
            assert np.linalg.norm(d.T @ d.T.conj().T - np.eye(4)) < 1e-12

    def test_T_matrix_function_form(self, rng):
        # T equals exp(-2i atan(V^-1 C / 2)) for Hermitian C
        C = _random_hermitian(rng, 3, scale=V)
        m = _model(np.zeros((1, 3)), np.zeros((1, 1)), C, 3, 1)
        d = derive_linear(m)
        A = C / V / 2.0
        w, Q = np.linalg.eigh(A)
        expected = (Q * np.exp(-2j * np.arctan(w))) @ Q.conj().T
        assert np.linalg.norm(d.T - expected) < 1e-10

    def test_gamma_bar_and_Gamma_bar_composition(self, rng):
        gamma = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        g = _random_hermitian(rng, 2)
        C = _random_hermitian(rng, 3, scale=V)
        m = _model(gamma, g, C, 3, 2)
        d = derive_linear(m)
        C_tilde = np.eye(3) + 0.5j * C / V
        assert np.allclose(d.gamma_bar, gamma @ np.linalg.inv(C_tilde))
        expected = 0.5 * d.gamma_bar @ gamma.conj().T / V + 1j * g
        assert np.allclose(d.Gamma_bar, expected)

    def test_zero_C_gives_identity_T(self):
        m = _model(np.ones((1, 2)), np.zeros((1, 1)), np.zeros((2, 2)), 2, 1)
        d = derive_linear(m)
        assert np.allclose(d.T, np.eye(2))
        assert np.allclose(d.C_tilde, np.eye(2))

    def test_ill_conditioned_C_tilde_rejected(self):
        # one huge and one zero eigenvalue of V^-1 C makes C_tilde
        # numerically singular
        C = np.diag([2.0 * V * 1e14, 0.0]).astype(complex)
        m = _model(np.zeros((1, 2)), np.zeros((1, 1)), C, 2, 1)
        with pytest.raises(ModelError, match="singular"):
            derive_linear(m)

    def test_label_lookup(self):
        m = _model(np.zeros((1, 2)), np.zeros((1, 1)), np.zeros((2, 2)), 2, 1)
        d = derive_linear(m)
        assert d.channel_index("ch1") == 1
        assert d.cavity_index("cav0") == 0


class TestSerialization:
    def test_round_trip(self, rng, tmp_path):
        gamma = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        m = _model(gamma, _random_hermitian(rng, 2),
                   _random_hermitian(rng, 3, scale=V), 3, 2)
        path = tmp_path / "model.json"
        m.save(str(path))
        m2 = CoupledCavityModel.load(str(path))
        assert np.array_equal(m.gamma, m2.gamma)
        assert np.array_equal(m.g, m2.g)
        assert np.array_equal(m.C, m2.C)
        assert m2.channel_labels == m.channel_labels
