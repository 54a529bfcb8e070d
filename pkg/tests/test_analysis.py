"""Schmidt metrics, temporal amplitudes, fidelities and mixtures."""

import numpy as np
import pytest

from gaussring.analysis import (
    DegenerateSpectrumError,
    EnsembleDensityAccumulator,
    JointSpectralAmplitude,
    ensemble_purity,
    heralded_density,
    jsa_fidelity,
    jta,
    schmidt,
)
from gaussring.lingrid import KGrid


def _jsa(grid, values):
    return JointSpectralAmplitude(grid=grid, values=values, modes=("s", "i"))


def _gaussian_jsa(grid, sx, sy, theta=0.0):
    k = grid.values
    kx = k[:, None] * np.cos(theta) - k[None, :] * np.sin(theta)
    ky = k[:, None] * np.sin(theta) + k[None, :] * np.cos(theta)
    return _jsa(grid, np.exp(-(kx / sx) ** 2 - (ky / sy) ** 2).astype(complex))


class TestSchmidt:
    def test_separable_state_is_pure(self, rng):
        grid = KGrid.default(31)
        u = rng.normal(size=31) + 1j * rng.normal(size=31)
        v = rng.normal(size=31) + 1j * rng.normal(size=31)
        s = schmidt(_jsa(grid, np.outer(u, v)))
        assert s.purity == pytest.approx(1.0, abs=1e-12)

    def test_two_equal_terms_give_half(self):
        grid = KGrid.default(31)
        vals = np.zeros((31, 31), dtype=complex)
        vals[0, 0] = 1.0
        vals[1, 1] = 1.0
        assert schmidt(_jsa(grid, vals)).purity == pytest.approx(0.5, abs=1e-12)

    def test_unitary_invariance(self, rng):
        grid = KGrid.default(31)
        vals = rng.normal(size=(31, 31)) + 1j * rng.normal(size=(31, 31))
        Q1, _ = np.linalg.qr(rng.normal(size=(31, 31))
                             + 1j * rng.normal(size=(31, 31)))
        Q2, _ = np.linalg.qr(rng.normal(size=(31, 31))
                             + 1j * rng.normal(size=(31, 31)))
        a = schmidt(_jsa(grid, vals))
        b = schmidt(_jsa(grid, Q1 @ vals @ Q2))
        assert abs(a.purity - b.purity) < 1e-10
        assert abs(a.pair_probability - b.pair_probability) \
            < 1e-10 * a.pair_probability

    def test_pair_probability_scaling(self):
        grid = KGrid.default(11)
        vals = np.zeros((11, 11), dtype=complex)
        vals[3, 7] = 2.0
        s = schmidt(_jsa(grid, vals))
        assert s.pair_probability == pytest.approx(4.0 * grid.dk**2)

    def test_zero_jsa_rejected(self):
        grid = KGrid.default(11)
        with pytest.raises(DegenerateSpectrumError):
            schmidt(_jsa(grid, np.zeros((11, 11))))

    def test_nonfinite_rejected(self):
        grid = KGrid.default(11)
        vals = np.zeros((11, 11))
        vals[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            _jsa(grid, vals)


class TestJta:
    def test_axes_and_padding(self):
        grid = KGrid.default(21)
        t = jta(_gaussian_jsa(grid, 500.0, 500.0), (7e7, 7e7))
        assert t.values.shape == (63, 63)
        assert t.t_signal.size == 63
        # symmetric time axes
        assert t.t_signal[0] == pytest.approx(-t.t_signal[-1],
                                              rel=0.0, abs=abs(t.t_signal[1]))

    def test_parseval(self):
        grid = KGrid.default(41)
        j = _gaussian_jsa(grid, 700.0, 400.0, theta=0.3)
        t = jta(j, (7e7, 7e7))
        # fft2 preserves sum of squares up to the transform size factor
        assert np.sum(np.abs(t.values) ** 2) == pytest.approx(
            np.sum(np.abs(j.values) ** 2) * t.values.shape[0] ** 2 / 1.0,
            rel=1e-10)

    def test_narrow_spectrum_gives_broad_time(self):
        grid = KGrid.default(81)
        t_narrow = jta(_gaussian_jsa(grid, 200.0, 200.0), (7e7, 7e7))
        t_broad = jta(_gaussian_jsa(grid, 1000.0, 1000.0), (7e7, 7e7))

        def width(t):
            p = np.abs(t.values) ** 2
            marg = p.sum(axis=1)
            marg /= marg.sum()
            mu = np.sum(t.t_signal * marg)
            return np.sqrt(np.sum((t.t_signal - mu) ** 2 * marg))

        assert width(t_narrow) > 3.0 * width(t_broad)


class TestFidelity:
    def test_self_fidelity_and_invariance(self, rng):
        grid = KGrid.default(21)
        vals = rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21))
        a = _jsa(grid, vals)
        assert jsa_fidelity(a, a) == pytest.approx(1.0, abs=1e-12)
        b = _jsa(grid, 3.0 * np.exp(0.7j) * vals)
        assert jsa_fidelity(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_states(self):
        grid = KGrid.default(11)
        a = np.zeros((11, 11), dtype=complex)
        b = np.zeros((11, 11), dtype=complex)
        a[0, 0] = 1.0
        b[1, 1] = 1.0
        assert jsa_fidelity(_jsa(grid, a), _jsa(grid, b)) == 0.0

    def test_zero_norm_rejected(self):
        grid = KGrid.default(11)
        a = _jsa(grid, np.zeros((11, 11)))
        b = _jsa(grid, np.ones((11, 11)))
        with pytest.raises(DegenerateSpectrumError):
            jsa_fidelity(a, b)

    def test_shape_mismatch_rejected(self):
        a = _jsa(KGrid.default(11), np.ones((11, 11)))
        b = _jsa(KGrid.default(13), np.ones((13, 13)))
        with pytest.raises(ValueError, match="matching grids"):
            jsa_fidelity(a, b)


class TestMixtures:
    def test_heralded_density_normalized(self, rng):
        grid = KGrid.default(21)
        vals = rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21))
        rho = heralded_density(_jsa(grid, vals))
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(rho - rho.conj().T) < 1e-12

    def test_identical_members_keep_purity(self, rng):
        grid = KGrid.default(21)
        u = rng.normal(size=21) + 1j * rng.normal(size=21)
        v = rng.normal(size=21) + 1j * rng.normal(size=21)
        pure = _jsa(grid, np.outer(u, v))
        assert ensemble_purity([pure, pure, pure]) == pytest.approx(1.0,
                                                                    abs=1e-10)

    def test_distinct_members_reduce_purity(self):
        grid = KGrid.default(21)
        a = np.zeros((21, 21), dtype=complex)
        b = np.zeros((21, 21), dtype=complex)
        a[0, 0] = 1.0
        b[1, 1] = 1.0
        assert ensemble_purity([_jsa(grid, a), _jsa(grid, b)]) \
            == pytest.approx(0.5, abs=1e-12)

    def test_accumulator_matches_direct_mixture(self, rng):
        grid = KGrid.default(21)
        jsas = [_jsa(grid, rng.normal(size=(21, 21))
                     + 1j * rng.normal(size=(21, 21))) for _ in range(4)]
        acc = EnsembleDensityAccumulator()
        for j in jsas:
            acc.add(j)
        assert acc.count == 4
        assert acc.purity() == pytest.approx(ensemble_purity(jsas), abs=1e-12)

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            ensemble_purity([])
        with pytest.raises(ValueError):
            EnsembleDensityAccumulator().purity()
