"""Squeezing blocks, the full symplectic kernel and polar decomposition."""

import numpy as np
import pytest
import scipy.linalg

from gaussring.engine import pump_drive, run_scenario
from gaussring.gaussdyn import (
    GammaBlocks,
    NonlinearCoupling,
    SymplecticKernel,
    bogoliubov_residuals,
    build_gamma_sq,
    jsa_block,
    polar_decompose,
    solve_full_kernel,
)
from gaussring.lingrid import KGrid, scattering_matrices
from gaussring.model import SolverError, derive_linear
from gaussring.ringscene import RingDefectParams, build_fwm_scenario


def _blocks(scenario, grid, lam):
    coupling = NonlinearCoupling(lam)
    pump = pump_drive(scenario, grid, coupling.pump_amplitude)
    derived = derive_linear(scenario.signal_model)
    return derived, build_gamma_sq(pump.convolutions, coupling, derived, grid,
                                   scenario.sq_wiring, scenario.pump_velocity)


class TestGammaSq:
    def test_exchange_partner_weighting(self, ideal_scenario, grid_small):
        derived, blocks = _blocks(ideal_scenario, grid_small, 1e6)
        labels = blocks.cavity_labels
        s = labels.index("sf")
        i = labels.index("if")
        v_s = derived.calV[s]
        v_i = derived.calV[i]
        assert np.allclose(blocks.gamma_sq[i, s],
                           (v_i / v_s) * blocks.gamma_sq[s, i].T)

    def test_unwired_blocks_are_zero(self, ideal_scenario, grid_small):
        _, blocks = _blocks(ideal_scenario, grid_small, 1e6)
        labels = blocks.cavity_labels
        assert not np.any(blocks.block("sf", "ib"))
        # backward pump is empty in the ideal device
        assert not np.any(blocks.block("sb", "ib"))

    def test_scales_linearly_with_drive(self, ideal_scenario, grid_small):
        _, b1 = _blocks(ideal_scenario, grid_small, 1e6)
        _, b2 = _blocks(ideal_scenario, grid_small, 3e6)
        assert np.allclose(b2.gamma_sq, 3.0 * b1.gamma_sq)

    def test_missing_convolution_key_raises(self, ideal_scenario, grid_small):
        coupling = NonlinearCoupling(1e6)
        pump = pump_drive(ideal_scenario, grid_small)
        derived = derive_linear(ideal_scenario.signal_model)
        with pytest.raises(SolverError, match="missing convolution"):
            build_gamma_sq(pump.convolutions, coupling, derived, grid_small,
                           (("sf", "if", "nope"),),
                           ideal_scenario.pump_velocity)


class TestFullKernel:
    def test_zero_coupling_reduces_to_linear_scattering(self, ideal_scenario,
                                                        grid_small):
        derived, blocks = _blocks(ideal_scenario, grid_small, 0.0)
        kernel = solve_full_kernel(derived, blocks, grid_small)
        W = scattering_matrices(derived, grid_small.values)
        J = derived.n_channels
        for i in range(J):
            for j in range(J):
                assert np.max(np.abs(kernel.alpha_block(i, j)
                                     - np.diag(W[:, i, j]))) < 1e-10
        assert np.max(np.abs(kernel.beta)) < 1e-10

    def test_bogoliubov_residuals_small(self, ideal_scenario, grid_small,
                                        coupling):
        derived, blocks = _blocks(ideal_scenario, grid_small,
                                  coupling.lambda_scalar)
        kernel = solve_full_kernel(derived, blocks, grid_small)
        assert kernel.bogoliubov_residuals[0] < 1e-8
        assert kernel.bogoliubov_residuals[1] < 1e-8

    def test_grid_mismatch_raises(self, ideal_scenario, grid_small):
        derived, blocks = _blocks(ideal_scenario, grid_small, 1e6)
        with pytest.raises(SolverError, match="mismatched"):
            solve_full_kernel(derived, blocks, KGrid.default(21))

    def test_block_addressing(self, ideal_scenario, grid_small):
        derived, blocks = _blocks(ideal_scenario, grid_small, 1e6)
        kernel = solve_full_kernel(derived, blocks, grid_small)
        n = grid_small.n_points
        assert kernel.beta_block("s1f", "i1f").shape == (n, n)
        idx = kernel.channel_labels.index("s1f")
        assert np.array_equal(kernel.alpha_block("s1f", "s1f"),
                              kernel.alpha_block(idx, idx))


class TestPolar:
    def test_round_trip_recovers_constructed_factors(self, rng):
        # build M = M_h M_u with known symplectic polar factors
        n = 16
        grid = KGrid(n, -1.0, 1.0)
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Z = 0.05 * (X + X.T)
        K = np.block([[np.zeros((n, n)), Z], [Z.conj(), np.zeros((n, n))]])
        M_h = scipy.linalg.expm(K)
        Q, _ = np.linalg.qr(rng.normal(size=(n, n))
                            + 1j * rng.normal(size=(n, n)))
        M_u = scipy.linalg.block_diag(Q, Q.conj())
        kernel = SymplecticKernel(grid=grid, channel_labels=("a",),
                                  M=M_h @ M_u)
        parts = polar_decompose(kernel)
        assert np.linalg.norm(parts.M_h - M_h) < 1e-8
        assert np.linalg.norm(parts.M_u - M_u) < 1e-8

    def test_factors_multiply_back(self, ideal_scenario, grid_small, coupling):
        derived, blocks = _blocks(ideal_scenario, grid_small,
                                  coupling.lambda_scalar)
        kernel = solve_full_kernel(derived, blocks, grid_small)
        parts = polar_decompose(kernel)
        assert np.linalg.norm(parts.M_h @ parts.M_u - kernel.M) \
            < 1e-10 * np.linalg.norm(kernel.M)
        # Hermitian positive factor, unitary factor
        assert np.linalg.norm(parts.M_h - parts.M_h.conj().T) < 1e-10
        eye = np.eye(parts.M_u.shape[0])
        assert np.linalg.norm(parts.M_u @ parts.M_u.conj().T - eye) < 1e-10

    def test_jsa_block_rejects_unknown_label(self, ideal_scenario, grid_small,
                                             coupling):
        derived, blocks = _blocks(ideal_scenario, grid_small,
                                  coupling.lambda_scalar)
        kernel = solve_full_kernel(derived, blocks, grid_small)
        parts = polar_decompose(kernel)
        with pytest.raises(KeyError):
            jsa_block(parts, "s1f", "zzz")

    def test_jsa_block_warns_outside_low_squeezing(self, rng):
        n = 8
        grid = KGrid(n, -1.0, 1.0)
        X = rng.normal(size=(n, n))
        Z = 0.2 * (X + X.T)  # strong squeezing generator
        K = np.block([[np.zeros((n, n)), Z], [Z.conj(), np.zeros((n, n))]])
        kernel = SymplecticKernel(grid=grid, channel_labels=("a",),
                                  M=scipy.linalg.expm(K))
        parts = polar_decompose(kernel)
        assert np.linalg.norm(parts.beta_h_discrete("a", "a")) > 0.3
        with pytest.warns(UserWarning, match="low-squeezing"):
            jsa_block(parts, "a", "a")


def test_bogoliubov_residuals_flag_broken_kernel(rng):
    n = 6
    M = np.eye(2 * n) + 0.1 * rng.normal(size=(2 * n, 2 * n))
    r1, _ = bogoliubov_residuals(M)
    assert r1 > 1e-3
    assert bogoliubov_residuals(np.eye(2 * n)) == (0.0, 0.0)
