"""Doubled-space Gaussian dynamics: squeezing blocks, the discretized
symplectic input-output kernel, and its polar decomposition.

The doubled basis orders all channel (cavity) annihilation components
before the creation components, each flattened mode-major over the
wavenumber grid: row = mode * n_points + sample.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from gaussring.lingrid import ConvolutionTable, KGrid
from gaussring.model import DerivedLinear, SolverError

#: kernel construction refuses to return above this Bogoliubov residual
BOGOLIUBOV_REFUSE = 1e-6
#: advisory threshold beyond which sinh-linearity of the JSA degrades
LOW_SQUEEZING_WARN = 0.3


@dataclass(frozen=True)
class NonlinearCoupling:
    """Effective four-wave-mixing strength and pump top-hat amplitude.

    Only the product lambda * |pump_amplitude|^2 matters at first order;
    both are kept so the calibration can report either convention.
    """

    lambda_scalar: float
    pump_amplitude: complex = 1.0 + 0j

    @property
    def drive_strength(self) -> float:
        return float(self.lambda_scalar * abs(self.pump_amplitude) ** 2)


@dataclass
class GammaBlocks:
    """Squeezing driving terms on the (cavity, cavity, k, k') grid.

    gamma_sq[s, i] holds the (annihilation s, creation i) squeezing block;
    the phase-modulation block is identically zero in this study and kept
    only so the symbol is housed.
    """

    grid: KGrid
    cavity_labels: tuple[str, ...]
    gamma_sq: NDArray[np.complex128]
    gamma_pm: NDArray[np.complex128] | None = None

    @property
    def n_cavities(self) -> int:
        return len(self.cavity_labels)

    def block(self, s: str | int, i: str | int) -> NDArray[np.complex128]:
        s = self.cavity_labels.index(s) if isinstance(s, str) else s
        i = self.cavity_labels.index(i) if isinstance(i, str) else i
        return self.gamma_sq[s, i]


def build_gamma_sq(
    conv: ConvolutionTable,
    coupling: NonlinearCoupling,
    derived: DerivedLinear,
    grid: KGrid,
    wiring: tuple[tuple[str, str, str], ...],
    pump_velocity: float,
) -> GammaBlocks:
    """Fill the squeezing blocks from the pump-pair convolution tables.

    For each wired (signal cavity s, idler cavity i, convolution key) the
    block is i (lambda |A|^2 / 2 pi) v_s / v_p times the pump convolution
    evaluated at (v_s k + v_i k' + Delta) / v_p, and the exchanged-index
    partner carries v_i with the exchanged argument.  The velocity-weighted
    pair (not a symmetrized average) is what keeps the discrete system
    symplectic to machine precision.
    """
    n = grid.n_points
    N = derived.n_cavities
    labels = tuple(derived.cavity_labels)
    ks = grid.values
    B = np.zeros((N, N, n, n), dtype=complex)
    pref_base = 1j * coupling.drive_strength / (2.0 * np.pi)
    for s_lab, i_lab, key in wiring:
        if key not in conv.entries:
            raise SolverError(f"missing convolution entry {key!r}")
        s = labels.index(s_lab)
        i = labels.index(i_lab)
        v_s = derived.calV[s]
        v_i = derived.calV[i]
        args = (v_s * ks[:, None] + v_i * ks[None, :] + conv.detuning) / pump_velocity
        blk = pref_base * v_s / pump_velocity * conv.evaluate(key, args)
        B[s, i] = blk
        B[i, s] = (v_i / v_s) * blk.T
    return GammaBlocks(grid=grid, cavity_labels=labels, gamma_sq=B)


@dataclass
class SymplecticKernel:
    """Discretized Gaussian input-output transformation M over channels.

    ``M`` is the discrete map acting on sample vectors; the continuum
    kernel at (k_a, k_b) is M[a, b] / dk off the identity part.  Blocks are
    addressed by channel label and annihilation/creation sector.
    """

    grid: KGrid
    channel_labels: tuple[str, ...]
    M: NDArray[np.complex128]
    bogoliubov_residuals: tuple[float, float] = (0.0, 0.0)

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)

    def _mode_index(self, label: str | int) -> int:
        return self.channel_labels.index(label) if isinstance(label, str) else label

    def _rows(self, mode: str | int, creation: bool) -> slice:
        n = self.grid.n_points
        m = self._mode_index(mode) + (self.n_channels if creation else 0)
        return slice(m * n, (m + 1) * n)

    def alpha_block(self, i: str | int, j: str | int) -> NDArray[np.complex128]:
        """Discrete (annihilation, annihilation) block."""
        return self.M[self._rows(i, False), self._rows(j, False)]

    def beta_block(self, i: str | int, j: str | int) -> NDArray[np.complex128]:
        """Discrete (annihilation, creation) block."""
        return self.M[self._rows(i, False), self._rows(j, True)]

    @property
    def alpha(self) -> NDArray[np.complex128]:
        h = self.M.shape[0] // 2
        return self.M[:h, :h]

    @property
    def beta(self) -> NDArray[np.complex128]:
        h = self.M.shape[0] // 2
        return self.M[:h, h:]


def bogoliubov_residuals(M: NDArray[np.complex128]) -> tuple[float, float]:
    """Relative Frobenius defects of (aa+ - bb+ = 1, ab^T symmetric)."""
    h = M.shape[0] // 2
    a = M[:h, :h]
    b = M[:h, h:]
    ident = a @ a.conj().T - b @ b.conj().T
    r1 = np.linalg.norm(ident - np.eye(h)) / np.linalg.norm(np.eye(h))
    ab = a @ b.T
    denom = max(np.linalg.norm(ab), 1e-30)
    r2 = np.linalg.norm(ab - ab.T) / denom
    return float(r1), float(r2)


def _doubled(m: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return scipy.linalg.block_diag(m, m.conj())


def solve_full_kernel(
    derived: DerivedLinear,
    blocks: GammaBlocks,
    grid: KGrid,
    check: bool = True,
) -> SymplecticKernel:
    """Assemble and invert the doubled-space equations of motion.

    The delta function carries 1/dk on the diagonal and integrals carry dk
    (rectangle rule), which makes the zero-squeezing limit exact per grid
    point.  Refuses to return when the Bogoliubov residual exceeds 1e-6.
    """
    if grid.n_points != blocks.grid.n_points:
        raise SolverError("squeezing blocks and grid have mismatched sizes")
    n = grid.n_points
    N = derived.n_cavities
    J = derived.n_channels
    ks = grid.values
    dk = grid.dk

    # cavity-space linear generator, doubled and flattened mode-major
    Gd = _doubled(derived.Gamma_bar)  # (2N, 2N)
    L = np.kron(Gd, np.eye(n)).astype(complex)
    v_signed = np.concatenate([derived.calV, -derived.calV])
    diag = -1j * (v_signed[:, None] * ks[None, :]).ravel()
    L[np.arange(2 * N * n), np.arange(2 * N * n)] += diag
    # squeezing couplings between annihilation and creation sectors
    for s in range(N):
        for i in range(N):
            blk = blocks.gamma_sq[s, i]
            if not np.any(blk):
                continue
            L[s * n:(s + 1) * n, (N + i) * n:(N + i + 1) * n] += dk * blk
            L[(N + s) * n:(N + s + 1) * n, i * n:(i + 1) * n] += dk * blk.conj()

    gbd = _doubled(derived.gamma_bar)  # (2N, 2J)
    gam = np.kron(gbd, np.eye(n))  # (2Nn, 2Jn)
    try:
        X = np.linalg.solve(L, gam)
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular doubled-space system matrix") from exc

    # M = T_doubled (1 - V^-1 gamma_bar^+ L^-1 gamma_bar), applied per sample
    Vd = np.concatenate([derived.V, derived.V])
    inner = np.einsum("cj,caL->jaL", gbd.conj(), X.reshape(2 * N, n, 2 * J * n))
    inner /= Vd[:, None, None]
    M = -inner.reshape(2 * J * n, 2 * J * n)
    M[np.arange(2 * J * n), np.arange(2 * J * n)] += 1.0
    Td = _doubled(derived.T)
    M = np.einsum("ij,jab->iab", Td, M.reshape(2 * J, n, 2 * J * n)).reshape(
        2 * J * n, 2 * J * n)

    res = bogoliubov_residuals(M) if check else (0.0, 0.0)
    if check and (res[0] > BOGOLIUBOV_REFUSE or res[1] > BOGOLIUBOV_REFUSE):
        raise SolverError(
            f"Bogoliubov residuals {res} exceed {BOGOLIUBOV_REFUSE:g}: "
            "discretization failure"
        )
    return SymplecticKernel(grid=grid, channel_labels=tuple(derived.channel_labels),
                            M=M, bogoliubov_residuals=res)


@dataclass
class PolarParts:
    """Hermitian/unitary polar factors of a symplectic kernel."""

    grid: KGrid
    channel_labels: tuple[str, ...]
    M_h: NDArray[np.complex128]
    M_u: NDArray[np.complex128]

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)

    def beta_h_discrete(self, i: str | int, j: str | int) -> NDArray[np.complex128]:
        n = self.grid.n_points
        J = self.n_channels
        ii = self.channel_labels.index(i) if isinstance(i, str) else i
        jj = self.channel_labels.index(j) if isinstance(j, str) else j
        return self.M_h[ii * n:(ii + 1) * n, (J + jj) * n:(J + jj + 1) * n]

    def beta_h(self, i: str | int, j: str | int) -> NDArray[np.complex128]:
        """Continuum-normalized squeezing block beta^h_ij(k, k')."""
        return self.beta_h_discrete(i, j) / self.grid.dk


def polar_decompose(kernel: SymplecticKernel) -> PolarParts:
    """M = M_h M_u via full-matrix SVD (M = U S W+ -> M_h = U S U+, M_u = U W+)."""
    try:
        U, s, Wh = scipy.linalg.svd(kernel.M, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # type: ignore[attr-defined]
        raise SolverError("SVD of the symplectic kernel failed") from exc
    M_h = (U * s) @ U.conj().T
    M_u = U @ Wh
    return PolarParts(grid=kernel.grid, channel_labels=kernel.channel_labels,
                      M_h=M_h, M_u=M_u)


def jsa_block(parts: PolarParts, mode_i: str | int, mode_j: str | int):
    """Joint spectral amplitude for the (mode_i, mode_j) output pair.

    Warns when the block norm leaves the low-squeezing regime in which the
    biphoton interpretation of beta^h holds.
    """
    from gaussring.analysis import JointSpectralAmplitude

    if isinstance(mode_i, str) and mode_i not in parts.channel_labels:
        raise KeyError(f"unknown mode label {mode_i!r}")
    if isinstance(mode_j, str) and mode_j not in parts.channel_labels:
        raise KeyError(f"unknown mode label {mode_j!r}")
    disc = parts.beta_h_discrete(mode_i, mode_j)
    norm = np.linalg.norm(disc)
    if norm > LOW_SQUEEZING_WARN:
        warnings.warn(
            f"beta^h block norm {norm:.3g} exceeds {LOW_SQUEEZING_WARN}: "
            "low-squeezing JSA interpretation degrading",
            stacklevel=2,
        )
    lab_i = mode_i if isinstance(mode_i, str) else parts.channel_labels[mode_i]
    lab_j = mode_j if isinstance(mode_j, str) else parts.channel_labels[mode_j]
    return JointSpectralAmplitude(grid=parts.grid, values=disc / parts.grid.dk,
                                  modes=(lab_i, lab_j))
