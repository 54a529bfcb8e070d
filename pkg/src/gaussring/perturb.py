"""First-order (truncated Neumann series) solver.

The squeezing driving terms are resonantly filtered to the output ports by
the linear response L = T V^-1 gamma_bar^+ (-ik calV + Gamma_bar)^-1, which
for tuned systems is diagonal in k.  This is the fast path used for sweeps
and Monte-Carlo ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from gaussring.analysis import JointSpectralAmplitude
from gaussring.gaussdyn import GammaBlocks
from gaussring.lingrid import KGrid, _resolvents, scattering_matrices
from gaussring.model import DerivedLinear


@dataclass
class PerturbFilter:
    """Cavity-to-output linear filter L(k) per grid point, (n_k, J, N)."""

    grid: KGrid
    channel_labels: tuple[str, ...]
    cavity_labels: tuple[str, ...]
    L: NDArray[np.complex128]

    def channel(self, label: str | int) -> NDArray[np.complex128]:
        idx = self.channel_labels.index(label) if isinstance(label, str) else label
        return self.L[:, idx, :]


def perturb_filter(derived: DerivedLinear, grid: KGrid) -> PerturbFilter:
    """L(k) = T V^-1 gamma_bar^+ (-ik calV + Gamma_bar)^-1 for every k."""
    R = _resolvents(derived, grid.values)
    TVg = derived.T @ (derived.gamma_bar.conj().T / derived.V[:, None])
    L = np.einsum("jc,kcm->kjm", TVg, R)
    return PerturbFilter(grid=grid, channel_labels=tuple(derived.channel_labels),
                        cavity_labels=tuple(derived.cavity_labels), L=L)


def _raw_rows(
    derived: DerivedLinear,
    blocks: GammaBlocks,
    mode_i: str | int,
    filt: PerturbFilter,
) -> NDArray[np.complex128]:
    """First-order raw beta rows for one output mode, all input channels.

    out[a, j, b] = [L(k_a) Gamma_sq(k_a, k_b) (R(k_b) gamma_bar)^*]_{ij}
    """
    R = _resolvents(derived, blocks.grid.values)
    Rg = np.einsum("kcm,mj->kcj", R, derived.gamma_bar).conj()  # (n, N, J)
    i_idx = filt.channel_labels.index(mode_i) if isinstance(mode_i, str) else mode_i
    L_i = filt.L[:, i_idx, :]
    return np.einsum("ac,cdab,bjd->ajb", L_i, blocks.gamma_sq, Rg.transpose(0, 2, 1),
                     optimize=True)


def perturbative_jsa(
    derived: DerivedLinear,
    blocks: GammaBlocks,
    mode_i: str | int,
    mode_j: str | int,
    filt: PerturbFilter | None = None,
) -> JointSpectralAmplitude:
    """First-order beta^h block: the raw squeezing response rotated back
    through the passive linear scattering, beta_raw(k, k') W(k')^T.

    At first order the unitary polar factor is the linear scattering map
    itself, so undoing it on the creation index yields the Hermitian part
    exactly to O(Gamma_sq^2).  The coherent sum over cavity-mode pairs
    includes the forward and backward ring contributions wherever both
    squeezing blocks are filled.
    """
    if filt is None:
        filt = perturb_filter(derived, blocks.grid)
    raw = _raw_rows(derived, blocks, mode_i, filt)  # (n, J, n)
    W = scattering_matrices(derived, blocks.grid.values)  # (n, J, J)
    j_idx = filt.channel_labels.index(mode_j) if isinstance(mode_j, str) else mode_j
    beta = np.einsum("ajb,bj->ab", raw, W[:, j_idx, :], optimize=True)
    lab_i = mode_i if isinstance(mode_i, str) else filt.channel_labels[mode_i]
    lab_j = mode_j if isinstance(mode_j, str) else filt.channel_labels[mode_j]
    return JointSpectralAmplitude(grid=blocks.grid, values=beta, modes=(lab_i, lab_j))


def perturbative_beta_raw(
    derived: DerivedLinear,
    blocks: GammaBlocks,
    mode_i: str | int,
    mode_j: str | int,
    filt: PerturbFilter | None = None,
) -> NDArray[np.complex128]:
    """First-order (annihilation i, creation j) block of the raw kernel M.

    This is the stimulated response actually measured when seeding mode j:
    beta_ij(k, k') = [L(k) Gamma_sq(k, k') (R(k') gamma_bar)^*]_ij with the
    conjugated creation-sector drive on the right.
    """
    if filt is None:
        filt = perturb_filter(derived, blocks.grid)
    raw = _raw_rows(derived, blocks, mode_i, filt)
    j_idx = filt.channel_labels.index(mode_j) if isinstance(mode_j, str) else mode_j
    return raw[:, j_idx, :]


def filter_marginals(filt: PerturbFilter, channel_mode: str | int,
                     cavity_mode: str | int) -> NDArray[np.float64]:
    """|integral dk' L(k, k')| per k: the axis curves of the overlay figures.

    For tuned systems the filter is diagonal in k, so the marginal is the
    modulus of the per-point filter entry.
    """
    idx = filt.cavity_labels.index(cavity_mode) if isinstance(cavity_mode, str) else cavity_mode
    return np.abs(filt.channel(channel_mode)[:, idx])
