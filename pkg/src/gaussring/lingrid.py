"""Wavenumber grids, spectral fields and the frequency-domain linear solvers.

Includes the tuned (equal tunings and group velocities) solver, the
absolute-frequency solver for detuned systems, pump auto-convolution tables
feeding the nonlinear driving terms, and transmission lineshape statistics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from gaussring import _kernels
from gaussring.model import DerivedLinear, SolverError

#: grid used throughout the micro-ring study: 201 points on (-2515.01, 2515.01) 1/m
DEFAULT_GRID_POINTS = 201
DEFAULT_GRID_SPAN = 2515.01


@dataclass(frozen=True)
class KGrid:
    """Uniform wavenumber grid (1/m), symmetric about 0 for odd n_points."""

    n_points: int
    k_min: float
    k_max: float

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise ValueError("KGrid needs at least 3 points")
        if not self.k_max > self.k_min:
            raise ValueError("KGrid needs k_max > k_min")

    @classmethod
    def default(cls, n_points: int = DEFAULT_GRID_POINTS,
                span: float = DEFAULT_GRID_SPAN) -> "KGrid":
        return cls(n_points, -span, span)

    @property
    def values(self) -> NDArray[np.float64]:
        return np.linspace(self.k_min, self.k_max, self.n_points)

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / (self.n_points - 1)

    def to_dict(self) -> dict:
        return {"n_points": self.n_points, "k_min": self.k_min, "k_max": self.k_max}

    @classmethod
    def from_dict(cls, d: dict) -> "KGrid":
        return cls(int(d["n_points"]), float(d["k_min"]), float(d["k_max"]))


@dataclass
class SpectralField:
    """Complex amplitudes indexed (mode, k) on a shared KGrid.

    For absolute-frequency solutions each mode samples its own wavenumber
    axis; those axes are then carried in ``mode_k`` (mode, k) while ``grid``
    keeps the bookkeeping shape.
    """

    grid: KGrid
    amplitudes: NDArray[np.complex128]
    labels: tuple[str, ...] = ()
    mode_k: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 2 or self.amplitudes.shape[1] != self.grid.n_points:
            raise ValueError(
                f"amplitudes must be (n_modes, {self.grid.n_points}), "
                f"got {self.amplitudes.shape}"
            )

    @property
    def n_modes(self) -> int:
        return self.amplitudes.shape[0]

    def mode(self, label_or_index: str | int) -> NDArray[np.complex128]:
        if isinstance(label_or_index, str):
            label_or_index = self.labels.index(label_or_index)
        return self.amplitudes[label_or_index]

    @classmethod
    def top_hat(cls, grid: KGrid, n_modes: int, mode: int, amplitude: complex = 1.0,
                labels: tuple[str, ...] = ()) -> "SpectralField":
        """Constant-amplitude input in one mode across the whole grid."""
        amps = np.zeros((n_modes, grid.n_points), dtype=complex)
        amps[mode, :] = amplitude
        return cls(grid, amps, labels)

    def export_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "mode", "re", "im"])
            for m in range(self.n_modes):
                label = self.labels[m] if self.labels else str(m)
                ks = self.mode_k[m] if self.mode_k is not None else self.grid.values
                for k, z in zip(ks, self.amplitudes[m]):
                    w.writerow([repr(float(k)), label,
                                repr(float(z.real)), repr(float(z.imag))])

    def export_manifest(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump({"grid": self.grid.to_dict(), "labels": list(self.labels)}, fh, indent=2)


@dataclass
class ConvolutionTable:
    """Pump-pair auto/cross convolutions on a uniform argument axis.

    entries[label] is the full discrete convolution of the two intracavity
    pump fields with rectangle-rule dk weight; evaluation at off-grid
    arguments is by linear interpolation, zero outside the support.
    """

    x0: float
    dx: float
    entries: dict[str, NDArray[np.complex128]]
    detuning: float = 0.0

    def evaluate(self, label: str, args: NDArray[np.float64]) -> NDArray[np.complex128]:
        return _kernels.interp_complex(self.x0, self.dx, self.entries[label], args)


@dataclass
class PumpSolution:
    """Linear solution: input, intracavity and transmitted spectral fields."""

    input: SpectralField
    intracavity: SpectralField
    transmitted: SpectralField
    convolutions: ConvolutionTable | None = None


def _resolvents(derived: DerivedLinear, k_values: NDArray[np.float64]
                ) -> NDArray[np.complex128]:
    """(n_k, N, N) array of (-i k calV + Gamma_bar)^-1."""
    N = derived.n_cavities
    lhs = np.broadcast_to(derived.Gamma_bar, (k_values.size, N, N)).copy()
    idx = np.arange(N)
    lhs[:, idx, idx] -= 1j * k_values[:, None] * derived.calV[None, :]
    try:
        return np.linalg.inv(lhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "singular (-ik calV + Gamma_bar): lossless resonance on grid"
        ) from exc


def scattering_matrices(derived: DerivedLinear, k_values: NDArray[np.float64]
                        ) -> NDArray[np.complex128]:
    """(n_k, J, J) linear input-output matrices T (1 - V^-1 gb^+ R gb)."""
    R = _resolvents(derived, k_values)
    gb = derived.gamma_bar
    inner = np.einsum("jn,knm,ml->kjl", gb.conj().T / derived.V[:, None], R, gb)
    eye = np.eye(derived.n_channels)
    return np.einsum("ij,kjl->kil", derived.T, eye[None, :, :] - inner)


def solve_linear_tuned(derived: DerivedLinear, input_field: SpectralField
                       ) -> PumpSolution:
    """Tuned-system linear solve, separable per grid point.

    intracavity(k) = -i (-ik calV + Gamma_bar)^-1 gamma_bar s-(k)
    transmitted(k) = T (1 - V^-1 gamma_bar^+ (...)^-1 gamma_bar) s-(k)
    """
    ks = input_field.grid.values
    R = _resolvents(derived, ks)
    s_in = input_field.amplitudes  # (J, n)
    a = -1j * np.einsum("knm,ml,lk->nk", R, derived.gamma_bar, s_in)
    W = scattering_matrices(derived, ks)
    s_out = np.einsum("kjl,lk->jk", W, s_in)
    cav_labels = tuple(derived.cavity_labels)
    return PumpSolution(
        input=input_field,
        intracavity=SpectralField(input_field.grid, a, cav_labels),
        transmitted=SpectralField(input_field.grid, s_out, input_field.labels),
    )


def solve_linear_absolute_frequency(
    derived: DerivedLinear,
    input_field: SpectralField,
    frequency_samples: Sequence[float] | None = None,
) -> PumpSolution:
    """Detuning-capable linear solve, separable per absolute frequency xi.

    Each cavity mode evaluates at its native wavenumber k_n = (xi - omega_n)
    / calV_n and each channel at k_j = (xi - Omega_j) / v_j; the input field
    is linearly interpolated at those arguments (zero outside its support)
    and the per-mode axes are returned in ``mode_k``.
    """
    grid = input_field.grid
    if frequency_samples is None:
        # native axis of channel 0
        frequency_samples = derived.Omega[0] + derived.V[0] * grid.values
    xi = np.asarray(frequency_samples, dtype=float)
    if xi.size != grid.n_points:
        grid = KGrid(xi.size, 0.0, float(xi.size - 1))  # bookkeeping axis

    J, N = derived.n_channels, derived.n_cavities
    calV, V = derived.calV, derived.V
    # channel inputs sampled at k_j(xi)
    k_ch = (xi[None, :] - derived.Omega[:, None]) / V[:, None]
    s_in = np.zeros((J, xi.size), dtype=complex)
    gv = input_field.grid.values
    eps = np.finfo(float).eps
    for j in range(J):
        src_k = input_field.mode_k[j] if input_field.mode_k is not None else gv
        # the xi -> k map loses ~|xi| eps of absolute precision, enough to
        # push arguments a few ulps off (or outside) the sample positions;
        # snap near-coincident arguments onto the exact samples
        tol = 32.0 * eps * (np.max(np.abs(xi)) / V[j] + np.max(np.abs(src_k)))
        kj = k_ch[j]
        if src_k.size > 1:
            step = src_k[1] - src_k[0]
            u = np.round((kj - src_k[0]) / step)
            on_grid = (u >= 0) & (u < src_k.size)
            nearest = src_k[np.clip(u, 0, src_k.size - 1).astype(int)]
            kj = np.where(on_grid & (np.abs(kj - nearest) <= tol), nearest, kj)
        k_ch[j] = kj
        re = np.interp(kj, src_k, input_field.amplitudes[j].real, left=0.0, right=0.0)
        im = np.interp(kj, src_k, input_field.amplitudes[j].imag, left=0.0, right=0.0)
        s_in[j] = re + 1j * im

    # (-i(xi - omega) + calV Gamma_bar calV^-1)^-1 per xi
    G = (calV[:, None] * derived.Gamma_bar) / calV[None, :]
    lhs = np.broadcast_to(G, (xi.size, N, N)).copy()
    idx = np.arange(N)
    lhs[:, idx, idx] += -1j * (xi[:, None] - derived.omega[None, :])
    try:
        Rxi = np.linalg.inv(lhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular absolute-frequency resolvent") from exc

    drive = (calV[:, None] * derived.gamma_bar) / V[None, :]
    a = -1j * np.einsum("knm,ml,lk->nk", Rxi, drive, s_in)

    gb = derived.gamma_bar
    inner = np.einsum("jn,knm,ml->kjl", gb.conj().T / V[:, None], Rxi, drive)
    eye = np.eye(J)
    W = np.einsum("ij,kjl->kil", derived.T, eye[None, :, :] - inner)
    s_out = np.einsum("kjl,lk->jk", W, s_in)

    k_cav = (xi[None, :] - derived.omega[:, None]) / calV[:, None]
    return PumpSolution(
        input=SpectralField(grid, s_in, input_field.labels, mode_k=k_ch),
        intracavity=SpectralField(grid, a, tuple(derived.cavity_labels), mode_k=k_cav),
        transmitted=SpectralField(grid, s_out, input_field.labels, mode_k=k_ch),
    )


def pump_convolutions(
    pump: PumpSolution,
    pair_labels: dict[str, tuple[str | int, str | int]],
    detuning: float = 0.0,
) -> ConvolutionTable:
    """Build the pump-pair convolution tables driving the squeezing terms.

    pair_labels maps a table key (e.g. "ff") to the two intracavity pump
    modes whose fields are convolved.
    """
    grid = pump.intracavity.grid
    entries: dict[str, NDArray[np.complex128]] = {}
    for key, (p1, p2) in pair_labels.items():
        a1 = pump.intracavity.mode(p1)
        a2 = pump.intracavity.mode(p2)
        entries[key] = _kernels.convolve_full(a1, a2, grid.dk)
    table = ConvolutionTable(x0=2 * grid.k_min, dx=grid.dk, entries=entries,
                             detuning=detuning)
    return table


@dataclass(frozen=True)
class LineshapeStats:
    """Transmission dip descriptors extracted from |t(k)|^2."""

    center: float
    linewidth: float
    min_transmission: float


def extract_lineshape_stats(transmitted: SpectralField, channel: str | int,
                            plateau_fraction: float = 0.05) -> LineshapeStats | None:
    """Locate a transmission dip and measure its full width at mid-depth.

    The off-resonant plateau is the mean of the outermost ``plateau_fraction``
    of grid points on each side; crossings are linearly interpolated.
    Returns None when no dip is present (monotone or flat intensity).
    """
    ks = transmitted.grid.values
    inten = np.abs(transmitted.mode(channel)) ** 2
    n_edge = max(1, int(round(plateau_fraction * ks.size)))
    plateau = 0.5 * (inten[:n_edge].mean() + inten[-n_edge:].mean())
    i_min = int(np.argmin(inten))
    t_min = inten[i_min]
    if i_min in (0, ks.size - 1) or plateau - t_min < 1e-6 * max(plateau, 1e-300):
        return None
    half = 0.5 * (plateau + t_min)

    def _cross(idx_range) -> float | None:
        prev = None
        for i in idx_range:
            if prev is not None and (inten[prev] - half) * (inten[i] - half) <= 0:
                f = (half - inten[prev]) / (inten[i] - inten[prev])
                return float(ks[prev] + f * (ks[i] - ks[prev]))
            prev = i
        return None

    left = _cross(range(i_min, -1, -1))
    right = _cross(range(i_min, ks.size))
    if left is None or right is None:
        return None
    return LineshapeStats(center=float(ks[i_min]), linewidth=float(right - left),
                          min_transmission=float(t_min))
