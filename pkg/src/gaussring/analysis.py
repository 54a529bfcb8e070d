"""Schmidt spectra, purities, pair probabilities, joint temporal amplitudes,
fidelities and ensemble (mixed-state) purity."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from gaussring.lingrid import KGrid

#: zero-padding factor of the JSA -> JTA Fourier transform
JTA_PAD_FACTOR = 3


class DegenerateSpectrumError(ValueError):
    """Raised when a metric is requested for an identically zero amplitude."""


@dataclass
class JointSpectralAmplitude:
    """One beta^h block on a k x k' grid with its output-mode pair."""

    grid: KGrid
    values: NDArray[np.complex128]
    modes: tuple[str, str] = ("", "")

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError(f"JSA values must be {n}x{n}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("JSA contains non-finite entries")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def export_csv(self, path: str) -> None:
        ks = self.grid.values
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "k_prime", "re", "im"])
            for a, ka in enumerate(ks):
                for b, kb in enumerate(ks):
                    z = self.values[a, b]
                    w.writerow([repr(float(ka)), repr(float(kb)),
                                repr(float(z.real)), repr(float(z.imag))])

    def export_manifest(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump({"grid": self.grid.to_dict(), "modes": list(self.modes)}, fh, indent=2)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Singular values of a JSA with the derived scalar metrics."""

    singular_values: NDArray[np.float64]
    purity: float
    pair_probability: float


def schmidt(jsa: JointSpectralAmplitude) -> SchmidtSpectrum:
    """Schmidt decomposition of the JSA.

    purity = sum(s^4) / sum(s^2)^2 and pair probability is the square
    integral of the density, sum(s^2) dk^2.
    """
    if not np.any(jsa.values):
        raise DegenerateSpectrumError("all-zero JSA: purity undefined")
    s = np.linalg.svd(jsa.values, compute_uv=False)
    s2 = float(np.sum(s**2))
    purity = float(np.sum(s**4)) / s2**2
    return SchmidtSpectrum(
        singular_values=s,
        purity=purity,
        pair_probability=s2 * jsa.grid.dk**2,
    )


@dataclass
class JointTemporalAmplitude:
    """Biphoton amplitude on (t_signal, t_idler) axes in seconds."""

    t_signal: NDArray[np.float64]
    t_idler: NDArray[np.float64]
    values: NDArray[np.complex128]


def jta(jsa: JointSpectralAmplitude,
        velocities: tuple[float, float]) -> JointTemporalAmplitude:
    """Centered 2D Fourier transform of the zero-padded JSA.

    The wavenumber axes convert to angular frequency through the signal and
    idler group velocities (omega = v k); padding gives a temporal
    resolution 3x finer than the raw transform.
    """
    n = jsa.grid.n_points
    npad = JTA_PAD_FACTOR * n
    padded = np.zeros((npad, npad), dtype=complex)
    lo = (npad - n) // 2
    padded[lo:lo + n, lo:lo + n] = jsa.values
    spec = np.fft.ifftshift(padded)
    time_vals = np.fft.fftshift(np.fft.fft2(spec))
    v_s, v_i = velocities
    dk = jsa.grid.dk
    t_s = np.fft.fftshift(np.fft.fftfreq(npad, d=v_s * dk / (2.0 * np.pi)))
    t_i = np.fft.fftshift(np.fft.fftfreq(npad, d=v_i * dk / (2.0 * np.pi)))
    return JointTemporalAmplitude(t_signal=t_s, t_idler=t_i, values=time_vals)


def jsa_fidelity(a: JointSpectralAmplitude | NDArray[np.complex128],
                 b: JointSpectralAmplitude | NDArray[np.complex128]) -> float:
    """|<a, b>|^2 / (|a|^2 |b|^2): phase- and scale-invariant overlap."""
    va = a.values if isinstance(a, JointSpectralAmplitude) else np.asarray(a)
    vb = b.values if isinstance(b, JointSpectralAmplitude) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError("fidelity requires matching grids")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise DegenerateSpectrumError("fidelity undefined for a zero-norm JSA")
    ov = np.vdot(va, vb)
    return float(abs(ov) ** 2 / (na**2 * nb**2))


def jsa_amplitude_fidelity(a: JointSpectralAmplitude, b: JointSpectralAmplitude) -> float:
    """|<a, b>| / (|a| |b|): the amplitude-convention overlap."""
    return float(np.sqrt(jsa_fidelity(a, b)))


def heralded_density(jsa: JointSpectralAmplitude) -> NDArray[np.complex128]:
    """Normalized heralded single-photon density matrix (idler traced out)."""
    b = jsa.values
    rho = b @ b.conj().T
    tr = np.trace(rho).real
    if tr <= 0.0:
        raise DegenerateSpectrumError("zero-norm JSA has no heralded state")
    return rho / tr


def ensemble_purity(jsas: list[JointSpectralAmplitude],
                    weights: NDArray[np.float64] | None = None) -> float:
    """Purity of the weighted mixture of heralded single-photon states."""
    if not jsas:
        raise ValueError("empty ensemble")
    if weights is None:
        weights = np.full(len(jsas), 1.0 / len(jsas))
    else:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    rho = np.zeros_like(jsas[0].values)
    for w, jsa in zip(weights, jsas):
        rho = rho + w * heralded_density(jsa)
    return float(np.linalg.norm(rho) ** 2)


class EnsembleDensityAccumulator:
    """Running mean of heralded densities; avoids holding every JSA."""

    def __init__(self) -> None:
        self._sum: NDArray[np.complex128] | None = None
        self._count = 0

    def add(self, jsa: JointSpectralAmplitude) -> None:
        rho = heralded_density(jsa)
        self._sum = rho if self._sum is None else self._sum + rho
        self._count += 1

    @property
    def count(self) -> int:
        return self._count

    def purity(self) -> float:
        if self._sum is None:
            raise ValueError("no members accumulated")
        rho = self._sum / self._count
        return float(np.linalg.norm(rho) ** 2)
