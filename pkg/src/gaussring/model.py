"""Coupled cavity-waveguide models and their derived linear operators.

A model consists of J waveguide channels and N cavity modes, with three
coupling matrices: channel-cavity (gamma, N x J), cavity-cavity (g, N x N,
Hermitian) and channel-channel (C, J x J, Hermitian).  All solvers consume
the derived operators (C-tilde, T, gamma-bar, Gamma-bar) produced here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import NDArray

HERMITICITY_TOL = 1e-12  # relative Frobenius, fixed for double precision


class ModelError(ValueError):
    """Raised for malformed or unphysical model input."""


class SolverError(RuntimeError):
    """Raised when a numerical solve fails or refuses to return."""


@dataclass(frozen=True)
class ChannelSpec:
    """One waveguide channel: carrier frequency (rad/s), group velocity (m/s)."""

    carrier_frequency: float
    group_velocity: float
    direction: Literal["forward", "backward"] = "forward"
    kind: Literal["bus", "loss"] = "bus"
    label: str = ""

    def __post_init__(self) -> None:
        if self.group_velocity <= 0:
            raise ModelError(f"channel {self.label!r}: group velocity must be > 0")
        if self.carrier_frequency <= 0:
            raise ModelError(f"channel {self.label!r}: carrier frequency must be > 0")


@dataclass(frozen=True)
class CavitySpec:
    """One cavity mode: resonance frequency (rad/s) and phenomenological
    group velocity (m/s) used to map the mode onto the wavenumber grid."""

    resonance_frequency: float
    group_velocity: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.group_velocity <= 0:
            raise ModelError(f"cavity {self.label!r}: group velocity must be > 0")
        if self.resonance_frequency <= 0:
            raise ModelError(f"cavity {self.label!r}: resonance frequency must be > 0")


@dataclass
class CoupledCavityModel:
    """Immutable description of the linear system.

    gamma[n, j] couples cavity n to channel j (s^-1 * sqrt(m/s) convention),
    g[n, m] couples cavities (rad/s, Hermitian), C[j, l] couples channels at
    the coupling point (m/s scale, Hermitian).
    """

    channels: Sequence[ChannelSpec]
    cavities: Sequence[CavitySpec]
    gamma: NDArray[np.complex128]
    g: NDArray[np.complex128]
    C: NDArray[np.complex128]

    def __post_init__(self) -> None:
        J, N = len(self.channels), len(self.cavities)
        self.gamma = np.asarray(self.gamma, dtype=complex)
        self.g = np.asarray(self.g, dtype=complex)
        self.C = np.asarray(self.C, dtype=complex)
        if self.gamma.shape != (N, J):
            raise ModelError(f"gamma must be {N}x{J}, got {self.gamma.shape}")
        if self.g.shape != (N, N):
            raise ModelError(f"g must be {N}x{N}, got {self.g.shape}")
        if self.C.shape != (J, J):
            raise ModelError(f"C must be {J}x{J}, got {self.C.shape}")

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def n_cavities(self) -> int:
        return len(self.cavities)

    @property
    def V(self) -> NDArray[np.float64]:
        """Channel group velocities (diagonal of the V matrix)."""
        return np.array([c.group_velocity for c in self.channels])

    @property
    def calV(self) -> NDArray[np.float64]:
        """Cavity phenomenological group velocities."""
        return np.array([c.group_velocity for c in self.cavities])

    @property
    def Omega(self) -> NDArray[np.float64]:
        return np.array([c.carrier_frequency for c in self.channels])

    @property
    def omega(self) -> NDArray[np.float64]:
        return np.array([c.resonance_frequency for c in self.cavities])

    @property
    def channel_labels(self) -> list[str]:
        return [c.label or f"ch{j}" for j, c in enumerate(self.channels)]

    @property
    def cavity_labels(self) -> list[str]:
        return [c.label or f"cav{n}" for n, c in enumerate(self.cavities)]

    def to_dict(self) -> dict:
        return {
            "channels": [
                {
                    "carrier_frequency": c.carrier_frequency,
                    "group_velocity": c.group_velocity,
                    "direction": c.direction,
                    "kind": c.kind,
                    "label": c.label,
                }
                for c in self.channels
            ],
            "cavities": [
                {
                    "resonance_frequency": c.resonance_frequency,
                    "group_velocity": c.group_velocity,
                    "label": c.label,
                }
                for c in self.cavities
            ],
            "gamma": _complex_to_pairs(self.gamma),
            "g": _complex_to_pairs(self.g),
            "C": _complex_to_pairs(self.C),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoupledCavityModel":
        return cls(
            channels=[ChannelSpec(**c) for c in d["channels"]],
            cavities=[CavitySpec(**c) for c in d["cavities"]],
            gamma=_pairs_to_complex(d["gamma"]),
            g=_pairs_to_complex(d["g"]),
            C=_pairs_to_complex(d["C"]),
        )

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path: str) -> "CoupledCavityModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _complex_to_pairs(a: NDArray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def _pairs_to_complex(rows: list) -> NDArray[np.complex128]:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass(frozen=True)
class DerivedLinear:
    """Constant operators entering every frequency-domain solve.

    C_tilde = 1 + (i/2) V^-1 C,  T = C_tilde^-1 C_tilde^dagger (unitary),
    gamma_bar = gamma C_tilde^-1,  Gamma_bar = (1/2) gamma_bar V^-1
    gamma^dagger + i g.  Channel/cavity velocity diagonals are carried along
    so downstream solvers need no separate model handle.
    """

    C_tilde: NDArray[np.complex128]
    T: NDArray[np.complex128]
    gamma_bar: NDArray[np.complex128]
    Gamma_bar: NDArray[np.complex128]
    V: NDArray[np.float64]
    calV: NDArray[np.float64]
    Omega: NDArray[np.float64]
    omega: NDArray[np.float64]
    channel_labels: tuple[str, ...] = ()
    cavity_labels: tuple[str, ...] = ()

    @property
    def n_channels(self) -> int:
        return self.T.shape[0]

    @property
    def n_cavities(self) -> int:
        return self.Gamma_bar.shape[0]

    def channel_index(self, label: str) -> int:
        return self.channel_labels.index(label)

    def cavity_index(self, label: str) -> int:
        return self.cavity_labels.index(label)


def _rel_herm_defect(m: NDArray[np.complex128]) -> float:
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(m - m.conj().T) / scale)


def validate_model(model: CoupledCavityModel, tuned: bool = False) -> list[str]:
    """Return human-readable invariant violations; empty list means valid.

    With ``tuned=True`` the additional equal-tuning / equal-velocity
    requirements of the tuned frequency-domain solver are checked.
    """
    out: list[str] = []
    if _rel_herm_defect(model.g) > HERMITICITY_TOL:
        ij = _worst_herm_entry(model.g)
        out.append(f"g is not Hermitian: g[{ij[0]},{ij[1]}] != conj(g[{ij[1]},{ij[0]}])")
    if _rel_herm_defect(model.C) > HERMITICITY_TOL:
        ij = _worst_herm_entry(model.C)
        out.append(f"C is not Hermitian: C[{ij[0]},{ij[1]}] != conj(C[{ij[1]},{ij[0]}])")
    V = model.V
    for j in range(model.n_channels):
        for l in range(model.n_channels):
            if j != l and model.C[j, l] != 0 and not np.isclose(V[j], V[l], rtol=1e-12):
                out.append(
                    f"C[{j},{l}] couples channels with mismatched group velocities "
                    f"({V[j]:.6g} != {V[l]:.6g}); point coupling requires v_j = v_l"
                )
    if tuned:
        calV = model.calV
        omega = model.omega
        for n in range(model.n_cavities):
            for j in range(model.n_channels):
                if model.gamma[n, j] != 0 and not np.isclose(V[j], calV[n], rtol=1e-12):
                    out.append(
                        f"gamma[{n},{j}] nonzero but v_j={V[j]:.6g} != "
                        f"cavity velocity {calV[n]:.6g} (tuned solver requirement)"
                    )
            for m in range(model.n_cavities):
                if n != m and model.g[n, m] != 0 and not np.isclose(omega[n], omega[m], rtol=1e-12):
                    out.append(
                        f"g[{n},{m}] nonzero but omega_{n} != omega_{m} "
                        "(tuned solver requirement)"
                    )
    return out


def _worst_herm_entry(m: NDArray[np.complex128]) -> tuple[int, int]:
    d = np.abs(m - m.conj().T)
    return tuple(int(x) for x in np.unravel_index(np.argmax(d), d.shape))  # type: ignore[return-value]


def derive_linear(model: CoupledCavityModel) -> DerivedLinear:
    """Derive the constant linear operators from a validated model.

    Raises ModelError on Hermiticity violations or a singular C-tilde
    (unphysical channel-channel coupling).
    """
    violations = [v for v in validate_model(model) if "Hermitian" in v]
    if violations:
        raise ModelError("; ".join(violations))

    V = model.V
    Vinv = 1.0 / V
    C_tilde = np.eye(model.n_channels, dtype=complex) + 0.5j * (Vinv[:, None] * model.C)
    try:
        C_tilde_inv = np.linalg.inv(C_tilde)
    except np.linalg.LinAlgError as exc:
        raise ModelError("C_tilde is singular: unphysical channel coupling") from exc
    cond = np.linalg.cond(C_tilde)
    if not np.isfinite(cond) or cond > 1e12:
        raise ModelError(f"C_tilde is numerically singular (cond={cond:.3g})")

    T = C_tilde_inv @ C_tilde.conj().T
    gamma_bar = model.gamma @ C_tilde_inv
    Gamma_bar = 0.5 * (gamma_bar * Vinv[None, :]) @ model.gamma.conj().T + 1j * model.g
    return DerivedLinear(
        C_tilde=C_tilde,
        T=T,
        gamma_bar=gamma_bar,
        Gamma_bar=Gamma_bar,
        V=V,
        calV=model.calV,
        Omega=model.Omega,
        omega=model.omega,
        channel_labels=tuple(model.channel_labels),
        cavity_labels=tuple(model.cavity_labels),
    )
