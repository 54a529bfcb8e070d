"""Micro-ring back-scattering scenario builders.

Turns a compact parameter set (waveguide dispersion, ring geometry,
per-resonance defect parameters) into the pump and signal-system
coupled-cavity models of the degenerately pumped four-wave-mixing study.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from gaussring.model import CavitySpec, ChannelSpec, CoupledCavityModel, ModelError

#: ITU C-band grid: channel n sits at (190.0 + 0.1 n) THz
ITU_ANCHOR_THZ = 190.0
ITU_STEP_THZ = 0.1

#: resonance comb used throughout: pump ch 39, signal ch 43, idler ch 35
DEFAULT_ITU_CHANNELS = {"pump": 39, "signal": 43, "idler": 35}


def itu_wavelength_um(channel: int) -> float:
    """Centre wavelength (um) of an ITU C-band channel."""
    f_hz = (ITU_ANCHOR_THZ + ITU_STEP_THZ * channel) * 1e12
    return SPEED_OF_LIGHT / f_hz * 1e6


@dataclass(frozen=True)
class WaveguideDispersion:
    """Effective-index polynomial n_eff(lambda) about a reference wavelength.

    Coefficients are in ascending powers of (lambda - reference), with
    wavelengths in micrometres.  Defaults describe the 220nm x 500nm SOI
    waveguide used in the micro-ring study.
    """

    coefficients: tuple[float, ...] = (2.44, -1.13, -0.04)
    reference_wavelength_um: float = 1.55

    def n_eff(self, wavelength_um: float) -> float:
        d = wavelength_um - self.reference_wavelength_um
        return float(sum(c * d**i for i, c in enumerate(self.coefficients)))

    def dn_eff(self, wavelength_um: float) -> float:
        d = wavelength_um - self.reference_wavelength_um
        return float(sum(i * c * d ** (i - 1) for i, c in enumerate(self.coefficients) if i > 0))

    def group_index(self, wavelength_um: float) -> float:
        return self.n_eff(wavelength_um) - wavelength_um * self.dn_eff(wavelength_um)

    def group_velocity(self, wavelength_um: float) -> float:
        """Group velocity in m/s from the standard group-index relation."""
        return SPEED_OF_LIGHT / self.group_index(wavelength_um)

    def to_dict(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "reference_wavelength_um": self.reference_wavelength_um,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveguideDispersion":
        return cls(tuple(d["coefficients"]), float(d["reference_wavelength_um"]))


@dataclass(frozen=True)
class RingGeometry:
    """Ring circumference (m) and amplitude round-trip self-coupling."""

    circumference: float = 202.5625e-6
    self_coupling: float = 0.984923

    def coupling_rate(self, group_velocity: float) -> float:
        """Critical-coupling rate gamma = sqrt(2 (1-sigma) v^2 / L)."""
        if not 0.0 < self.self_coupling < 1.0:
            raise ModelError("self_coupling must be in (0, 1)")
        return float(np.sqrt(2.0 * (1.0 - self.self_coupling)
                             * group_velocity**2 / self.circumference))

    def to_dict(self) -> dict:
        return {"circumference": self.circumference, "self_coupling": self.self_coupling}

    @classmethod
    def from_dict(cls, d: dict) -> "RingGeometry":
        return cls(float(d["circumference"]), float(d["self_coupling"]))


@dataclass(frozen=True)
class ResonanceDefects:
    """Backscatter parameters of one resonance.

    g: forward/backward cavity coupling (rad/s).  delta_fb, delta_bf:
    channel back-couplings as dimensionless fractions of the resonance's
    coupling rate.  c: bus channel back-reflection (dimensionless).
    All complex; phases free.
    """

    g: complex = 0j
    delta_fb: complex = 0j
    delta_bf: complex = 0j
    c: complex = 0j

    def to_dict(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag]
                for k in ("g", "delta_fb", "delta_bf", "c")}

    @classmethod
    def from_dict(cls, d: dict) -> "ResonanceDefects":
        return cls(**{k: complex(v[0], v[1]) for k, v in d.items()})


@dataclass(frozen=True)
class RingDefectParams:
    """Defect parameters for the pump, signal and idler resonances."""

    pump: ResonanceDefects = field(default_factory=ResonanceDefects)
    signal: ResonanceDefects = field(default_factory=ResonanceDefects)
    idler: ResonanceDefects = field(default_factory=ResonanceDefects)

    def to_dict(self) -> dict:
        return {r: getattr(self, r).to_dict() for r in ("pump", "signal", "idler")}

    @classmethod
    def from_dict(cls, d: dict) -> "RingDefectParams":
        return cls(**{r: ResonanceDefects.from_dict(v) for r, v in d.items()})


def build_resonance_model(
    dispersion: WaveguideDispersion,
    geometry: RingGeometry,
    center_wavelength_um: float,
    defects: ResonanceDefects,
    tag: str = "p",
) -> CoupledCavityModel:
    """One ring resonance: forward/backward cavity pair with bus and phantom
    channels, perturbed by the given backscatter parameters.

    Channel order is (bus f, bus b, phantom f, phantom b); cavity order is
    (f, b).  The phantom channels mirror the bus coupling (critical
    coupling) and carry no defect coupling.
    """
    lam_m = center_wavelength_um * 1e-6
    omega = 2.0 * np.pi * SPEED_OF_LIGHT / lam_m
    v = dispersion.group_velocity(center_wavelength_um)
    gam = geometry.coupling_rate(v)

    channels = [
        ChannelSpec(omega, v, "forward", "bus", f"{tag}1f"),
        ChannelSpec(omega, v, "backward", "bus", f"{tag}1b"),
        ChannelSpec(omega, v, "forward", "loss", f"{tag}2f"),
        ChannelSpec(omega, v, "backward", "loss", f"{tag}2b"),
    ]
    cavities = [
        CavitySpec(omega, v, f"{tag}f"),
        CavitySpec(omega, v, f"{tag}b"),
    ]
    gamma = gam * np.array(
        [[1.0, defects.delta_fb, 1.0, 0.0],
         [defects.delta_bf, 1.0, 0.0, 1.0]], dtype=complex)
    g = np.array([[0.0, defects.g], [np.conj(defects.g), 0.0]], dtype=complex)
    C = np.zeros((4, 4), dtype=complex)
    C[0, 1] = v * defects.c
    C[1, 0] = v * np.conj(defects.c)
    return CoupledCavityModel(channels, cavities, gamma, g, C)


def _merge_models(a: CoupledCavityModel, b: CoupledCavityModel) -> CoupledCavityModel:
    """Block-diagonal union of two models (no cross couplings)."""
    Ja, Na = a.n_channels, a.n_cavities
    Jb, Nb = b.n_channels, b.n_cavities
    gamma = np.zeros((Na + Nb, Ja + Jb), dtype=complex)
    gamma[:Na, :Ja] = a.gamma
    gamma[Na:, Ja:] = b.gamma
    g = np.zeros((Na + Nb, Na + Nb), dtype=complex)
    g[:Na, :Na] = a.g
    g[Na:, Na:] = b.g
    C = np.zeros((Ja + Jb, Ja + Jb), dtype=complex)
    C[:Ja, :Ja] = a.C
    C[Ja:, Ja:] = b.C
    return CoupledCavityModel(list(a.channels) + list(b.channels),
                              list(a.cavities) + list(b.cavities), gamma, g, C)


@dataclass(frozen=True)
class FwmScenario:
    """Pump system, signal system and the four-wave-mixing wiring.

    conv_pairs maps convolution-table keys to the intracavity pump mode
    labels convolved; sq_wiring lists (signal cavity, idler cavity, key)
    triples filling the squeezing blocks, with exchanged partners implied.
    """

    pump_model: CoupledCavityModel
    signal_model: CoupledCavityModel
    pump_velocity: float
    conv_pairs: dict[str, tuple[str, str]]
    sq_wiring: tuple[tuple[str, str, str], ...]
    detuning: float = 0.0
    pump_input_channel: str = "p1f"
    defects: RingDefectParams | None = None


def build_fwm_scenario(
    defects: RingDefectParams,
    dispersion: WaveguideDispersion | None = None,
    geometry: RingGeometry | None = None,
    itu_channels: dict[str, int] | None = None,
    detuning: float = 0.0,
) -> FwmScenario:
    """Build the full back-scattering FWM scenario from defect parameters.

    The pump system has 2 cavities and 4 channels; the signal system joins
    the signal and idler resonances (4 cavities, 8 channels).  The forward
    pump pair drives (sf, if) and the backward pair drives (sb, ib).
    """
    dispersion = dispersion or WaveguideDispersion()
    geometry = geometry or RingGeometry()
    chans = itu_channels or DEFAULT_ITU_CHANNELS

    lam_p = itu_wavelength_um(chans["pump"])
    pump_model = build_resonance_model(dispersion, geometry, lam_p, defects.pump, tag="p")
    signal = build_resonance_model(dispersion, geometry, itu_wavelength_um(chans["signal"]),
                                   defects.signal, tag="s")
    idler = build_resonance_model(dispersion, geometry, itu_wavelength_um(chans["idler"]),
                                  defects.idler, tag="i")
    signal_model = _merge_models(signal, idler)
    return FwmScenario(
        pump_model=pump_model,
        signal_model=signal_model,
        pump_velocity=dispersion.group_velocity(lam_p),
        conv_pairs={"ff": ("pf", "pf"), "bb": ("pb", "pb")},
        sq_wiring=(("sf", "if", "ff"), ("sb", "ib", "bb")),
        detuning=detuning,
        defects=defects,
    )
