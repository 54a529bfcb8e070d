"""Gaussian nonlinear optics in coupled cavity systems.

Frequency-domain simulator for photon-pair generation in waveguide-coupled
cavity networks, specialised to back-scattering in micro-ring resonators:
linear transmission spectra, joint spectral/temporal amplitudes, heralded
photon purities, fabrication-defect ensembles and stimulated-emission
tomography inference errors.
"""

__version__ = "0.1.0"

from gaussring.model import (
    CavitySpec,
    ChannelSpec,
    CoupledCavityModel,
    DerivedLinear,
    ModelError,
    derive_linear,
    validate_model,
)
from gaussring.lingrid import KGrid, SpectralField, solve_linear_tuned

__all__ = [
    "CavitySpec",
    "ChannelSpec",
    "CoupledCavityModel",
    "DerivedLinear",
    "KGrid",
    "ModelError",
    "SpectralField",
    "derive_linear",
    "solve_linear_tuned",
    "validate_model",
]
