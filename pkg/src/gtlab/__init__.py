"""Numerical laboratory for Gutzwiller-Toeplitz kernels on complex projective space.

The models are ``CP^d`` with the hyperplane bundle, quantized by degree-``k``
polynomials on the unit sphere ``S^{2d+1}``, and a torus Hamiltonian
``f = sum_j a_j |z_j|^2``.  Every object (Szego kernel, spectrum, periods,
fixed loci) has a closed form, so the semiclassical predictions can be
checked against exact values.
"""

from .errors import (
    AccuracyNotReached,
    ConfigError,
    CriticalEnergyError,
    FixedPointAmbiguity,
    FixedPointError,
    GtlabError,
    NotAPeriodError,
    NotOnLocus,
)
from .geometry import ModelConfig
from .window import Window

__all__ = [
    "AccuracyNotReached",
    "ConfigError",
    "CriticalEnergyError",
    "FixedPointAmbiguity",
    "FixedPointError",
    "GtlabError",
    "ModelConfig",
    "NotAPeriodError",
    "NotOnLocus",
    "Window",
]

__version__ = "0.1.0"
