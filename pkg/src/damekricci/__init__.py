"""Radial spherical analysis and dispersive equations on Damek-Ricci spaces."""

from .cfunction import c_function, plancherel_density
from .dispersive import (
    Phase,
    TimeChoice,
    WaltherConstants,
    comparable_oscillation,
    concavity_check,
    linearized,
    maximal,
    propagate,
    propagate_euclid,
    walther_constants,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DamekRicciError,
    DomainError,
    NumericalError,
    PoleError,
    PreconditionError,
    ResolutionError,
)
from .geometry import H3, SpaceParams, density, density_log_derivative
from .specfun import bessel_j, bessel_j_asymptotic, log_gamma_complex, script_j
from .spectral import (
    RadialGrid,
    RadialProfile,
    SobolevKind,
    SpectralGrid,
    Spectrum,
    calibrate,
    euclid_radial_ft,
    euclid_radial_ift,
    isft,
    schwartz_multiplier,
    sft,
    sobolev_norm,
)
from .spherical import SphericalEvaluator, phi, phi_far_main, phi_near_main

__version__ = "0.1.0"
