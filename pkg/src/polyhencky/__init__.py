"""Polyconvex extensions of logarithmic-strain energies and numerical convexity checks."""
from .energies import (
    EnergyModel,
    ExpHenckyParameters,
    LameParameters,
    SpectralSumModel,
    euclid_extension_energy,
    euclid_extension_model,
    exp_hencky_energy,
    exp_hencky_model,
    generalized_valanis_landel_extension,
    geodesic_extension_energy,
    geodesic_extension_model,
    hencky_energy,
    hencky_extension_energy,
    hencky_extension_model,
    hencky_model,
    isotropic_gradient,
    select_epsilon,
    valanis_landel_extension,
)
from .errors import ConstructionError, DimensionError, DomainError, ParameterError
from .lab import ScanConfig, ScanReport
from .models import MaterialParameters, build_model
from .profiles import ScalarProfile, phi_alpha, phi_gamma, psi_vol
from .tensor import check_gl_plus, singular_values, svd

__version__ = "0.1.0"
