"""Equilibrium kernels: quadrature grid, spectral profiles, dressing."""

from .dressing import (
    ConditioningError,
    DressedProfiles,
    MonotonicityError,
    VelocityMap,
    bilinear_C,
    dress,
    dressed_profiles,
    dressing_condition,
    effective_velocity,
    operator_F,
    sigma2,
)
from .grid import (
    PanelInterpolant,
    QuadratureGrid,
    gauss_panels,
    log_product_weights,
    refine_edges_at,
)
from .handle import KernelSet, export_kernels_csv
from .profiles import EquilibriumProfiles, GridResolutionError, equilibrium_profiles
from .special import digamma, ell, mathfrak_F, trigamma
from .tdressed import T_dressed, TDressedSolution, diffusivity, t_dressed

__all__ = [
    "ConditioningError",
    "DressedProfiles",
    "EquilibriumProfiles",
    "GridResolutionError",
    "KernelSet",
    "MonotonicityError",
    "PanelInterpolant",
    "QuadratureGrid",
    "T_dressed",
    "TDressedSolution",
    "VelocityMap",
    "bilinear_C",
    "diffusivity",
    "digamma",
    "dress",
    "dressed_profiles",
    "dressing_condition",
    "effective_velocity",
    "ell",
    "equilibrium_profiles",
    "export_kernels_csv",
    "gauss_panels",
    "log_product_weights",
    "mathfrak_F",
    "operator_F",
    "refine_edges_at",
    "sigma2",
    "t_dressed",
]
