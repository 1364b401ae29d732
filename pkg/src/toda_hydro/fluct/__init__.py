"""Limiting Gaussian fluctuation laws."""

from .covariance import (
    current_limit_cov,
    overlap_values,
    paired_cov,
    q0_variance,
    realize_profile,
    wn_cov,
)
from .field import FieldSamplingError, field_covariance_matrix, lc_field_cov, sample_field
from .indicators import CovarianceQuery, IndicatorProfile
from .testfuncs import CubicBump, PlateauBump, TruncatedGaussian, from_descriptor
from .twopoint import (
    PointwiseDensity,
    export_scaling_table,
    twopoint_limit,
    twopoint_pointwise,
)

__all__ = [
    "CovarianceQuery",
    "CubicBump",
    "FieldSamplingError",
    "IndicatorProfile",
    "PlateauBump",
    "PointwiseDensity",
    "TruncatedGaussian",
    "current_limit_cov",
    "export_scaling_table",
    "field_covariance_matrix",
    "from_descriptor",
    "lc_field_cov",
    "overlap_values",
    "paired_cov",
    "q0_variance",
    "realize_profile",
    "sample_field",
    "twopoint_limit",
    "twopoint_pointwise",
    "wn_cov",
]
