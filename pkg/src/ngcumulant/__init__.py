"""Unbiased cumulant estimation for non-Gaussian distributions under measurement noise."""

__version__ = "0.1.0"

from .cumulants import (
    CumulantSet,
    Estimate,
    MomentSet,
    PowerSums,
    accumulate,
    cumulants_to_moments,
    convolve,
    estimate_with_error,
    k_stat,
    k_statistics,
    merge,
    moments_to_cumulants,
    sample_cumulants,
    var_k3,
    var_k4,
)
from .errors import DegenerateSampleError, InputError, InsufficientSampleError
from .models import DisplacedMixture, DistModel, FockMixture, Gaussian

__all__ = [
    "CumulantSet",
    "DegenerateSampleError",
    "DisplacedMixture",
    "DistModel",
    "Estimate",
    "FockMixture",
    "Gaussian",
    "InputError",
    "InsufficientSampleError",
    "MomentSet",
    "PowerSums",
    "accumulate",
    "convolve",
    "cumulants_to_moments",
    "estimate_with_error",
    "k_stat",
    "k_statistics",
    "merge",
    "moments_to_cumulants",
    "sample_cumulants",
    "var_k3",
    "var_k4",
]
