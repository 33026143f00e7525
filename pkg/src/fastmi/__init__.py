"""Tuning-free copula-based mutual information estimation."""

__version__ = "0.1.0"

from .copulas import CopulaSpec, sample_copula, true_mi
from .errors import (AsymmetrySignal, ConfigError, DomainError, FastMIError,
                     GridOverflow, InsufficientData, InvalidInput, NonConvergence,
                     NonFinite, NumericalError, ParseError)
from .estimator import EstimatorConfig, MiEstimate, copula_density_at, estimate_mi
from .independence import TestResult, permutation_test
from .pseudo_obs import empirical_cdf_transform, probit_transform

__all__ = [
    "AsymmetrySignal", "ConfigError", "CopulaSpec", "DomainError", "EstimatorConfig",
    "FastMIError", "GridOverflow", "InsufficientData", "InvalidInput", "MiEstimate",
    "NonConvergence", "NonFinite", "NumericalError", "ParseError", "TestResult",
    "copula_density_at", "empirical_cdf_transform", "estimate_mi", "permutation_test",
    "probit_transform", "sample_copula", "true_mi", "__version__",
]
