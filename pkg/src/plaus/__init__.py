"""Exact frequentist inference with plausibility functions built on the relative likelihood."""

__version__ = "0.1.0"

from .engine import (Box, FiniteSet, McConfig, PlausResult, RegionResult, bind, marginal_plaus_mc,
                     pivotality_check, plaus_exact_discrete, plaus_mc, plaus_region, plaus_set, plaus_test,
                     plausibility)
from .errors import ArgumentError, CapabilityError, DomainError, FitError, NumericError, PlausError
from .likelihood import FitResult, mle, profile, relative_likelihood, relative_profile_likelihood
from .models import Dataset, MarginalModelSpec, ModelSpec, ParamSpace, builtin_catalog, get_model

__all__ = [
    "__version__",
    "Box", "FiniteSet", "McConfig", "PlausResult", "RegionResult", "bind", "marginal_plaus_mc",
    "pivotality_check", "plaus_exact_discrete", "plaus_mc", "plaus_region", "plaus_set", "plaus_test",
    "plausibility",
    "ArgumentError", "CapabilityError", "DomainError", "FitError", "NumericError", "PlausError",
    "FitResult", "mle", "profile", "relative_likelihood", "relative_profile_likelihood",
    "Dataset", "MarginalModelSpec", "ModelSpec", "ParamSpace", "builtin_catalog", "get_model",
]
