"""Statistical models: abstractions and the built-in catalog."""

from .base import Dataset, MarginalModelSpec, ModelSpec, ParamSpace
from .catalog import builtin_catalog, get_model, model_names
from .continuous import Gamma, Lindley, NormalLocationScale, NormalMean, gamma_shape
from .discrete import Binomial, NonparametricQuantile, Poisson, QuantileCounts
from .io import load_data, parse_inline, read_csv, write_csv
from .marginal import (BivariateNormal, Correlation, GammaMean, GammaMeanShape, NormalMeanT,
                       RandomEffects, RandomEffectsModel, ranef_fit)
from .probit import Probit, probit_fit

__all__ = [
    "Dataset", "MarginalModelSpec", "ModelSpec", "ParamSpace",
    "builtin_catalog", "get_model", "model_names",
    "Gamma", "Lindley", "NormalLocationScale", "NormalMean", "gamma_shape",
    "Binomial", "NonparametricQuantile", "Poisson", "QuantileCounts",
    "load_data", "parse_inline", "read_csv", "write_csv",
    "BivariateNormal", "Correlation", "GammaMean", "GammaMeanShape", "NormalMeanT",
    "RandomEffects", "RandomEffectsModel", "ranef_fit",
    "Probit", "probit_fit",
]
