"""String-addressable catalog of the built-in models."""

from __future__ import annotations

from ..errors import ArgumentError
from .continuous import Gamma, Lindley, NormalLocationScale, NormalMean
from .discrete import Binomial, NonparametricQuantile, Poisson
from .marginal import (BivariateNormal, Correlation, GammaMean, GammaMeanShape, NormalMeanT,
                       RandomEffects, RandomEffectsModel)
from .probit import Probit

_FACTORIES = {
    "binomial": Binomial,
    "poisson": Poisson,
    "lindley": Lindley,
    "gamma2": Gamma,
    "probit": Probit,
    "norm-mean": NormalMean,
    "norm": NormalLocationScale,
    "np-quantile": NonparametricQuantile,
    "norm-mean-t": NormalMeanT,
    "bvn": BivariateNormal,
    "corr": Correlation,
    "gamma-ms": GammaMeanShape,
    "gamma-mean": GammaMean,
    "ranef-full": RandomEffectsModel,
    "ranef": RandomEffects,
}


def model_names() -> list[str]:
    return sorted(_FACTORIES)


def get_model(name: str, **options):
    """Instantiate a catalog model by identifier, passing constructor options."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ArgumentError(f"unknown model {name!r}; choose from {', '.join(model_names())}") from None
    try:
        return factory(**options)
    except TypeError as exc:
        raise ArgumentError(f"bad options for model {name!r}: {exc}") from None


def builtin_catalog() -> list:
    """One default instance of every built-in model."""
    return [_FACTORIES[name]() for name in model_names()]
