"""Demonstration datasets."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .. import streams
from ..models import Dataset, Probit
from ..models.io import read_csv

GAMMA_DEMO = "gamma_n20.csv"


def gamma_demo() -> Dataset:
    """Fixed synthetic gamma sample of size 20 (shape 8, scale 14, one decimal)."""
    with resources.as_file(resources.files("plaus.data") / GAMMA_DEMO) as path:
        return read_csv(path)


def probit_demo(n: int = 120, beta=(0.3, 1.0), seed: int = 0) -> Dataset:
    """Synthetic probit data on twelve equally spaced dose levels in [-2, 2]."""
    model = Probit(covariates=1)
    like = model.template(n, streams.substream(seed, streams.DESIGN))
    return model.sample(np.asarray(beta, float), n, streams.substream(seed, streams.DATA), like)
