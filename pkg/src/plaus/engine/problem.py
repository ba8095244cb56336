"""Binding of a model to observed data: the pieces every estimator needs."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..likelihood import FitResult, mle, wald_se
from ..models.base import Dataset, MarginalModelSpec, ModelSpec, ParamSpace


class Problem:
    """A model together with its observed data.

    ``value`` arguments are full parameter vectors for ordinary models and
    the scalar interest parameter for marginal models.  The observed
    statistic goes through the same batched code path as the simulated ones
    so that ties between them are exact.
    """

    def __init__(self, model, data: Dataset, fit: FitResult | None = None):
        self.model = model
        self.data = model.check_data(data)
        self.marginal = isinstance(model, MarginalModelSpec)
        self._fit = fit
        self._obs_batch = model.summarize(data)

    @cached_property
    def fit(self) -> FitResult:
        return self._fit if self._fit is not None else mle(self.model, self.data)

    @property
    def space(self) -> ParamSpace:
        return self.model.space

    @property
    def dims(self) -> int:
        return self.space.dims

    @cached_property
    def estimate(self) -> np.ndarray:
        """MLE of the target: full theta, or the interest component."""
        if self.marginal:
            return np.array([self.fit.argmax[self.model.interest]])
        return self.fit.argmax

    @cached_property
    def lambda0(self) -> np.ndarray | None:
        return self.model.nuisance_for_simulation(self.data, self.fit.argmax) if self.marginal else None

    def value(self, value) -> np.ndarray:
        return self.space.check(value)

    def admissible(self, value) -> bool:
        return self.space.contains(value)

    def sim_parameter(self, value) -> np.ndarray:
        """Full parameter used to simulate at ``value``."""
        return self.model.join(value, self.lambda0) if self.marginal else self.value(value)

    def _logt(self, batch, value):
        v = self.value(value)
        return np.asarray(self.model.batch_logt(batch, v[0] if self.marginal else v, self.data), dtype=float)

    def observed(self, value) -> float:
        return float(self._logt(self._obs_batch, value)[0])

    def simulated(self, value, size: int, rng: np.random.Generator) -> np.ndarray:
        v = self.value(value)
        if self.marginal:
            batch = self.model.draw(v[0], self.lambda0, self.data, size, rng)
        else:
            batch = self.model.draw(v, self.data, size, rng)
        return self._logt(batch, v)

    def enumerate(self, value):
        """``(logt, pmf)`` over the whole support, or None."""
        v = self.value(value)
        if self.marginal:
            out = self.model.enumerate(v[0], self.lambda0, self.data)
        else:
            out = self.model.enumerate(v, self.data)
        if out is None:
            return None
        batch, pmf = out
        return self._logt(batch, v), np.asarray(pmf, dtype=float)

    def statistic_cdf(self, value, logt: float) -> float | None:
        """Closed-form law of the statistic at ``value``, or None."""
        v = self.value(value)
        return self.model.statistic_cdf(logt, v[0] if self.marginal else v, self.data)

    @property
    def has_exact(self) -> bool:
        return self.enumerate(self.estimate) is not None

    @property
    def has_closed(self) -> bool:
        return self.statistic_cdf(self.estimate, 0.0) is not None

    def scale(self) -> float:
        """Wald standard error of the (scalar) target, or a rough fallback."""
        idx = self.model.interest if self.marginal else 0
        try:
            se = wald_se(self.model, self.data, self.fit.argmax, idx)
        except (ArithmeticError, ValueError):
            se = np.nan
        if not (np.isfinite(se) and se > 0):
            se = 0.1 * (1.0 + abs(float(self.estimate[0])))
        return float(se)


def bind(model, data: Dataset, fit: FitResult | None = None) -> Problem:
    """Bind ``model`` (ordinary or marginal) to observed ``data``."""
    if isinstance(model, Problem):
        return model
    if not isinstance(model, (ModelSpec, MarginalModelSpec)):
        raise TypeError(f"expected a model, got {type(model).__name__}")
    return Problem(model, data, fit)
