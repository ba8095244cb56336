"""Count-data models: binomial, Poisson, and the nonparametric quantile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ..errors import ArgumentError, DomainError
from .base import Dataset, ModelSpec, ParamSpace

# mass left out when enumerating an unbounded support
TRUNCATION = 1e-12


def _require_counts(values, name="observations"):
    values = np.asarray(values, dtype=float)
    if np.any(values < 0) or np.any(values != np.round(values)):
        raise DomainError(f"{name} must be non-negative integers")
    return values


def binomial_logt(y, trials, theta):
    """log relative likelihood of ``y`` successes out of ``trials`` at ``theta``."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        at_theta = special.xlogy(y, theta) + special.xlog1py(trials - y, -theta)
        phat = y / trials
        at_max = special.xlogy(y, phat) + special.xlog1py(trials - y, -phat)
    return np.minimum(at_theta - at_max, 0.0)


class Binomial(ModelSpec):
    """A single binomial count with a known number of trials.

    The dataset holds one row ``[y]`` and the trial count in ``known``.
    For :meth:`sample` the size argument is the number of trials.
    """

    name = "binomial"
    space = ParamSpace((0.0,), (1.0,), ("theta",))

    @staticmethod
    def dataset(y, trials) -> Dataset:
        return Dataset([[float(y)]], known=[float(trials)])

    def check_data(self, data):
        if data.n != 1 or data.known is None:
            raise ArgumentError("binomial data is a single count with the trial count in `known`")
        y = _require_counts(data.obs[0, 0])
        t = _require_counts(data.known[0], "trials")
        if y > t:
            raise DomainError("count exceeds the number of trials")
        return data

    def _trials(self, data):
        return float(data.known[0])

    def pointwise(self, data, theta):
        y, t = data.obs[:, 0], data.known
        log_choose = special.gammaln(t + 1) - special.gammaln(y + 1) - special.gammaln(t - y + 1)
        return log_choose + special.xlogy(y, theta[0]) + special.xlog1py(t - y, -theta[0])

    def sample(self, theta, n, rng, like=None):
        theta = self.space.require(theta)
        trials = int(self._trials(like)) if like is not None else int(n)
        return self.dataset(rng.binomial(trials, theta[0]), trials)

    def fast_mle(self, data):
        self.check_data(data)
        return np.array([data.obs[0, 0] / self._trials(data)])

    def summarize(self, data):
        return np.array([data.obs[0, 0]])

    def draw(self, theta, like, size, rng):
        return rng.binomial(int(self._trials(like)), float(theta[0]), size).astype(float)

    def batch_logt(self, batch, theta, like):
        return binomial_logt(batch, self._trials(like), float(np.asarray(theta).reshape(-1)[0]))

    def batch_estimate(self, batch, like):
        return (np.asarray(batch, dtype=float) / self._trials(like))[:, None]

    def enumerate(self, theta, like):
        t = int(self._trials(like))
        ys = np.arange(t + 1, dtype=float)
        return ys, stats.binom.pmf(ys, t, float(np.asarray(theta).reshape(-1)[0]))


class Poisson(ModelSpec):
    """iid Poisson counts; the engine works with the total count."""

    name = "poisson"
    space = ParamSpace((0.0,), (np.inf,), ("theta",))

    def check_data(self, data):
        _require_counts(data.obs[:, 0])
        return data

    def pointwise(self, data, theta):
        y = data.obs[:, 0]
        return special.xlogy(y, theta[0]) - theta[0] - special.gammaln(y + 1)

    def sample(self, theta, n, rng, like=None):
        theta = self.space.require(theta)
        n = like.n if like is not None else int(n)
        return Dataset(rng.poisson(theta[0], n).astype(float)[:, None])

    def fast_mle(self, data):
        return np.array([float(np.mean(data.obs[:, 0]))])

    def initial(self, data):
        return np.array([max(float(np.mean(data.obs[:, 0])), 0.5)])

    def summarize(self, data):
        return np.array([np.sum(data.obs[:, 0])])

    def draw(self, theta, like, size, rng):
        return rng.poisson(like.n * float(theta[0]), size).astype(float)

    def batch_logt(self, batch, theta, like):
        s = np.asarray(batch, dtype=float)
        n = like.n
        th = float(np.asarray(theta).reshape(-1)[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            at_theta = special.xlogy(s, th) - n * th
            at_max = special.xlogy(s, s / n) - s
        return np.minimum(at_theta - at_max, 0.0)

    def batch_estimate(self, batch, like):
        return (np.asarray(batch, dtype=float) / like.n)[:, None]

    def enumerate(self, theta, like):
        rate = like.n * float(np.asarray(theta).reshape(-1)[0])
        top = int(stats.poisson.ppf(1.0 - TRUNCATION, rate)) if rate > 0 else 0
        s = np.arange(top + 1, dtype=float)
        return s, stats.poisson.pmf(s, rate)


@dataclass(frozen=True)
class QuantileCounts:
    """Simulated batch for :class:`NonparametricQuantile`: the counts r directly."""

    r: np.ndarray

    def __len__(self):
        return len(self.r)


def quantile_logt(r, n, p):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (special.xlogy(r, n * p) - special.xlogy(r, r)
               + special.xlogy(n - r, n * (1 - p)) - special.xlogy(n - r, n - r))
    return np.minimum(val, 0.0)


class NonparametricQuantile(ModelSpec):
    """Empirical likelihood ratio for the ``100 p``-th quantile.

    The sample quantile is the order statistic ``Y_(ceil(n p))``.  The count
    ``r`` follows the three-way split: ``#{Y <= psi}`` below the sample
    quantile, ``n p`` at it, and ``#{Y < psi}`` above it.  Ties between
    ``psi`` and an observation therefore fall on whichever side the split
    dictates; nothing else is done about them.

    Simulation draws ``r ~ Binomial(n, p)`` directly, which is the law of
    the count for every continuous distribution with quantile ``psi``.  The
    dataset-level sampler uses a shifted standard normal.
    """

    name = "np-quantile"
    space = ParamSpace((-np.inf,), (np.inf,), ("psi",))

    def __init__(self, p: float = 0.5):
        if not 0 < p < 1:
            raise ArgumentError("quantile level p must lie in (0, 1)")
        self.p = float(p)

    def _quantile(self, y):
        ys = np.sort(np.asarray(y, dtype=float), axis=-1)
        n = ys.shape[-1]
        k = int(np.ceil(n * self.p))
        return ys[..., max(k, 1) - 1]

    def _counts(self, y, psi):
        """r for every row of ``y`` (shape ``(size, n)``) at ``psi``."""
        y = np.atleast_2d(y)
        n = y.shape[1]
        qhat = self._quantile(y)
        below = np.sum(y <= psi, axis=1).astype(float)
        above = np.sum(y < psi, axis=1).astype(float)
        return np.where(psi < qhat, below, np.where(psi > qhat, above, n * self.p))

    def loglik(self, data, theta):
        psi = float(self.space.check(theta)[0])
        r = self._counts(data.obs[:, 0][None, :], psi)
        return float(quantile_logt(r, data.n, self.p)[0])

    def sample(self, theta, n, rng, like=None):
        theta = self.space.require(theta)
        n = like.n if like is not None else int(n)
        return Dataset(theta[0] + rng.standard_normal(n) - stats.norm.ppf(self.p))

    def fast_mle(self, data):
        return np.array([float(self._quantile(data.obs[:, 0]))])

    def summarize(self, data):
        return data.obs[:, 0][None, :]

    def draw(self, theta, like, size, rng):
        return QuantileCounts(rng.binomial(like.n, self.p, size).astype(float))

    def batch_logt(self, batch, theta, like):
        psi = float(np.asarray(theta).reshape(-1)[0])
        r = batch.r if isinstance(batch, QuantileCounts) else self._counts(batch, psi)
        return quantile_logt(r, like.n, self.p)

    def batch_estimate(self, batch, like):
        if isinstance(batch, QuantileCounts):
            raise DomainError("quantile estimates need full datasets, not simulated counts")
        return self._quantile(batch)[:, None]

    def enumerate(self, theta, like):
        r = np.arange(like.n + 1, dtype=float)
        return QuantileCounts(r), stats.binom.pmf(r, like.n, self.p)
