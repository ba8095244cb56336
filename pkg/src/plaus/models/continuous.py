"""Continuous single-sample models: Lindley, gamma, and Gaussian."""

from __future__ import annotations

import numpy as np
from scipy import optimize, special, stats

from ..errors import ArgumentError, DomainError
from .base import Dataset, ModelSpec, ParamSpace


def gamma_shape(c, tol=1e-13, maxiter=60):
    """Solve ``log k - digamma(k) = c`` for ``k > 0`` elementwise.

    This is the shape equation of gamma maximum likelihood with
    ``c = log(mean) - mean(log y)``.  Starts from Minka's approximation
    and runs safeguarded Newton steps.
    """
    c = np.maximum(np.asarray(c, dtype=float), 1e-14)
    k = (3.0 - c + np.sqrt((c - 3.0) ** 2 + 24.0 * c)) / (12.0 * c)
    for _ in range(maxiter):
        f = np.log(k) - special.digamma(k) - c
        fp = 1.0 / k - special.polygamma(1, k)
        step = f / fp
        new = k - step
        new = np.where(new > 0, new, 0.5 * k)
        done = np.abs(new - k) <= tol * new
        k = new
        if np.all(done):
            break
    return k


def _positive(data, name, strict=True):
    y = data.obs[:, 0]
    if np.any(y <= 0 if strict else y < 0):
        raise DomainError(f"{name} observations must be {'strictly positive' if strict else 'nonnegative'}")
    return data


class Lindley(ModelSpec):
    """Lindley density ``theta^2 (theta+1)^-1 (y+1) exp(-theta y)``.

    Batches hold sample means only; the mean is sufficient.
    """

    name = "lindley"
    space = ParamSpace((0.0,), (np.inf,), ("theta",))

    def check_data(self, data):
        return _positive(data, "Lindley", strict=False)

    def pointwise(self, data, theta):
        t, y = theta[0], data.obs[:, 0]
        out = 2 * np.log(t) - np.log1p(t) + np.log1p(y) - t * y
        return np.where(y >= 0, out, -np.inf)

    def sample(self, theta, n, rng, like=None):
        t = self.space.require(theta)[0]
        if t <= 0:
            raise DomainError("Lindley parameter must be positive")
        n = like.n if like is not None else int(n)
        # exponential(t) w.p. t/(t+1), otherwise gamma(2, t)
        shape = np.where(rng.random(n) < t / (t + 1.0), 1.0, 2.0)
        return Dataset(rng.gamma(shape, 1.0 / t))

    @staticmethod
    def mle_from_mean(ybar):
        ybar = np.asarray(ybar, dtype=float)
        return (1.0 - ybar + np.sqrt(ybar ** 2 + 6.0 * ybar + 1.0)) / (2.0 * ybar)

    def fast_mle(self, data):
        ybar = float(np.mean(data.obs[:, 0]))
        if not ybar > 0:
            raise DomainError("Lindley MLE needs a positive sample mean")
        return np.array([float(self.mle_from_mean(ybar))])

    def initial(self, data):
        return np.array([1.0 / max(float(np.mean(data.obs[:, 0])), 1e-3)])

    def summarize(self, data):
        return np.array([np.mean(data.obs[:, 0])])

    def draw(self, theta, like, size, rng):
        t = float(np.asarray(theta).reshape(-1)[0])
        n = like.n
        n_gamma2 = rng.binomial(n, 1.0 / (t + 1.0), size)
        return rng.gamma(n + n_gamma2, 1.0 / t) / n

    def batch_logt(self, batch, theta, like):
        t = float(np.asarray(theta).reshape(-1)[0])
        ybar = np.asarray(batch, dtype=float)
        if t <= 0:
            return np.full(ybar.shape, -np.inf)
        that = self.mle_from_mean(ybar)
        n = like.n
        val = n * (2 * np.log(t / that) + np.log((that + 1) / (t + 1)) + ybar * (that - t))
        return np.minimum(val, 0.0)

    def batch_estimate(self, batch, like):
        return self.mle_from_mean(batch)[:, None]

    def statistic_cdf(self, logt, theta, like):
        """Exact law of log T through the sample sum, a binomial mixture of gammas.

        log T is unimodal in the sample mean with its peak at the Lindley
        mean, so ``{log T <= logt}`` is a lower and an upper tail of it.
        """
        t = float(np.asarray(theta).reshape(-1)[0])
        if logt >= 0:
            return 1.0
        n = like.n
        k = np.arange(n + 1)
        weights = stats.binom.pmf(k, n, 1.0 / (t + 1.0))
        peak = (t + 2.0) / (t * (t + 1.0))

        def gap(m):
            return float(self.batch_logt(np.array([m]), [t], like)[0]) - logt

        lo = peak
        while gap(lo) > 0:
            lo *= 0.5
        hi = peak
        while gap(hi) > 0:
            hi *= 2.0
        a = optimize.brentq(gap, lo, peak, xtol=1e-14 * peak, rtol=1e-14) if lo < peak else peak
        b = optimize.brentq(gap, peak, hi, xtol=1e-14 * peak, rtol=1e-14) if hi > peak else peak
        below = stats.gamma.cdf(n * a, n + k, scale=1.0 / t)
        above = stats.gamma.sf(n * b, n + k, scale=1.0 / t)
        return float(min(np.sum(weights * (below + above)), 1.0))


def _mean_logmean(y):
    """Rows of ``[mean(y), mean(log y)]`` for ``y`` of shape ``(size, n)``."""
    with np.errstate(divide="ignore"):
        return np.stack([y.mean(axis=1), np.log(y).mean(axis=1)], axis=1)


class Gamma(ModelSpec):
    """Gamma with shape ``theta1`` and scale ``theta2``.

    Batches hold ``[mean(y), mean(log y)]``.
    """

    name = "gamma2"
    space = ParamSpace((0.0, 0.0), (np.inf, np.inf), ("shape", "scale"))

    def check_data(self, data):
        return _positive(data, "gamma")

    def pointwise(self, data, theta):
        k, s = theta
        if k <= 0 or s <= 0:
            return np.full(data.n, -np.inf)
        return stats.gamma.logpdf(data.obs[:, 0], k, scale=s)

    def sample(self, theta, n, rng, like=None):
        k, s = self.space.require(theta)
        n = like.n if like is not None else int(n)
        return Dataset(rng.gamma(k, s, n))

    @staticmethod
    def _ll_per_n(stat, k, s):
        ybar, mlog = stat[..., 0], stat[..., 1]
        return (k - 1) * mlog - ybar / s - k * np.log(s) - special.gammaln(k)

    def fast_mle(self, data):
        self.check_data(data)
        st = _mean_logmean(data.obs[:, 0][None, :])[0]
        k = float(gamma_shape(np.log(st[0]) - st[1]))
        return np.array([k, st[0] / k])

    def initial(self, data):
        y = data.obs[:, 0]
        m, v = float(np.mean(y)), float(np.var(y)) or 1.0
        return np.array([m * m / v, v / m])

    def summarize(self, data):
        return _mean_logmean(data.obs[:, 0][None, :])

    def draw(self, theta, like, size, rng):
        k, s = np.asarray(theta, dtype=float)
        return _mean_logmean(rng.gamma(k, s, (size, like.n)))

    def batch_logt(self, batch, theta, like):
        k, s = np.asarray(theta, dtype=float)
        if k <= 0 or s <= 0:
            return np.full(len(batch), -np.inf)
        khat = gamma_shape(np.log(batch[:, 0]) - batch[:, 1])
        shat = batch[:, 0] / khat
        val = like.n * (self._ll_per_n(batch, k, s) - self._ll_per_n(batch, khat, shat))
        return np.minimum(val, 0.0)

    def batch_estimate(self, batch, like):
        khat = gamma_shape(np.log(batch[:, 0]) - batch[:, 1])
        return np.stack([khat, batch[:, 0] / khat], axis=1)


class NormalMean(ModelSpec):
    """Gaussian mean with known standard deviation ``sigma``.

    ``-2 log T = n (ybar - mu)^2 / sigma^2`` is exactly chi-square(1), so a
    closed-form distribution function is available.
    """

    name = "norm-mean"
    space = ParamSpace((-np.inf,), (np.inf,), ("mu",))

    def __init__(self, sigma: float = 1.0):
        if not sigma > 0:
            raise ArgumentError("sigma must be positive")
        self.sigma = float(sigma)

    def pointwise(self, data, theta):
        return stats.norm.logpdf(data.obs[:, 0], theta[0], self.sigma)

    def sample(self, theta, n, rng, like=None):
        mu = self.space.require(theta)[0]
        n = like.n if like is not None else int(n)
        return Dataset(mu + self.sigma * rng.standard_normal(n))

    def fast_mle(self, data):
        return np.array([float(np.mean(data.obs[:, 0]))])

    def initial(self, data):
        return np.array([float(np.median(data.obs[:, 0]))])

    def summarize(self, data):
        return np.array([np.mean(data.obs[:, 0])])

    def draw(self, theta, like, size, rng):
        mu = float(np.asarray(theta).reshape(-1)[0])
        return mu + self.sigma / np.sqrt(like.n) * rng.standard_normal(size)

    def batch_logt(self, batch, theta, like):
        mu = float(np.asarray(theta).reshape(-1)[0])
        return -0.5 * like.n * (np.asarray(batch) - mu) ** 2 / self.sigma ** 2

    def batch_estimate(self, batch, like):
        return np.asarray(batch, dtype=float)[:, None]

    def pivot_cdf(self, logt, like):
        return float(stats.chi2.sf(-2.0 * logt, 1))


class NormalLocationScale(ModelSpec):
    """Gaussian with unknown mean ``mu`` and variance ``sigma2``.

    Batches hold ``[ybar, S2]`` with ``S2`` the residual sum of squares.
    """

    name = "norm"
    space = ParamSpace((-np.inf, 0.0), (np.inf, np.inf), ("mu", "sigma2"))

    def check_data(self, data):
        if data.n < 2:
            raise DomainError("need at least two observations for an unknown variance")
        return data

    def pointwise(self, data, theta):
        mu, v = theta
        if v <= 0:
            return np.full(data.n, -np.inf)
        return stats.norm.logpdf(data.obs[:, 0], mu, np.sqrt(v))

    def sample(self, theta, n, rng, like=None):
        mu, v = self.space.require(theta)
        n = like.n if like is not None else int(n)
        return Dataset(mu + np.sqrt(v) * rng.standard_normal(n))

    def fast_mle(self, data):
        y = data.obs[:, 0]
        return np.array([float(np.mean(y)), float(np.mean((y - y.mean()) ** 2))])

    def initial(self, data):
        y = data.obs[:, 0]
        return np.array([float(np.median(y)), float(np.var(y)) or 1.0])

    def summarize(self, data):
        y = data.obs[:, 0]
        return np.array([[y.mean(), np.sum((y - y.mean()) ** 2)]])

    def draw(self, theta, like, size, rng):
        mu, v = np.asarray(theta, dtype=float)
        n = like.n
        ybar = mu + np.sqrt(v / n) * rng.standard_normal(size)
        rss = v * rng.chisquare(n - 1, size)
        return np.stack([ybar, rss], axis=1)

    def batch_logt(self, batch, theta, like):
        mu, v = np.asarray(theta, dtype=float)
        n = like.n
        if v <= 0:
            return np.full(len(batch), -np.inf)
        ybar, rss = batch[:, 0], batch[:, 1]
        vhat = rss / n
        with np.errstate(divide="ignore"):
            val = 0.5 * n * np.log(vhat / v) - (rss + n * (ybar - mu) ** 2) / (2 * v) + 0.5 * n
        return np.minimum(val, 0.0)

    def batch_estimate(self, batch, like):
        return np.stack([batch[:, 0], batch[:, 1] / like.n], axis=1)
