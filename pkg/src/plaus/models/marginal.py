"""Models with nuisance parameters and their relative profile likelihoods."""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy import special, stats

from ..errors import ArgumentError, DomainError
from .base import Dataset, MarginalModelSpec, ModelSpec, ParamSpace
from .continuous import NormalLocationScale, _mean_logmean, _positive, gamma_shape


class NormalMeanT(MarginalModelSpec):
    """Gaussian mean with the variance as nuisance.

    ``T = {1 + n (ybar - psi)^2 / S2}^(-n/2)`` is a decreasing function of
    the squared t statistic, so the marginal region is the t-interval.
    """

    name = "norm-mean-t"

    def __init__(self):
        self.base = NormalLocationScale()
        self.interest = 0
        self.lambda0 = None

    def closed_profile(self, data, psi):
        y = data.obs[:, 0]
        return np.array([float(np.mean((y - psi) ** 2))])

    def batch_logt(self, batch, psi, like):
        psi = float(np.asarray(psi).reshape(-1)[0])
        ybar, rss = batch[:, 0], batch[:, 1]
        with np.errstate(divide="ignore"):
            return -0.5 * like.n * np.log1p(like.n * (ybar - psi) ** 2 / rss)

    def pivot_cdf(self, logt, like):
        n = like.n
        # T <= t  <=>  |t_{n-1}| >= sqrt((n-1) (t^(-2/n) - 1))
        tstat = np.sqrt((n - 1) * np.expm1(-2.0 * logt / n))
        return float(2 * stats.t.sf(tstat, n - 1))


class BivariateNormal(ModelSpec):
    """Bivariate Gaussian, ``theta = (rho, mu1, mu2, sigma1, sigma2)``.

    Batches hold ``[xbar, ybar, Sxx/n, Syy/n, Sxy/n]``.
    """

    name = "bvn"
    space = ParamSpace((-1.0, -np.inf, -np.inf, 0.0, 0.0), (1.0, np.inf, np.inf, np.inf, np.inf),
                       ("rho", "mu1", "mu2", "sigma1", "sigma2"))

    def check_data(self, data):
        if data.obs.shape[1] != 2 or data.n < 3:
            raise ArgumentError("correlation data needs two columns and at least three rows")
        return data

    @staticmethod
    def _moments(x, y):
        xb, yb = x.mean(axis=-1), y.mean(axis=-1)
        dx, dy = x - xb[..., None], y - yb[..., None]
        return np.stack([xb, yb, (dx * dx).mean(axis=-1), (dy * dy).mean(axis=-1), (dx * dy).mean(axis=-1)],
                        axis=-1)

    @staticmethod
    def _ll_per_n(st, theta):
        rho, m1, m2, s1, s2 = theta
        xb, yb, a, b, c = (st[..., i] for i in range(5))
        if not (abs(rho) < 1 and s1 > 0 and s2 > 0):
            return np.full(np.shape(xb), -np.inf)
        q = ((a + (xb - m1) ** 2) / s1 ** 2 + (b + (yb - m2) ** 2) / s2 ** 2
             - 2 * rho * (c + (xb - m1) * (yb - m2)) / (s1 * s2))
        return -np.log(2 * np.pi * s1 * s2) - 0.5 * np.log1p(-rho ** 2) - q / (2 * (1 - rho ** 2))

    @staticmethod
    def _mle_from_moments(st):
        r = st[..., 4] / np.sqrt(st[..., 2] * st[..., 3])
        return np.stack([r, st[..., 0], st[..., 1], np.sqrt(st[..., 2]), np.sqrt(st[..., 3])], axis=-1)

    def pointwise(self, data, theta):
        rho, m1, m2, s1, s2 = theta
        if not (abs(rho) < 1 and s1 > 0 and s2 > 0):
            return np.full(data.n, -np.inf)
        cov = [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]]
        return stats.multivariate_normal.logpdf(data.obs, mean=[m1, m2], cov=cov).reshape(-1)

    def sample(self, theta, n, rng, like=None):
        rho, m1, m2, s1, s2 = self.space.require(theta)
        n = like.n if like is not None else int(n)
        z = rng.standard_normal((n, 2))
        x = m1 + s1 * z[:, 0]
        y = m2 + s2 * (rho * z[:, 0] + np.sqrt(1 - rho * rho) * z[:, 1])
        return Dataset(np.column_stack([x, y]))

    def fast_mle(self, data):
        self.check_data(data)
        st = self._moments(data.obs[:, 0], data.obs[:, 1])
        return self._mle_from_moments(st)

    def initial(self, data):
        return self.fast_mle(data)

    def summarize(self, data):
        return self._moments(data.obs[:, 0], data.obs[:, 1])[None, :]

    def draw(self, theta, like, size, rng):
        rho, m1, m2, s1, s2 = np.asarray(theta, dtype=float)
        z = rng.standard_normal((2, size, like.n))
        x = m1 + s1 * z[0]
        y = m2 + s2 * (rho * z[0] + np.sqrt(1 - rho * rho) * z[1])
        return self._moments(x, y)

    def batch_logt(self, batch, theta, like):
        theta = np.asarray(theta, dtype=float)
        at = self._ll_per_n(batch, theta)
        top = self._ll_max_per_n(batch)
        return np.minimum(like.n * (at - top), 0.0)

    @staticmethod
    def _ll_max_per_n(st):
        r2 = st[:, 4] ** 2 / (st[:, 2] * st[:, 3])
        return -np.log(2 * np.pi) - 0.5 * np.log(st[:, 2] * st[:, 3]) - 0.5 * np.log1p(-r2) - 1.0

    def batch_estimate(self, batch, like):
        return self._mle_from_moments(batch)


class Correlation(MarginalModelSpec):
    """Correlation coefficient of a bivariate Gaussian; means and sds are nuisance.

    ``T = {sqrt(1-psi^2) sqrt(1-r^2) / (1 - psi r)}^n`` with ``r`` the sample
    correlation; its law is free of the nuisance parameter.
    """

    name = "corr"

    def __init__(self, lambda0=None):
        self.base = BivariateNormal()
        self.interest = 0
        self.lambda0 = None if lambda0 is None else tuple(float(v) for v in lambda0)

    def closed_profile(self, data, psi):
        st = self.base._moments(data.obs[:, 0], data.obs[:, 1])
        xb, yb, a, b, c = st
        r = c / np.sqrt(a * b)
        k = (1 - psi * r) / (1 - psi * psi)
        return np.array([xb, yb, np.sqrt(a * k), np.sqrt(b * k)])

    @staticmethod
    def logt_from_r(r, psi, n):
        with np.errstate(divide="ignore", invalid="ignore"):
            val = n * (0.5 * np.log1p(-psi * psi) + 0.5 * np.log1p(-r * r) - np.log1p(-psi * r))
        return np.minimum(np.where(np.abs(psi) < 1, val, -np.inf), 0.0)

    def batch_logt(self, batch, psi, like):
        psi = float(np.asarray(psi).reshape(-1)[0])
        r = batch[:, 4] / np.sqrt(batch[:, 2] * batch[:, 3])
        return self.logt_from_r(r, psi, like.n)

    def batch_estimate(self, batch, like):
        return batch[:, 4] / np.sqrt(batch[:, 2] * batch[:, 3])


class GammaMeanShape(ModelSpec):
    """Gamma parameterized by mean ``psi`` and shape ``lam``."""

    name = "gamma-ms"
    space = ParamSpace((0.0, 0.0), (np.inf, np.inf), ("mean", "shape"))

    def check_data(self, data):
        return _positive(data, "gamma")

    def pointwise(self, data, theta):
        psi, lam = theta
        if psi <= 0 or lam <= 0:
            return np.full(data.n, -np.inf)
        return stats.gamma.logpdf(data.obs[:, 0], lam, scale=psi / lam)

    def sample(self, theta, n, rng, like=None):
        psi, lam = self.space.require(theta)
        n = like.n if like is not None else int(n)
        return Dataset(rng.gamma(lam, psi / lam, n))

    @staticmethod
    def _ll_per_n(st, psi, lam):
        ybar, mlog = st[..., 0], st[..., 1]
        return lam * np.log(lam / psi) - special.gammaln(lam) + (lam - 1) * mlog - lam * ybar / psi

    def fast_mle(self, data):
        self.check_data(data)
        st = _mean_logmean(data.obs[:, 0][None, :])[0]
        return np.array([st[0], float(gamma_shape(np.log(st[0]) - st[1]))])

    def initial(self, data):
        y = data.obs[:, 0]
        m, v = float(np.mean(y)), float(np.var(y)) or 1.0
        return np.array([m, m * m / v])

    def summarize(self, data):
        return _mean_logmean(data.obs[:, 0][None, :])

    def draw(self, theta, like, size, rng):
        psi, lam = np.asarray(theta, dtype=float)
        return _mean_logmean(rng.gamma(lam, psi / lam, (size, like.n)))

    def _top(self, batch):
        lam = gamma_shape(np.log(batch[:, 0]) - batch[:, 1])
        return self._ll_per_n(batch, batch[:, 0], lam)

    def batch_logt(self, batch, theta, like):
        psi, lam = np.asarray(theta, dtype=float)
        if psi <= 0 or lam <= 0:
            return np.full(len(batch), -np.inf)
        return np.minimum(like.n * (self._ll_per_n(batch, psi, lam) - self._top(batch)), 0.0)

    def batch_estimate(self, batch, like):
        return np.stack([batch[:, 0], gamma_shape(np.log(batch[:, 0]) - batch[:, 1])], axis=1)


class GammaMean(MarginalModelSpec):
    """Gamma mean with the shape as nuisance; simulation fixes the shape at 1 by default."""

    name = "gamma-mean"

    def __init__(self, lambda0=(1.0,)):
        self.base = GammaMeanShape()
        self.interest = 0
        self.lambda0 = None if lambda0 is None else tuple(float(v) for v in np.atleast_1d(lambda0))

    @staticmethod
    def profile_shape(st, psi):
        # stationarity in the shape: log lam - digamma(lam) = log psi + ybar/psi - 1 - mean log y
        return gamma_shape(np.log(psi) + st[..., 0] / psi - 1.0 - st[..., 1])

    def closed_profile(self, data, psi):
        st = _mean_logmean(data.obs[:, 0][None, :])[0]
        return np.array([float(self.profile_shape(st, psi))])

    def batch_logt(self, batch, psi, like):
        psi = float(np.asarray(psi).reshape(-1)[0])
        if psi <= 0:
            return np.full(len(batch), -np.inf)
        lam = self.profile_shape(batch, psi)
        at = self.base._ll_per_n(batch, psi, lam)
        return np.minimum(like.n * (at - self.base._top(batch)), 0.0)


def _ranef_profile(y, s2, tau):
    """Profile log-likelihood (constants dropped) and the weighted mean, rowwise."""
    w = 1.0 / (s2 + tau[:, None])
    lam = np.sum(w * y, axis=1) / np.sum(w, axis=1)
    r = y - lam[:, None]
    return -0.5 * np.sum(np.log(s2 + tau[:, None]) + w * r * r, axis=1), lam


@njit(cache=True)
def _ranef_terms(y, s2, tau):
    """Profile log-likelihood, its first two derivatives in ``tau``, and the weighted mean."""
    sw = 0.0
    swy = 0.0
    for i in range(y.size):
        w = 1.0 / (s2[i] + tau)
        sw += w
        swy += w * y[i]
    lam = swy / sw
    ll = 0.0
    g = 0.0
    h = 0.0
    sw2r = 0.0
    for i in range(y.size):
        v = s2[i] + tau
        w = 1.0 / v
        r = y[i] - lam
        ll -= 0.5 * (np.log(v) + w * r * r)
        g += 0.5 * (w * w * r * r - w)
        h += 0.5 * w * w - w * w * w * r * r
        sw2r += w * w * r
    h += sw2r * sw2r / sw
    return ll, g, h, lam


@njit(cache=True)
def _ranef_row(y, s2, tol, maxiter, scan):
    l0, g0, h0, lam0 = _ranef_terms(y, s2, 0.0)
    # upper end where the score is negative
    hi = 1.0
    for i in range(y.size):
        hi = max(hi, (y[i] - lam0) ** 2)
    for _ in range(200):
        if _ranef_terms(y, s2, hi)[1] < 0.0:
            break
        hi *= 2.0
    # the profile can be multimodal when some s2 are tiny: scan a log grid first
    tmin = max(np.min(s2) * 1e-4, hi * 1e-14)
    ratio = (hi / tmin) ** (1.0 / (scan - 1))
    best_l, best_k = l0, -1
    t = tmin
    for k in range(scan):
        lk = _ranef_terms(y, s2, t)[0]
        if lk > best_l:
            best_l, best_k = lk, k
        t *= ratio
    if best_k < 0 and g0 <= 0.0:
        return 0.0, lam0, l0
    center = tmin * ratio ** max(best_k, 0)
    lo = 0.0 if best_k <= 0 else center / ratio
    up = center * ratio if best_k < scan - 1 else hi
    if _ranef_terms(y, s2, center)[1] > 0.0:
        lo = center
    else:
        up = center
    tau = 0.5 * (lo + up)
    for _ in range(maxiter):
        ll, g, h, lam = _ranef_terms(y, s2, tau)
        if g > 0.0:
            lo = tau
        else:
            up = tau
        new = tau - g / h if h < 0.0 else -1.0
        if not (lo < new < up):
            new = 0.5 * (lo + up)
        done = abs(new - tau) <= tol * (1.0 + tau) or up - lo <= tol * (1.0 + tau)
        tau = new
        if done:
            break
    ll, g, h, lam = _ranef_terms(y, s2, tau)
    if l0 >= ll:
        return 0.0, lam0, l0
    return tau, lam, ll


@njit(cache=True)
def _ranef_rows(y, s2, tol, maxiter, scan):
    m = y.shape[0]
    tau = np.empty(m)
    lam = np.empty(m)
    ll = np.empty(m)
    for k in range(m):
        tau[k], lam[k], ll[k] = _ranef_row(y[k], s2, tol, maxiter, scan)
    return tau, lam, ll


def ranef_fit(y, s2, tol=1e-12, maxiter=200, scan=48):
    """Rowwise ML for ``y_i ~ N(lam, s2_i + tau)`` over ``tau >= 0``.

    The profile log-likelihood in ``tau`` can have several local maxima
    when some ``s2`` are tiny, so each row is first scanned on ``scan``
    log-spaced values of ``tau``; the root of the score next to the best
    one is then found by Newton steps safeguarded with bisection, and the
    boundary ``tau = 0`` is compared against it.  Returns ``(tau, lam, profile loglik)`` with constants dropped.
    """
    y = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    s2 = np.ascontiguousarray(s2, dtype=float)
    return _ranef_rows(y, s2, float(tol), int(maxiter), int(scan))


class RandomEffectsModel(ModelSpec):
    """``y_i ~ N(lam, sigma_i^2 + psi^2)`` with known ``sigma_i``; ``theta = (psi, lam)``, ``psi >= 0``."""

    name = "ranef-full"
    space = ParamSpace((0.0, -np.inf), (np.inf, np.inf), ("psi", "lambda"))

    def __init__(self, sigma_mean: float = 2.0):
        self.sigma_mean = float(sigma_mean)

    def template(self, n, rng):
        return Dataset(np.zeros((n, 1)), known=rng.exponential(self.sigma_mean, n))

    def check_data(self, data):
        if data.known is None:
            raise ArgumentError("random-effects data needs the known standard deviations (column 'sigma')")
        if np.any(data.known < 0):
            raise DomainError("standard deviations must be non-negative")
        return data

    def pointwise(self, data, theta):
        psi, lam = theta
        return stats.norm.logpdf(data.obs[:, 0], lam, np.sqrt(data.known ** 2 + psi * psi))

    def sample(self, theta, n, rng, like=None):
        psi, lam = self.space.require(theta)
        like = like if like is not None else self.template(n, rng)
        sd = np.sqrt(like.known ** 2 + psi * psi)
        return Dataset(lam + sd * rng.standard_normal(like.n), known=like.known)

    def fast_mle(self, data):
        self.check_data(data)
        tau, lam, _ = ranef_fit(data.obs[:, 0][None, :], data.known ** 2)
        return np.array([np.sqrt(tau[0]), lam[0]])

    def initial(self, data):
        y = data.obs[:, 0]
        return np.array([max(float(np.std(y)), 0.1), float(np.mean(y))])

    def summarize(self, data):
        return data.obs[:, 0][None, :]

    def draw(self, theta, like, size, rng):
        psi, lam = np.asarray(theta, dtype=float)
        sd = np.sqrt(like.known ** 2 + psi * psi)
        return lam + sd * rng.standard_normal((size, like.n))

    def batch_logt(self, batch, theta, like):
        psi, lam = np.asarray(theta, dtype=float)
        if psi < 0:
            return np.full(len(batch), -np.inf)
        s2 = like.known ** 2
        v = s2 + psi * psi
        at = -0.5 * np.sum(np.log(v) + (batch - lam) ** 2 / v, axis=1)
        _, _, top = ranef_fit(batch, s2)
        return np.minimum(at - top, 0.0)

    def batch_estimate(self, batch, like):
        tau, lam, _ = ranef_fit(batch, like.known ** 2)
        return np.stack([np.sqrt(tau), lam], axis=1)


class RandomEffects(MarginalModelSpec):
    """Between-unit standard deviation ``psi`` with the overall mean as nuisance."""

    name = "ranef"

    def __init__(self, sigma_mean: float = 2.0, lambda0=None):
        self.base = RandomEffectsModel(sigma_mean)
        self.interest = 0
        self.lambda0 = None if lambda0 is None else tuple(float(v) for v in np.atleast_1d(lambda0))

    def closed_profile(self, data, psi):
        w = 1.0 / (data.known ** 2 + psi * psi)
        return np.array([float(np.sum(w * data.obs[:, 0]) / np.sum(w))])

    def batch_logt(self, batch, psi, like):
        psi = float(np.asarray(psi).reshape(-1)[0])
        if psi < 0:
            return np.full(len(batch), -np.inf)
        s2 = like.known ** 2
        at, _ = _ranef_profile(batch, s2, np.full(len(batch), psi * psi))
        _, _, top = ranef_fit(batch, s2)
        return np.minimum(at - top, 0.0)

    def batch_estimate(self, batch, like):
        tau, _, _ = ranef_fit(batch, like.known ** 2)
        return np.sqrt(tau)
