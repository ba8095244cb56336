"""Probit regression with a fixed design."""

from __future__ import annotations

import numpy as np
from scipy import special, stats

from ..errors import ArgumentError, DomainError
from .base import Dataset, ModelSpec, ParamSpace

_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)

# synthetic design used when no covariates are supplied: twelve dose levels
DOSE_LEVELS = np.linspace(-2.0, 2.0, 12)


def _loglik_rows(beta, X, Y):
    eta = beta @ X.T
    return np.sum(np.where(Y > 0.5, special.log_ndtr(eta), special.log_ndtr(-eta)), axis=1)


def probit_fit(X, Y, start, maxiter=100, tol=1e-10):
    """Batched Fisher scoring for probit MLEs.

    ``X`` is ``(n, k)`` including the intercept, ``Y`` is ``(m, n)``.  Each
    row's iterate only moves uphill (step halving), so the returned
    log-likelihood is the best one visited even under separation, where the
    supremum is approached but not attained.

    Returns ``(beta, loglik, converged)``.
    """
    m, k = Y.shape[0], X.shape[1]
    beta = np.broadcast_to(np.asarray(start, dtype=float), (m, k)).copy()
    ll = _loglik_rows(beta, X, Y)
    converged = np.zeros(m, dtype=bool)
    ridge = 1e-10 * np.eye(k)
    for _ in range(maxiter):
        act = ~converged
        if not act.any():
            break
        b, y = beta[act], Y[act]
        eta = b @ X.T
        log_phi = -0.5 * eta ** 2 - _LOG_SQRT_2PI
        lp, lq = special.log_ndtr(eta), special.log_ndtr(-eta)
        g = np.where(y > 0.5, np.exp(log_phi - lp), -np.exp(log_phi - lq))
        w = np.exp(2 * log_phi - lp - lq)
        score = g @ X
        info = np.einsum("mn,ni,nj->mij", w, X, X) + ridge
        step = np.linalg.solve(info, score[..., None])[..., 0]
        cur = ll[act]
        new_b, new_ll = b + step, _loglik_rows(b + step, X, y)
        for _ in range(30):
            bad = ~(new_ll >= cur - 1e-12)
            if not bad.any():
                break
            step[bad] *= 0.5
            new_b[bad] = b[bad] + step[bad]
            new_ll[bad] = _loglik_rows(new_b[bad], X, y[bad])
        ok = new_ll >= cur - 1e-12
        b = np.where(ok[:, None], new_b, b)
        idx = np.flatnonzero(act)
        beta[idx] = b
        ll[idx] = np.where(ok, np.maximum(new_ll, cur), cur)
        converged[idx] = ~ok | (np.max(np.abs(step), axis=1) < tol * (1 + np.max(np.abs(b), axis=1)))
    return beta, ll, converged


class Probit(ModelSpec):
    """Binary responses with ``P(y=1) = Phi(x' theta)``, ``x = (1, covariates)``.

    The design is fixed: simulation redraws responses only.
    """

    name = "probit"

    def __init__(self, covariates: int = 1):
        if covariates < 1:
            raise ArgumentError("probit needs at least one covariate")
        self.covariates = int(covariates)
        k = covariates + 1
        self.space = ParamSpace((-np.inf,) * k, (np.inf,) * k, tuple(f"beta{j}" for j in range(k)))

    def template(self, n, rng):
        reps = int(np.ceil(n / len(DOSE_LEVELS)))
        x = np.repeat(DOSE_LEVELS, reps)[:n]
        cols = [x] + [x ** (j + 1) for j in range(1, self.covariates)]
        return Dataset(np.zeros((n, 1)), design=np.column_stack(cols))

    def design_matrix(self, data):
        if data.design is None or data.design.shape[1] != self.covariates:
            raise ArgumentError(f"probit data needs {self.covariates} covariate column(s)")
        return np.column_stack([np.ones(data.n), data.design])

    def check_data(self, data):
        y = data.obs[:, 0]
        if not np.all((y == 0) | (y == 1)):
            raise DomainError("probit responses must be 0 or 1")
        self.design_matrix(data)
        return data

    def pointwise(self, data, theta):
        eta = self.design_matrix(data) @ theta
        y = data.obs[:, 0]
        return np.where(y > 0.5, special.log_ndtr(eta), special.log_ndtr(-eta))

    def sample(self, theta, n, rng, like=None):
        theta = self.space.require(theta)
        like = like if like is not None else self.template(n, rng)
        p = special.ndtr(self.design_matrix(like) @ theta)
        return Dataset((rng.random(like.n) < p).astype(float), design=like.design)

    def initial(self, data):
        """Weighted least squares on the latent (probit) scale, by design point."""
        X = self.design_matrix(data)
        y = data.obs[:, 0]
        rows, inv, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
        hits = np.bincount(inv.ravel(), weights=y)
        p = (hits + 0.5) / (counts + 1.0)
        z = stats.norm.ppf(p)
        w = counts * stats.norm.pdf(z) ** 2 / (p * (1 - p))
        if len(rows) < X.shape[1]:
            return np.zeros(X.shape[1])
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(rows * sw[:, None], z * sw, rcond=None)
        return coef

    def fast_mle(self, data):
        self.check_data(data)
        X = self.design_matrix(data)
        beta, _, conv = probit_fit(X, data.obs[:, 0][None, :], self.initial(data))
        return beta[0]

    def summarize(self, data):
        return data.obs[:, 0][None, :]

    def draw(self, theta, like, size, rng):
        p = special.ndtr(self.design_matrix(like) @ np.asarray(theta, dtype=float))
        return (rng.random((size, like.n)) < p).astype(float)

    def batch_logt(self, batch, theta, like):
        X = self.design_matrix(like)
        theta = np.asarray(theta, dtype=float)
        _, llmax, _ = probit_fit(X, batch, theta)
        at = _loglik_rows(theta[None, :], X, batch)
        return np.minimum(at - llmax, 0.0)

    def batch_estimate(self, batch, like):
        X = self.design_matrix(like)
        beta, _, _ = probit_fit(X, batch, np.zeros(X.shape[1]))
        return beta
