"""Maximum likelihood, relative likelihood, and relative profile likelihood.

Closed-form maximizers are used when a model provides them.  Otherwise a
derivative-free search runs on an unconstrained reparameterization of the
parameter space: Brent's method for one dimension, Nelder-Mead with random
restarts for more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import streams
from .errors import DomainError, FitError, NumericError
from .models.base import Dataset, MarginalModelSpec, ModelSpec, ParamSpace

RESTARTS = 3
JITTER_SD = 0.25
MAXITER = 2000
REL_FTOL = 1e-9
# stand-in for -inf inside the optimizers, which dislike infinities
_PENALTY = 1e300


@dataclass(frozen=True)
class FitResult:
    """Outcome of a likelihood maximization.

    ``residual`` is the final simplex diameter or bracket width on the
    unconstrained scale (0 for closed forms).
    """

    argmax: np.ndarray
    logmax: float
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0


class _Tracker:
    """Objective wrapper remembering the best feasible point ever probed."""

    def __init__(self, fun, space: ParamSpace):
        self.fun, self.space = fun, space
        self.best_theta, self.best = None, -np.inf
        self.calls = 0

    def __call__(self, z):
        theta = self.space.from_free(np.atleast_1d(z))
        self.calls += 1
        if not self.space.contains(theta):
            return _PENALTY
        val = self.fun(theta)
        if not np.isfinite(val):
            return _PENALTY
        if val > self.best:
            self.best, self.best_theta = val, theta.copy()
        return -val


def maximize(fun, space: ParamSpace, start, seed: int = 0) -> FitResult:
    """Maximize ``fun`` over ``space`` without derivatives.

    Raises
    ------
    FitError
        If no restart converges or no feasible point is ever found; ``best``
        carries the best point seen.
    """
    start = space.check(start)
    track = _Tracker(fun, space)
    z0 = space.to_free(start)
    rng = streams.substream(seed, streams.RESTART)
    starts = [z0] + [z0 + JITTER_SD * rng.standard_normal(z0.size) for _ in range(RESTARTS)]
    converged, iterations, residual = False, 0, np.inf
    for z in starts:
        if space.dims == 1:
            ok, nit, width = _brent(track, z)
        else:
            ok, nit, width = _nelder_mead(track, z)
        converged |= ok
        iterations += nit
        residual = min(residual, width) if ok else residual
    if track.best_theta is not None and space.dims > 1:
        # polish from the best point found
        ok, nit, width = _nelder_mead(track, space.to_free(track.best_theta))
        converged |= ok
        iterations += nit
        if ok:
            residual = min(residual, width)
    if track.best_theta is None:
        raise FitError("no feasible point with finite log-likelihood was found")
    fit = FitResult(track.best_theta, float(track.best), iterations, bool(converged), float(residual))
    if not converged:
        raise FitError("likelihood maximization did not converge", best=fit)
    return fit


def _nelder_mead(track, z):
    f0 = track(z)
    fatol = REL_FTOL * (1.0 + abs(f0)) if f0 < _PENALTY else REL_FTOL
    res = optimize.minimize(track, z, method="Nelder-Mead",
                            options={"maxiter": MAXITER, "xatol": 1e-8, "fatol": fatol, "adaptive": z.size > 2})
    sim = res.final_simplex[0]
    width = float(np.max(np.abs(sim[1:] - sim[0])))
    return bool(res.success) and res.fun < _PENALTY, int(res.nit), width


def _brent(track, z):
    try:
        res = optimize.minimize_scalar(lambda v: track(np.array([v])), bracket=(z[0] - 0.5, z[0] + 0.5),
                                       method="brent", options={"xtol": 1e-10, "maxiter": MAXITER})
    except (ValueError, RuntimeError, OverflowError):
        return _nelder_mead(track, z)
    ok = bool(res.success) and res.fun < _PENALTY and np.isfinite(res.x)
    return ok, int(res.nit), 1e-10 * (1 + abs(float(res.x)))


def mle(model: ModelSpec, data: Dataset, init=None, generic: bool = False) -> FitResult:
    """Maximum likelihood estimate of ``model`` on ``data``.

    Uses the model's closed form unless ``generic`` is set.
    """
    if isinstance(model, MarginalModelSpec):
        model = model.base
    model.check_data(data)
    if not generic:
        closed = model.fast_mle(data)
        if closed is not None:
            theta = model.space.check(closed)
            if not model.space.contains(theta):
                raise FitError("closed-form estimate lies outside the parameter space", best=theta)
            return FitResult(theta, model.loglik(data, theta))
    start = model.initial(data) if init is None else init
    return maximize(lambda th: model.loglik(data, th), model.space, start)


def relative_loglik(model: ModelSpec, data: Dataset, theta, fit: FitResult | None = None) -> float:
    """``log T``: log-likelihood at ``theta`` minus its maximum, at most 0."""
    theta = model.space.check(theta)
    if not model.space.contains(theta):
        return -np.inf
    fit = fit if fit is not None else mle(model, data)
    return min(model.loglik(data, theta) - fit.logmax, 0.0)


def relative_likelihood(model: ModelSpec, data: Dataset, theta, fit: FitResult | None = None) -> float:
    """``T = L(theta) / L(theta_hat)`` clamped to [0, 1]; 0 outside the space."""
    return float(np.exp(relative_loglik(model, data, theta, fit)))


def profile(model: MarginalModelSpec, data: Dataset, psi, generic: bool = False,
            fit: FitResult | None = None) -> FitResult:
    """Maximize over the nuisance parameter with the interest parameter fixed at ``psi``.

    ``argmax`` holds the nuisance maximizer only.
    """
    psi = float(model.space.check(psi)[0])
    if not model.space.contains([psi]):
        raise DomainError(f"interest value {psi} lies outside its space")
    base = model.base
    base.check_data(data)
    if not generic:
        lam = model.closed_profile(data, psi)
        if lam is not None:
            return FitResult(np.asarray(lam, dtype=float), base.loglik(data, model.join(psi, lam)))
    fit = fit if fit is not None else mle(base, data, generic=generic)
    start = np.clip(model.split(fit.argmax)[1], model.nuisance_space.lower, model.nuisance_space.upper)
    return maximize(lambda lam: base.loglik(data, model.join(psi, lam)), model.nuisance_space, start)


def relative_profile_loglik(model: MarginalModelSpec, data: Dataset, psi, generic: bool = False,
                            fit: FitResult | None = None) -> float:
    psi_arr = model.space.check(psi)
    if not model.space.contains(psi_arr):
        return -np.inf
    fit = fit if fit is not None else mle(model.base, data, generic=generic)
    prof = profile(model, data, psi_arr, generic=generic, fit=fit)
    return min(prof.logmax - fit.logmax, 0.0)


def relative_profile_likelihood(model: MarginalModelSpec, data: Dataset, psi, generic: bool = False,
                                fit: FitResult | None = None) -> float:
    """``L(psi, lam_hat_psi) / L(psi_hat, lam_hat)`` in [0, 1]."""
    return float(np.exp(relative_profile_loglik(model, data, psi, generic, fit)))


def observed_information(model: ModelSpec, data: Dataset, theta=None) -> np.ndarray:
    """Observed information matrix at ``theta`` (default: the MLE).

    Central finite differences of the log-likelihood on the unconstrained
    scale with step ``max(1e-5, 1e-5 |z|)``, mapped back to the natural scale
    through the diagonal Jacobian of the reparameterization.
    """
    if isinstance(model, MarginalModelSpec):
        model = model.base
    space = model.space
    theta = mle(model, data).argmax if theta is None else space.check(theta)
    z = space.to_free(theta)
    h = np.maximum(1e-5, 1e-5 * np.abs(z))
    d = z.size

    def f(v):
        return model.loglik(data, space.from_free(v))

    f0 = f(z)
    hess = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        hess[i, i] = (f(z + ei) - 2 * f0 + f(z - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = h[j]
            val = (f(z + ei + ej) - f(z + ei - ej) - f(z - ei + ej) + f(z - ei - ej)) / (4 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    if not np.all(np.isfinite(hess)):
        raise NumericError("log-likelihood is not finite near the estimate")
    # at a stationary point the gradient term of the chain rule vanishes
    jac = space.free_jacobian(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -hess / np.outer(jac, jac)


def wald_se(model: ModelSpec, data: Dataset, theta=None, index: int = 0) -> float:
    """Standard error of component ``index`` from the inverse observed information."""
    info = observed_information(model, data, theta)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise NumericError("observed information is singular") from None
    var = cov[index, index]
    if not (np.isfinite(var) and var > 0):
        raise NumericError("observed information is not positive definite")
    return float(np.sqrt(var))
