"""Interval methods the plausibility regions are compared against."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats

from . import streams
from .errors import ArgumentError, DomainError, NumericError
from .likelihood import mle, wald_se
from .models.base import Dataset, MarginalModelSpec


@dataclass(frozen=True)
class IntervalEstimate:
    method: str
    lo: float
    hi: float
    alpha: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise NumericError(f"{self.method} interval has lo > hi ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        return asdict(self)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1)")


def _target(model):
    """Scalar target index and its bounds for an ordinary or marginal model."""
    if isinstance(model, MarginalModelSpec):
        space, idx = model.base.space, model.interest
    else:
        space, idx = model.space, 0
        if space.dims != 1:
            raise ArgumentError("interval baselines need a scalar parameter or a marginal model")
    return idx, space.lower[idx], space.upper[idx]


def wald_interval(model, data: Dataset, alpha: float = 0.05) -> IntervalEstimate:
    """Estimate plus or minus a normal quantile times the observed-information standard error."""
    _check_alpha(alpha)
    idx, lo_b, hi_b = _target(model)
    fit = mle(model, data)
    center = float(fit.argmax[idx])
    half = stats.norm.ppf(1 - alpha / 2) * wald_se(model, data, fit.argmax, idx)
    return IntervalEstimate("wald", max(center - half, lo_b), min(center + half, hi_b), alpha)


def clopper_pearson(n: int, y: int, alpha: float = 0.05) -> IntervalEstimate:
    """Exact binomial interval from beta quantiles."""
    _check_alpha(alpha)
    if not (0 <= y <= n) or n < 1:
        raise DomainError("need 0 <= y <= n and n >= 1")
    lo = 0.0 if y == 0 else float(stats.beta.ppf(alpha / 2, y, n - y + 1))
    hi = 1.0 if y == n else float(stats.beta.ppf(1 - alpha / 2, y + 1, n - y))
    return IntervalEstimate("cp", lo, hi, alpha)


def _quantile7(x, q):
    return np.quantile(x, q, method="linear")


def bootstrap_estimates(model, data: Dataset, B: int, stream=None) -> tuple[float, np.ndarray]:
    """Estimate on ``data`` and on ``B`` datasets simulated from the fitted model.

    Correlation problems use the sample correlation, which is also the MLE of
    the correlation.  Returns ``(estimate, replicate estimates)`` with NaN for
    failed fits.
    """
    if B < 10:
        raise ArgumentError("bootstrap needs B >= 10")
    idx, _, _ = _target(model)
    base = model.base if isinstance(model, MarginalModelSpec) else model
    fit = mle(base, data)
    rng = streams.as_generator(stream)
    batch = base.draw(fit.argmax, data, B, rng)
    with np.errstate(all="ignore"):
        est = np.asarray(base.batch_estimate(batch, data), float)
    return float(fit.argmax[idx]), est[:, idx]


def bootstrap_percentile(model, data: Dataset, alpha: float = 0.05, B: int = 5000, stream=None) -> IntervalEstimate:
    """Parametric bootstrap percentile interval (type-7 quantiles)."""
    _check_alpha(alpha)
    _, lo_b, hi_b = _target(model)
    _, est = bootstrap_estimates(model, data, B, stream)
    bad = ~np.isfinite(est)
    if bad.sum() > 0.01 * B:
        raise NumericError(f"{int(bad.sum())} of {B} bootstrap estimates failed")
    lo, hi = _quantile7(est[~bad], [alpha / 2, 1 - alpha / 2])
    return IntervalEstimate("pboot", max(float(lo), lo_b), min(float(hi), hi_b), alpha)


def _check_r(psi_hat, n):
    if not abs(psi_hat) < 1:
        raise DomainError("correlation estimate must lie strictly inside (-1, 1)")
    if n < 4:
        raise DomainError("need n >= 4")


def fisher_z_interval(psi_hat: float, n: int, alpha: float = 0.05) -> IntervalEstimate:
    """``tanh(atanh(r) -+ z / sqrt(n - 3))``."""
    _check_alpha(alpha)
    _check_r(psi_hat, n)
    z = np.arctanh(psi_hat)
    half = stats.norm.ppf(1 - alpha / 2) / np.sqrt(n - 3)
    return IntervalEstimate("fisher-z", float(np.tanh(z - half)), float(np.tanh(z + half)), alpha)


def hotelling_z4(psi_hat, n: int):
    """Hotelling's bias-corrected Fisher transform of a correlation."""
    r = np.asarray(psi_hat, dtype=float)
    z = np.arctanh(r)
    m = n - 1.0
    return z - (3 * z + r) / (4 * m) - (23 * z + 33 * r - 5 * r * r) / (96 * m * m)


def hotelling_z4_inverse(z4: float, n: int) -> float:
    """Correlation whose z4 transform is ``z4``, by bracketed root finding (z4 is increasing in r for n >= 4)."""
    f = lambda r: float(hotelling_z4(r, n)) - z4
    lo, hi = -1 + 1e-15, 1 - 1e-15
    if f(lo) >= 0:
        return -1.0
    if f(hi) <= 0:
        return 1.0
    try:
        return float(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    except (ValueError, RuntimeError) as exc:
        raise NumericError(f"z4 inversion failed: {exc}") from None


def hotelling_z4_interval(psi_hat: float, n: int, alpha: float = 0.05) -> IntervalEstimate:
    """Normal interval on the z4 scale with variance ``1/(n-1)``, mapped back to a correlation."""
    _check_alpha(alpha)
    _check_r(psi_hat, n)
    z4 = float(hotelling_z4(psi_hat, n))
    half = stats.norm.ppf(1 - alpha / 2) / np.sqrt(n - 1)
    return IntervalEstimate("z4", hotelling_z4_inverse(z4 - half, n), hotelling_z4_inverse(z4 + half, n), alpha)


def sample_correlation(data: Dataset) -> float:
    x, y = data.obs[:, 0], data.obs[:, 1]
    return float(np.corrcoef(x, y)[0, 1])


def wald_ellipse(model, data: Dataset, alpha: float = 0.05, points: int = 200) -> np.ndarray:
    """Boundary of the Wald confidence ellipse for a two-dimensional parameter.

    ``(theta - theta_hat)' I (theta - theta_hat) = chi2_{2, 1-alpha}``,
    returned as a closed polyline of shape ``(points + 1, 2)``.
    """
    from .likelihood import observed_information

    base = model.base if isinstance(model, MarginalModelSpec) else model
    if base.space.dims != 2:
        raise ArgumentError("the Wald ellipse needs a two-dimensional parameter")
    fit = mle(base, data)
    info = observed_information(base, data, fit.argmax)
    try:
        cov = np.linalg.inv(info)
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NumericError("observed information is not positive definite") from None
    radius = np.sqrt(stats.chi2.ppf(1 - alpha, 2))
    t = np.linspace(0, 2 * np.pi, points + 1)
    circle = np.stack([np.cos(t), np.sin(t)])
    return (fit.argmax[:, None] + radius * chol @ circle).T


def correlation_interval(method: str, data: Dataset, alpha: float = 0.05) -> IntervalEstimate:
    r, n = sample_correlation(data), data.n
    if method == "fisher-z":
        return fisher_z_interval(r, n, alpha)
    if method == "z4":
        return hotelling_z4_interval(r, n, alpha)
    raise ArgumentError(f"unknown correlation interval {method!r}")


__all__ = [
    "IntervalEstimate", "wald_interval", "clopper_pearson", "bootstrap_percentile", "bootstrap_estimates",
    "fisher_z_interval", "hotelling_z4", "hotelling_z4_inverse", "hotelling_z4_interval", "sample_correlation",
    "wald_ellipse", "correlation_interval",
]
