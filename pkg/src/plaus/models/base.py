"""Model abstraction: parameter spaces, datasets, and the two model kinds.

A :class:`ModelSpec` knows how to evaluate its log-likelihood, draw data,
and (for speed) compute the relative likelihood of many simulated datasets
at once.  A :class:`MarginalModelSpec` wraps a base model, splits its
parameter into an interest component and a nuisance vector, and computes
the relative profile likelihood instead.

The batched hooks (``summarize``/``draw``/``batch_logt``/``batch_estimate``)
work on an opaque *batch* whose layout each model chooses, typically the
sufficient statistics.  The defaults below fall back to stacking full
datasets and calling the generic optimizer, which keeps user-defined models
usable without writing any vectorized code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ArgumentError, CapabilityError, DomainError


@dataclass(frozen=True)
class ParamSpace:
    """Box-shaped parameter space with an optional extra constraint."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    names: tuple[str, ...] = ()
    predicate: Callable[[np.ndarray], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ArgumentError("lower and upper bounds must have the same positive length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ArgumentError("every bound pair must satisfy lower < upper")
        names = tuple(self.names) or tuple(f"theta{i + 1}" for i in range(len(lo)))
        if len(names) != len(lo):
            raise ArgumentError("one name per dimension required")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "names", names)

    @property
    def dims(self) -> int:
        return len(self.lower)

    def check(self, theta) -> np.ndarray:
        """Coerce ``theta`` to a float vector of the right length."""
        arr = np.atleast_1d(np.asarray(theta, dtype=float))
        if arr.ndim != 1 or arr.size != self.dims:
            raise ArgumentError(f"expected a parameter of dimension {self.dims}, got shape {np.shape(theta)}")
        return arr

    def contains(self, theta) -> bool:
        arr = self.check(theta)
        if not np.all(np.isfinite(arr)):
            return False
        if np.any(arr < self.lower) or np.any(arr > self.upper):
            return False
        return True if self.predicate is None else bool(self.predicate(arr))

    def require(self, theta) -> np.ndarray:
        arr = self.check(theta)
        if not self.contains(arr):
            raise DomainError(f"parameter {arr.tolist()} lies outside the parameter space")
        return arr

    # unconstrained reparameterization used by the optimizers
    def to_free(self, theta) -> np.ndarray:
        th = self.check(theta)
        z = np.empty_like(th)
        for i, (t, lo, hi) in enumerate(zip(th, self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                u = np.clip((t - lo) / (hi - lo), 1e-12, 1 - 1e-12)
                z[i] = np.log(u) - np.log1p(-u)
            elif np.isfinite(lo):
                z[i] = np.log(max(t - lo, 1e-300))
            elif np.isfinite(hi):
                z[i] = np.log(max(hi - t, 1e-300))
            else:
                z[i] = t
        return z

    def from_free(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        th = np.empty_like(z)
        for i, (v, lo, hi) in enumerate(zip(z, self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                th[i] = lo + (hi - lo) / (1.0 + np.exp(-v))
            elif np.isfinite(lo):
                th[i] = lo + np.exp(v)
            elif np.isfinite(hi):
                th[i] = hi - np.exp(v)
            else:
                th[i] = v
        return th

    def free_jacobian(self, theta) -> np.ndarray:
        """Diagonal of d theta / d z at ``theta``."""
        th = self.check(theta)
        jac = np.ones_like(th)
        for i, (t, lo, hi) in enumerate(zip(th, self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                jac[i] = (t - lo) * (hi - t) / (hi - lo)
            elif np.isfinite(lo):
                jac[i] = t - lo
            elif np.isfinite(hi):
                jac[i] = hi - t
        return jac


def _frozen(arr, ndim, name):
    if arr is None:
        return None
    out = np.array(arr, dtype=float)
    if ndim == 2 and out.ndim == 1:
        out = out[:, None]
    if out.ndim != ndim:
        raise ArgumentError(f"{name} must be {ndim}-dimensional")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed or simulated data.

    ``obs`` has one row per unit.  ``design`` holds fixed covariates
    (without the intercept column) and ``known`` a vector of known
    per-unit constants such as measurement standard deviations.
    """

    obs: np.ndarray
    design: np.ndarray | None = None
    known: np.ndarray | None = None

    def __post_init__(self):
        obs = _frozen(self.obs, 2, "obs")
        if obs.shape[0] == 0:
            raise ArgumentError("dataset has no observations")
        design = _frozen(self.design, 2, "design")
        known = _frozen(self.known, 1, "known")
        if design is not None and design.shape[0] != obs.shape[0]:
            raise ArgumentError("design rows must match the number of observations")
        if known is not None and known.shape[0] != obs.shape[0]:
            raise ArgumentError("known constants must have one entry per observation")
        object.__setattr__(self, "obs", obs)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "known", known)

    @property
    def n(self) -> int:
        return self.obs.shape[0]

    @property
    def y(self) -> np.ndarray:
        """First observation column as a flat vector."""
        return self.obs[:, 0]

    def with_obs(self, obs) -> "Dataset":
        return Dataset(obs, self.design, self.known)

    def same(self, other: "Dataset") -> bool:
        def eq(a, b):
            return (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))

        return eq(self.obs, other.obs) and eq(self.design, other.design) and eq(self.known, other.known)


class ModelSpec:
    """A parametric model P_theta.

    Subclasses set ``name`` and ``space`` and implement ``pointwise`` (or
    ``loglik``) and ``sample``.  Everything else has a working default.
    """

    name: str = "model"
    space: ParamSpace
    marginal = False

    # -- scalar API -------------------------------------------------------
    def pointwise(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        """Per-observation log densities at an admissible ``theta``."""
        raise CapabilityError(f"{self.name} has no per-observation likelihood")

    def loglik(self, data: Dataset, theta) -> float:
        theta = self.space.check(theta)
        if not self.space.contains(theta):
            return -np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            total = float(np.sum(self.pointwise(data, theta)))
        return total if not np.isnan(total) else -np.inf

    def sample(self, theta, n: int, rng: np.random.Generator, like: Dataset | None = None) -> Dataset:
        raise NotImplementedError

    def template(self, n: int, rng: np.random.Generator) -> Dataset | None:
        """Fixed design / known constants for a fresh sample of size ``n``."""
        return None

    def fast_mle(self, data: Dataset) -> np.ndarray | None:
        """Closed-form or model-specific maximizer; None means use the generic optimizer."""
        return None

    def initial(self, data: Dataset) -> np.ndarray:
        lo, hi = np.array(self.space.lower), np.array(self.space.upper)
        start = np.zeros(self.space.dims)
        both = np.isfinite(lo) & np.isfinite(hi)
        start[both] = 0.5 * (lo[both] + hi[both])
        only_lo = np.isfinite(lo) & ~np.isfinite(hi)
        start[only_lo] = lo[only_lo] + 1.0
        only_hi = ~np.isfinite(lo) & np.isfinite(hi)
        start[only_hi] = hi[only_hi] - 1.0
        return start

    def check_data(self, data: Dataset) -> Dataset:
        return data

    # -- batched API --------------------------------------------------------
    def summarize(self, data: Dataset):
        """Batch of size one holding ``data``."""
        return data.obs[None, ...]

    def draw(self, theta, like: Dataset, size: int, rng: np.random.Generator):
        """Batch of ``size`` datasets shaped like ``like`` drawn at ``theta``."""
        return np.stack([self.sample(theta, like.n, rng, like).obs for _ in range(size)])

    def batch_logt(self, batch, theta, like: Dataset) -> np.ndarray:
        """log relative likelihood of every dataset in ``batch`` at ``theta``."""
        from ..likelihood import mle

        theta = self.space.check(theta)
        out = np.empty(len(batch))
        for i, obs in enumerate(batch):
            data = like.with_obs(obs)
            try:
                fit = mle(self, data)
                out[i] = min(self.loglik(data, theta) - fit.logmax, 0.0)
            except ArithmeticError:
                out[i] = np.nan
        return out

    def batch_estimate(self, batch, like: Dataset) -> np.ndarray:
        """MLE of every dataset in ``batch``, shape ``(size, dims)``."""
        from ..likelihood import mle

        out = np.full((len(batch), self.space.dims), np.nan)
        for i, obs in enumerate(batch):
            try:
                out[i] = mle(self, like.with_obs(obs)).argmax
            except ArithmeticError:
                pass
        return out

    def enumerate(self, theta, like: Dataset):
        """All outcomes with their probabilities, as ``(batch, pmf)``, or None."""
        return None

    def pivot_cdf(self, logt: float, like: Dataset) -> float | None:
        """Closed-form P(log T <= logt) when the statistic is an exact pivot."""
        return None

    def statistic_cdf(self, logt: float, theta, like: Dataset) -> float | None:
        """Closed-form P_theta(log T <= logt), or None; defaults to the pivot law."""
        return self.pivot_cdf(logt, like)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class MarginalModelSpec:
    """Interest/nuisance split of a base model.

    The interest parameter is component ``interest`` of the base parameter;
    the remaining components, in order, form the nuisance vector.
    ``lambda0`` fixes the nuisance value used for simulation; ``None`` means
    plug in the global MLE of the observed data.
    """

    name: str = "marginal"
    marginal = True
    base: ModelSpec
    interest: int = 0
    lambda0: tuple[float, ...] | None = None

    @property
    def space(self) -> ParamSpace:
        b = self.base.space
        i = self.interest
        return ParamSpace((b.lower[i],), (b.upper[i],), (b.names[i],))

    @property
    def nuisance_space(self) -> ParamSpace:
        b = self.base.space
        keep = [j for j in range(b.dims) if j != self.interest]
        return ParamSpace(tuple(b.lower[j] for j in keep), tuple(b.upper[j] for j in keep),
                          tuple(b.names[j] for j in keep))

    def split(self, theta) -> tuple[float, np.ndarray]:
        theta = self.base.space.check(theta)
        return float(theta[self.interest]), np.delete(theta, self.interest)

    def join(self, psi, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        return np.insert(lam, self.interest, float(np.asarray(psi).reshape(-1)[0]))

    def closed_profile(self, data: Dataset, psi: float) -> np.ndarray | None:
        """Closed-form nuisance maximizer at fixed ``psi``, or None."""
        return None

    def nuisance_for_simulation(self, data: Dataset, fit_argmax: np.ndarray) -> np.ndarray:
        if self.lambda0 is not None:
            return np.asarray(self.lambda0, dtype=float)
        return self.split(fit_argmax)[1]

    # batched API mirrors ModelSpec but ``value`` is the interest scalar
    def summarize(self, data: Dataset):
        return self.base.summarize(data)

    def draw(self, psi, lam, like: Dataset, size: int, rng: np.random.Generator):
        return self.base.draw(self.join(psi, lam), like, size, rng)

    def batch_logt(self, batch, psi, like: Dataset) -> np.ndarray:
        from ..likelihood import relative_profile_loglik

        out = np.empty(len(batch))
        for i, obs in enumerate(batch):
            try:
                out[i] = relative_profile_loglik(self, like.with_obs(obs), psi)
            except ArithmeticError:
                out[i] = np.nan
        return out

    def batch_estimate(self, batch, like: Dataset) -> np.ndarray:
        return self.base.batch_estimate(batch, like)[:, self.interest]

    def enumerate(self, psi, lam, like: Dataset):
        return None

    def pivot_cdf(self, logt: float, like: Dataset) -> float | None:
        return None

    def statistic_cdf(self, logt: float, psi, like: Dataset) -> float | None:
        return self.pivot_cdf(logt, like)

    def template(self, n, rng):
        return self.base.template(n, rng)

    def check_data(self, data: Dataset) -> Dataset:
        return self.base.check_data(data)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"
