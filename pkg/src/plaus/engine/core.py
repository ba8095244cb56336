"""Point and set plausibility, and the test rule."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .. import streams
from ..errors import ArgumentError, CapabilityError, DomainError, NumericError
from .config import CLOSED, EXACT, MAX_FAILED_FRACTION, MONTE_CARLO, McConfig, PlausResult
from .problem import Problem, bind

METHODS = ("mc", "exact", "closed", "auto")


def _slack(obs: float) -> float:
    # equal statistics computed along slightly different float paths still tie
    return 1e-10 * (1.0 + abs(obs))


def _chunk_hits(problem, value, obs, seed, index, chunk, size):
    rng = streams.substream(seed, streams.MC, index, chunk)
    sim = problem.simulated(value, size, rng)
    bad = np.flatnonzero(np.isnan(sim))
    failed = 0
    if bad.size:
        retry = problem.simulated(value, bad.size, streams.substream(seed, streams.MC_RETRY, index, chunk))
        sim[bad] = retry
        still = np.isnan(retry)
        failed = int(still.sum())
        # a replicate that cannot be evaluated counts as a hit (T taken as 0)
        sim[bad[still]] = -np.inf
    return int(np.count_nonzero(sim <= obs + _slack(obs))), failed


def mc_estimate(problem: Problem, value, cfg: McConfig, index: int = 0) -> PlausResult:
    """Monte Carlo plausibility of ``value``: fraction of simulated T at most the observed T."""
    obs = problem.observed(value)
    if np.isnan(obs):
        raise NumericError(f"relative likelihood of the observed data is undefined at {np.ravel(value).tolist()}")
    idx = 0 if cfg.crn else int(index)
    sizes = streams.chunk_sizes(cfg.M)
    jobs = [(problem, value, obs, cfg.seed, idx, c, s) for c, s in enumerate(sizes)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda a: _chunk_hits(*a), jobs))
    else:
        parts = [_chunk_hits(*a) for a in jobs]
    hits = sum(p[0] for p in parts)
    failed = sum(p[1] for p in parts)
    if failed > MAX_FAILED_FRACTION * cfg.M:
        raise NumericError(f"{failed} of {cfg.M} simulated replicates could not be evaluated")
    p = hits / cfg.M
    return PlausResult(p, float(np.sqrt(p * (1 - p) / cfg.M)), MONTE_CARLO, cfg.M, failed)


def exact_estimate(problem: Problem, value) -> PlausResult:
    out = problem.enumerate(value)
    if out is None:
        raise CapabilityError(f"{problem.model.name} has no finite support to enumerate")
    logt, pmf = out
    obs = problem.observed(value)
    p = float(np.sum(pmf[logt <= obs + _slack(obs)]))
    return PlausResult(min(max(p, 0.0), 1.0), 0.0, EXACT, 0)


def closed_estimate(problem: Problem, value) -> PlausResult:
    obs = problem.observed(value)
    p = problem.statistic_cdf(value, obs)
    if p is None:
        raise CapabilityError(f"{problem.model.name} has no closed-form distribution for its statistic")
    return PlausResult(min(max(float(p), 0.0), 1.0), 0.0, CLOSED, 0)


def _resolve(problem: Problem, method: str) -> str:
    if method not in METHODS:
        raise ArgumentError(f"method must be one of {METHODS}, got {method!r}")
    if method != "auto":
        return method
    if problem.has_closed:
        return "closed"
    if problem.has_exact:
        return "exact"
    return "mc"


def plausibility(problem: Problem, value, cfg: McConfig | None = None, method: str = "mc",
                 index: int = 0) -> PlausResult:
    """Plausibility of a single parameter value (or interest value).

    Values outside the parameter space have plausibility 0.  ``index``
    selects the substream when common random numbers are off.
    """
    cfg = cfg or McConfig()
    method = _resolve(problem, method)
    value = problem.value(value)
    if not problem.admissible(value):
        return PlausResult(0.0, 0.0, {"mc": MONTE_CARLO, "exact": EXACT, "closed": CLOSED}[method],
                           cfg.M if method == "mc" else 0)
    if method == "exact":
        return exact_estimate(problem, value)
    if method == "closed":
        return closed_estimate(problem, value)
    return mc_estimate(problem, value, cfg, index)


def plaus_mc(model, data, theta, cfg: McConfig | None = None) -> PlausResult:
    """Monte Carlo plausibility of ``theta`` under an ordinary model."""
    return plausibility(bind(model, data), theta, cfg, "mc")


def plaus_exact_discrete(model, data, theta) -> PlausResult:
    """Exact plausibility by summing the mass function over the support."""
    return plausibility(bind(model, data), theta, None, "exact")


def marginal_plaus_mc(model, data, psi, cfg: McConfig | None = None) -> PlausResult:
    """Monte Carlo marginal plausibility of the interest value ``psi``."""
    problem = bind(model, data)
    if not problem.marginal:
        raise ArgumentError("marginal plausibility needs a model with a nuisance parameter")
    return plausibility(problem, psi, cfg, "mc")


# -- sets ---------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteSet:
    """A finite collection of parameter values."""

    points: Sequence

    def __post_init__(self):
        if len(self.points) == 0:
            raise ArgumentError("finite set is empty")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, optionally cut down by a predicate."""

    lower: Sequence[float]
    upper: Sequence[float]
    predicate: Callable[[np.ndarray], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi = np.atleast_1d(np.asarray(self.lower, float)), np.atleast_1d(np.asarray(self.upper, float))
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ArgumentError("box needs lower <= upper in every coordinate")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, float)
        inside = np.all(theta >= self.lower) and np.all(theta <= self.upper)
        return bool(inside and (self.predicate is None or self.predicate(theta)))


PROBES = 64
SET_STARTS = 3


def plaus_set(model, data, A, cfg: McConfig | None = None, method: str = "mc") -> PlausResult:
    """Plausibility of the assertion that the parameter lies in ``A``.

    The supremum of the pointwise plausibility over ``A``.  Finite sets are
    enumerated.  Boxes return 1 when they contain the MLE; otherwise the box
    (intersected with the space) is probed at its corners and at random
    points, and Nelder-Mead refines the best probes.  The result is the
    largest value seen, so it is a lower bound on the true supremum.
    """
    cfg = cfg or McConfig()
    problem = bind(model, data)
    space = problem.space
    if isinstance(A, FiniteSet):
        pts = [space.check(p) for p in A.points]
        if not any(space.contains(p) for p in pts):
            raise DomainError("the set does not intersect the parameter space")
        results = [plausibility(problem, p, cfg, method, index=i) for i, p in enumerate(pts)]
        return max(results, key=lambda r: r.estimate)
    if not isinstance(A, Box):
        raise ArgumentError("set must be a FiniteSet or a Box")
    if len(A.lower) != space.dims:
        raise ArgumentError("box dimension does not match the parameter")
    lo = np.maximum(A.lower, space.lower)
    hi = np.minimum(A.upper, space.upper)
    if np.any(lo > hi):
        raise DomainError("the box does not intersect the parameter space")
    est = problem.estimate
    if A.contains(est) and space.contains(est):
        return plausibility(problem, est, cfg, method)
    # finite probing window for unbounded sides
    reach = 20.0 * (1.0 + np.abs(est)) + 20.0 * problem.scale()
    lo_f = np.where(np.isfinite(lo), lo, est - reach)
    hi_f = np.where(np.isfinite(hi), hi, est + reach)
    rng = streams.substream(cfg.seed, streams.DESIGN)
    d = space.dims
    corners = np.array(np.meshgrid(*[[a, b] for a, b in zip(lo_f, hi_f)])).reshape(d, -1).T
    nearest = np.clip(est, lo_f, hi_f)[None, :]
    probes = np.vstack([nearest, corners, lo_f + (hi_f - lo_f) * rng.random((PROBES, d))])

    def member(theta):
        return A.contains(theta) and space.contains(theta)

    def pl(theta):
        return plausibility(problem, theta, cfg, method).estimate if member(theta) else -1.0

    values = np.array([pl(p) for p in probes])
    best_val, best = float(values.max()), probes[int(values.argmax())]
    width = np.where(hi_f > lo_f, hi_f - lo_f, 1.0)
    for k in np.argsort(values)[::-1][:SET_STARTS]:
        if values[k] < 0:
            break
        res = optimize.minimize(lambda z: -pl(lo_f + width * (0.5 + 0.5 * np.sin(z))),
                                np.arcsin(np.clip(2 * (probes[k] - lo_f) / width - 1, -1, 1)),
                                method="Nelder-Mead", options={"maxiter": 200 * d, "xatol": 1e-6, "fatol": 1e-9})
        theta = lo_f + width * (0.5 + 0.5 * np.sin(res.x))
        if -res.fun > best_val and member(theta):
            best_val, best = float(-res.fun), theta
    if best_val < 0:
        raise DomainError("no point of the set lies in the parameter space")
    return plausibility(problem, best, cfg, method)


@dataclass(frozen=True)
class TestDecision:
    """Outcome of testing the assertion that the parameter lies in a set."""

    reject: bool
    alpha: float
    plausibility: PlausResult

    def to_dict(self) -> dict:
        return {"reject": self.reject, "alpha": self.alpha, **self.plausibility.to_dict()}


def plaus_test(model, data, A, alpha: float, cfg: McConfig | None = None, method: str = "mc") -> TestDecision:
    """Reject the assertion when its plausibility is at most ``alpha``."""
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1)")
    res = plaus_set(model, data, A, cfg, method)
    return TestDecision(bool(res.estimate <= alpha), float(alpha), res)
