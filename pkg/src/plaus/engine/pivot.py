"""Does the law of the relative likelihood depend on the parameter?"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .. import streams
from ..errors import ArgumentError, CapabilityError
from ..models.base import Dataset, MarginalModelSpec
from .config import McConfig

# two-sample Kolmogorov-Smirnov 5% critical constant
KS_C = 1.36
DEFAULT_Q = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95)


def statistic_sample(model, like: Dataset, theta, cfg: McConfig, index: int = 0):
    """``(logT values, weights)`` for data drawn at the full parameter ``theta``.

    For marginal models ``theta`` is the full base parameter and the
    statistic is the relative profile likelihood at its interest component.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(model, MarginalModelSpec):
        base, target = model.base, theta[model.interest]
    else:
        base, target = model, theta
    parts = []
    for c, size in enumerate(streams.chunk_sizes(cfg.M)):
        rng = streams.substream(cfg.seed, streams.MC, index, c)
        parts.append(np.asarray(model.batch_logt(base.draw(theta, like, size, rng), target, like), float))
    values = np.concatenate(parts)
    return values, np.full(values.size, 1.0 / values.size)


def exact_statistic(model, like: Dataset, theta):
    if isinstance(model, MarginalModelSpec):
        raise CapabilityError("exact enumeration is not available for marginal models")
    out = model.enumerate(theta, like)
    if out is None:
        raise CapabilityError(f"{model.name} has no finite support to enumerate")
    batch, pmf = out
    return np.asarray(model.batch_logt(batch, theta, like), float), np.asarray(pmf, float)


class WeightedCdf:
    """Right-continuous step distribution function of weighted points."""

    def __init__(self, values, weights):
        order = np.argsort(values, kind="stable")
        self.x = np.asarray(values, float)[order]
        self.cum = np.cumsum(np.asarray(weights, float)[order])
        self.total = self.cum[-1] if self.cum.size else 1.0

    def __call__(self, t):
        k = np.searchsorted(self.x, t, side="right")
        return np.where(k > 0, self.cum[np.maximum(k - 1, 0)], 0.0) / self.total

    def quantile(self, q):
        k = np.searchsorted(self.cum / self.total, np.asarray(q) - 1e-12, side="left")
        return self.x[np.minimum(k, self.x.size - 1)]


def sup_distance(f: WeightedCdf, g: WeightedCdf) -> float:
    """Kolmogorov distance between two step distribution functions."""
    pts = np.union1d(f.x, g.x)
    pts = pts[np.isfinite(pts)] if np.isfinite(pts).any() else pts
    if pts.size == 0:
        return 0.0
    return float(np.max(np.abs(f(pts) - g(pts))))


@dataclass(frozen=True)
class PivotReport:
    """Pairwise comparison of the laws of T across parameter values.

    ``mc_bound`` is three times the 5% two-sample Kolmogorov-Smirnov
    critical value for samples of size M, a generous allowance for Monte
    Carlo noise; ``pivotal`` compares ``max_discrepancy`` against it.
    """

    max_discrepancy: float
    mc_bound: float
    method: str
    table: list = field(default_factory=list)

    @property
    def pivotal(self) -> bool:
        return self.max_discrepancy <= self.mc_bound

    def to_dict(self) -> dict:
        return {"max_discrepancy": self.max_discrepancy, "mc_bound": self.mc_bound, "pivotal": self.pivotal,
                "method": self.method, "table": self.table}


def pivotality_check(model, like: Dataset, theta_grid, cfg: McConfig | None = None,
                     q_grid=DEFAULT_Q, method: str = "mc") -> PivotReport:
    """Compare the distribution of the relative likelihood across ``theta_grid``.

    Each grid point uses its own independent substreams (``method='mc'``) or
    exact enumeration (``method='exact'``).  The table has one row per pair
    with the sup distance between the distribution functions of T and the
    absolute differences of their quantiles at ``q_grid``.
    """
    cfg = cfg or McConfig()
    grid = [np.atleast_1d(np.asarray(t, float)) for t in theta_grid]
    if len(grid) < 2:
        raise ArgumentError("pivotality check needs at least two parameter values")
    if method not in ("mc", "exact"):
        raise ArgumentError("method must be 'mc' or 'exact'")
    base = model.base if isinstance(model, MarginalModelSpec) else model
    for t in grid:
        base.space.require(t)
    cdfs = []
    for i, t in enumerate(grid):
        vals, w = exact_statistic(model, like, t) if method == "exact" else statistic_sample(model, like, t, cfg, i)
        cdfs.append(WeightedCdf(np.exp(vals), w))
    table = []
    for i, j in combinations(range(len(grid)), 2):
        qdiff = np.abs(cdfs[i].quantile(q_grid) - cdfs[j].quantile(q_grid))
        table.append({"i": i, "j": j, "theta_i": grid[i].tolist(), "theta_j": grid[j].tolist(),
                      "sup_distance": sup_distance(cdfs[i], cdfs[j]),
                      "quantile_diff": dict(zip((float(q) for q in q_grid), qdiff.tolist()))})
    worst = max(row["sup_distance"] for row in table)
    return PivotReport(worst, 3 * KS_C / np.sqrt(cfg.M), method, table)
