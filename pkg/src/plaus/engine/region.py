"""Plausibility regions for a scalar parameter (or scalar interest parameter)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..errors import ArgumentError, NumericError
from .config import McConfig
from .core import plausibility
from .problem import bind

DEFAULT_POINTS = 512
DEFAULT_SPAN = 2.0
MAX_EXPANSIONS = 12
BISECTION_CAP = 60
REL_TOL = 1e-4


@dataclass(frozen=True)
class RegionResult:
    """Union of disjoint intervals where the plausibility exceeds ``alpha``.

    Endpoints are the last bisection point found *outside* the region, so
    each reported interval contains the true one up to ``endpoint_tol``.
    ``whole_space`` is set when the region is the entire parameter range;
    ``truncated`` when an unbounded side never dropped below ``alpha``.
    """

    alpha: float
    intervals: tuple[tuple[float, float], ...]
    endpoint_tol: float
    grid_points: int
    contains_mle: bool
    whole_space: bool = False
    truncated: bool = False
    method: str = "mc"
    grid: np.ndarray = field(default=None, repr=False, compare=False)
    pl: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def lower(self) -> float:
        return self.intervals[0][0]

    @property
    def upper(self) -> float:
        return self.intervals[-1][1]

    def contains(self, value: float) -> bool:
        return any(a <= value <= b for a, b in self.intervals)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "intervals": [list(iv) for iv in self.intervals],
                "endpoint_tol": self.endpoint_tol, "grid_points": self.grid_points,
                "contains_mle": self.contains_mle, "whole_space": self.whole_space,
                "truncated": self.truncated, "method": self.method}


def intervals_from_curve(grid, pl, alpha, lower=-np.inf, upper=np.inf):
    """Cut a sampled curve at ``alpha``: runs of grid points with ``pl > alpha``.

    Each run is widened halfway to its outside neighbours, or to the space
    bound when it touches the edge of the grid at that bound.
    """
    grid, pl = np.asarray(grid, float), np.asarray(pl, float)
    inside = pl > alpha
    out = []
    i, n = 0, len(grid)
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        a = 0.5 * (grid[i - 1] + grid[i]) if i > 0 else max(grid[0], lower) if np.isfinite(lower) else grid[0]
        b = 0.5 * (grid[j] + grid[j + 1]) if j + 1 < n else min(grid[-1], upper) if np.isfinite(upper) else grid[-1]
        out.append((float(a), float(b)))
        i = j + 1
    return out


def plaus_region(model, data=None, alpha: float = 0.05, cfg: McConfig | None = None,
                 span: float = DEFAULT_SPAN, points: int = DEFAULT_POINTS, method: str = "mc") -> RegionResult:
    """Solve ``{value : pl(value) > alpha}`` for a scalar target.

    A grid of ``points`` values centred at the estimate and spanning
    ``span`` Wald half-widths on each side is evaluated; the span doubles
    until the plausibility at both ends is at most ``alpha`` or the space
    bounds are reached.  Every change of side between neighbouring grid
    points is refined by bisection.
    """
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1)")
    if points < 8:
        raise ArgumentError("region grid needs at least 8 points")
    cfg = cfg or McConfig()
    problem = bind(model, data)
    if problem.dims != 1:
        raise ArgumentError("regions are solved for scalar targets; use a contour export for more dimensions")
    lo_b, hi_b = problem.space.lower[0], problem.space.upper[0]
    center = float(problem.estimate[0])
    half = span * stats.norm.ppf(1 - alpha / 2) * problem.scale()
    # stay just inside finite bounds, where some models are degenerate
    pad = 1e-9 * max(1.0, abs(center), half)
    lo_in = lo_b + pad if np.isfinite(lo_b) else -np.inf
    hi_in = hi_b - pad if np.isfinite(hi_b) else np.inf
    counter = [0]

    def pl(v):
        counter[0] += 1
        return plausibility(problem, [v], cfg, method, index=counter[0]).estimate

    for _ in range(MAX_EXPANSIONS):
        a, b = max(center - half, lo_in), min(center + half, hi_in)
        grid = np.unique(np.append(np.linspace(a, b, points), center))
        counter[0] = 0
        vals = np.array([pl(v) for v in grid])
        left_done = vals[0] <= alpha or a <= lo_in
        right_done = vals[-1] <= alpha or b >= hi_in
        if left_done and right_done:
            break
        half *= 2.0
    truncated = not (left_done and right_done)
    tol = REL_TOL * (grid[-1] - grid[0])
    counter[0] = len(grid)

    def refine(outside, inside):
        for _ in range(BISECTION_CAP):
            if abs(inside - outside) <= tol:
                break
            mid = 0.5 * (outside + inside)
            if pl(mid) > alpha:
                inside = mid
            else:
                outside = mid
        return outside

    inside = vals > alpha
    if not inside.any():
        raise NumericError("plausibility never exceeds alpha on the grid, not even at the estimate",)
    intervals = []
    i, n = 0, len(grid)
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        if i > 0:
            lo = refine(grid[i - 1], grid[i])
        else:
            lo = lo_b if a <= lo_in else grid[0]
        if j + 1 < n:
            hi = refine(grid[j + 1], grid[j])
        else:
            hi = hi_b if b >= hi_in else grid[-1]
        intervals.append((float(lo), float(hi)))
        i = j + 1
    whole = len(intervals) == 1 and intervals[0] == (lo_b, hi_b)
    contains = any(lo <= center <= hi for lo, hi in intervals)
    return RegionResult(float(alpha), tuple(intervals), float(tol), len(grid), contains, whole, truncated,
                        method, grid, vals)
