"""Curve, contour, and nuisance-sensitivity exports."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import stats
from skimage import measure

from ..baselines import wald_ellipse
from ..engine import McConfig, WeightedCdf, bind, plausibility, statistic_sample, sup_distance
from ..errors import ArgumentError
from ..models import Dataset, GammaMean


def export_curve(model, data, grid, cfg: McConfig | None = None, method: str = "auto", overlay_mc: bool = False):
    """Plausibility on ``grid`` as an array of rows ``(theta, pl, stderr[, pl_mc, stderr_mc])``.

    With ``method='auto'`` the exact or closed-form evaluator is used when
    the model has one; ``overlay_mc`` adds Monte Carlo columns alongside.
    """
    cfg = cfg or McConfig()
    problem = bind(model, data)
    if problem.dims != 1:
        raise ArgumentError("curves need a scalar target")
    rows = []
    for i, v in enumerate(np.asarray(grid, float)):
        res = plausibility(problem, [v], cfg, method, index=i)
        row = [v, res.estimate, res.mc_stderr]
        if overlay_mc:
            mc = plausibility(problem, [v], cfg, "mc", index=i)
            row += [mc.estimate, mc.mc_stderr]
        rows.append(row)
    return np.array(rows)


def polygon_area(path) -> float:
    """Shoelace area of a closed polyline."""
    x, y = np.asarray(path, float).T
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def ellipse_misfit(path) -> float:
    """Largest relative radial deviation of ``path`` from its least-squares ellipse.

    A general conic is fitted to the (standardized) points; each point's
    Mahalanobis radius under the fitted ellipse should be 1.  Returns inf
    when the best conic is not an ellipse.
    """
    pts = np.asarray(path, float)
    mu, sd = pts.mean(axis=0), pts.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    x, y = ((pts - mu) / sd).T
    design = np.column_stack([x * x, x * y, y * y, x, y])
    coef, *_ = np.linalg.lstsq(design, np.ones_like(x), rcond=None)
    a, b, c, d, e = coef
    A = np.array([[a, b / 2], [b / 2, c]])
    if np.linalg.det(A) <= 0 or a <= 0:
        return float("inf")
    center = np.linalg.solve(2 * A, -np.array([d, e]))
    k = 1 + center @ A @ center
    if k <= 0:
        return float("inf")
    q = np.column_stack([x, y]) - center
    radius = np.sqrt(np.einsum("ni,ij,nj->n", q, A / k, q))
    return float(np.max(np.abs(radius - 1)))


@dataclass
class ContourResult:
    """Plausibility on a 2-D grid with its level set and the Wald ellipse."""

    theta1: np.ndarray
    theta2: np.ndarray
    pl: np.ndarray
    alpha: float
    levelset: list = field(default_factory=list)
    wald: np.ndarray | None = None

    @property
    def main_path(self) -> np.ndarray:
        return max(self.levelset, key=len) if self.levelset else np.empty((0, 2))

    @property
    def area(self) -> float:
        return polygon_area(self.main_path) if self.levelset else 0.0

    @property
    def wald_area(self) -> float:
        return polygon_area(self.wald) if self.wald is not None else float("nan")

    def rows(self):
        """Grid rows ``(theta1, theta2, pl)``."""
        t1, t2 = np.meshgrid(self.theta1, self.theta2, indexing="ij")
        return np.column_stack([t1.ravel(), t2.ravel(), self.pl.ravel()])


def export_contour(model, data, alpha: float, theta1, theta2, cfg: McConfig | None = None,
                   method: str = "mc", wald: bool = True) -> ContourResult:
    """Evaluate the plausibility on the grid ``theta1 x theta2`` and trace ``pl = alpha``.

    Common random numbers are forced on so the surface is smooth in the
    parameter.  The level set comes from marching squares; each path is
    returned in parameter coordinates.
    """
    cfg = (cfg or McConfig()).replace(crn=True)
    problem = bind(model, data)
    if problem.dims != 2:
        raise ArgumentError("contours need a two-dimensional parameter")
    t1, t2 = np.asarray(theta1, float), np.asarray(theta2, float)
    pl = np.array([[plausibility(problem, [a, b], cfg, method).estimate for b in t2] for a in t1])
    paths = []
    # pad with zeros so regions touching the grid edge still close
    padded = np.pad(pl, 1, constant_values=0.0)
    for c in measure.find_contours(padded, alpha):
        i, j = c[:, 0] - 1, c[:, 1] - 1
        i = np.clip(i, 0, len(t1) - 1)
        j = np.clip(j, 0, len(t2) - 1)
        paths.append(np.column_stack([np.interp(i, np.arange(len(t1)), t1), np.interp(j, np.arange(len(t2)), t2)]))
    ellipse = wald_ellipse(problem.model, data, alpha) if wald else None
    return ContourResult(t1, t2, pl, float(alpha), paths, ellipse)


@dataclass(frozen=True)
class SensitivityResult:
    """Distribution functions of T at one interest value for several nuisance values."""

    psi: float
    lambdas: tuple
    t_grid: np.ndarray
    cdfs: np.ndarray
    distances: dict
    asymptotic_distance: tuple

    @property
    def max_distance(self) -> float:
        return max(self.distances.values()) if self.distances else 0.0


def lambda0_sensitivity(psi: float, lambdas, n: int, cfg: McConfig | None = None, model=None,
                        t_grid=None) -> SensitivityResult:
    """How much the law of the profile statistic moves with the nuisance value.

    Every nuisance value reuses the same substreams, so repeating a value
    gives distance 0.  ``asymptotic_distance`` compares each law with the
    large-sample one, ``P(T <= t) = P(chi2_1 >= -2 log t)``, as a yardstick.
    """
    cfg = cfg or McConfig()
    model = model or GammaMean()
    lambdas = tuple(float(v) for v in lambdas)
    if any(not v > 0 for v in lambdas):
        raise ArgumentError("nuisance values must be positive")
    like = Dataset(np.ones(n))
    t_grid = np.linspace(0, 1, 101) if t_grid is None else np.asarray(t_grid, float)
    fs = []
    for lam in lambdas:
        vals, w = statistic_sample(model, like, model.join(psi, [lam]), cfg, index=0)
        fs.append(WeightedCdf(np.exp(vals), w))
    cdfs = np.array([f(t_grid) for f in fs])
    dist = {(i, j): sup_distance(fs[i], fs[j]) for i, j in combinations(range(len(fs)), 2)}
    ref = stats.chi2.sf(-2 * np.log(np.clip(t_grid, 1e-300, 1)), 1)
    asym = tuple(float(np.max(np.abs(c - ref))) for c in cdfs)
    return SensitivityResult(float(psi), lambdas, t_grid, cdfs, dist, asym)
