"""Exact coverage and expected length of binomial intervals, by enumeration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..baselines import clopper_pearson
from ..engine import bind, plaus_region, plausibility
from ..errors import ArgumentError
from ..models import Binomial

MAX_N = 500


@dataclass(frozen=True)
class SweepRow:
    theta: float
    plaus_coverage: float
    cp_coverage: float
    plaus_length: float
    cp_length: float


def binomial_regions(n: int, alpha: float):
    """Exact plausibility region for every possible count ``y = 0..n``."""
    model = Binomial()
    return [plaus_region(model, Binomial.dataset(y, n), alpha, method="exact", points=128) for y in range(n + 1)]


def coverage_sweep_binomial(n: int, alpha: float = 0.05, thetas=None, regions=None) -> list[SweepRow]:
    """Exact coverage of plausibility and Clopper-Pearson intervals at each ``theta``.

    Coverage of the plausibility region uses direct membership,
    ``pl_y(theta) > alpha``, evaluated exactly for every ``y``; expected
    lengths use the solved regions.
    """
    if not 1 <= n <= MAX_N:
        raise ArgumentError(f"n must lie in [1, {MAX_N}]")
    thetas = np.linspace(0.005, 0.995, 199) if thetas is None else np.asarray(thetas, float)
    model = Binomial()
    problems = [bind(model, Binomial.dataset(y, n)) for y in range(n + 1)]
    regions = binomial_regions(n, alpha) if regions is None else regions
    plaus_len = np.array([r.length for r in regions])
    cps = [clopper_pearson(n, y, alpha) for y in range(n + 1)]
    cp_lo = np.array([c.lo for c in cps])
    cp_hi = np.array([c.hi for c in cps])
    ys = np.arange(n + 1)
    rows = []
    for th in thetas:
        pmf = stats.binom.pmf(ys, n, th)
        member = np.array([plausibility(p, [th], method="exact").estimate > alpha for p in problems])
        cp_member = (cp_lo <= th) & (th <= cp_hi)
        rows.append(SweepRow(float(th), float(pmf[member].sum()), float(pmf[cp_member].sum()),
                             float(pmf @ plaus_len), float(pmf @ (cp_hi - cp_lo))))
    return rows
