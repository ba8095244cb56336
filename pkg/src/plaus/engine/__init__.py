"""Plausibility estimation, regions, tests, and the pivotality diagnostic."""

from .config import CLOSED, EXACT, MONTE_CARLO, McConfig, PlausResult
from .core import (Box, FiniteSet, TestDecision, marginal_plaus_mc, mc_estimate, plaus_exact_discrete, plaus_mc,
                   plaus_set, plaus_test, plausibility)
from .pivot import PivotReport, WeightedCdf, pivotality_check, statistic_sample, sup_distance
from .problem import Problem, bind
from .region import RegionResult, intervals_from_curve, plaus_region

__all__ = [
    "CLOSED", "EXACT", "MONTE_CARLO", "McConfig", "PlausResult",
    "Box", "FiniteSet", "TestDecision", "marginal_plaus_mc", "mc_estimate", "plaus_exact_discrete", "plaus_mc",
    "plaus_set", "plaus_test", "plausibility",
    "PivotReport", "WeightedCdf", "pivotality_check", "statistic_sample", "sup_distance",
    "Problem", "bind",
    "RegionResult", "intervals_from_curve", "plaus_region",
]
