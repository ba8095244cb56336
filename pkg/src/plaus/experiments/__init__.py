"""Coverage studies and exports of curves, contours, and sensitivity tables."""

from .datasets import gamma_demo, probit_demo
from .export import (ContourResult, SensitivityResult, ellipse_misfit, export_contour, export_curve,
                     lambda0_sensitivity, polygon_area)
from .study import CoverageRow, StudySpec, coverage_csv, replicate_data, resolve_component, run_coverage
from .sweep import SweepRow, binomial_regions, coverage_sweep_binomial

__all__ = [
    "gamma_demo", "probit_demo",
    "ContourResult", "SensitivityResult", "ellipse_misfit", "export_contour", "export_curve",
    "lambda0_sensitivity", "polygon_area",
    "CoverageRow", "StudySpec", "coverage_csv", "replicate_data", "resolve_component", "run_coverage",
    "SweepRow", "binomial_regions", "coverage_sweep_binomial",
]
