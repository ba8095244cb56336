"""Coverage studies: repeated sampling at known parameter values."""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .. import streams
from ..baselines import bootstrap_percentile, clopper_pearson, correlation_interval, wald_interval
from ..engine import McConfig, bind, plaus_region, plausibility
from ..errors import ArgumentError, NumericError
from ..models import get_model
from ..models.base import MarginalModelSpec

log = logging.getLogger(__name__)

METHODS = ("mpl", "wald", "pboot", "cp", "fisher-z", "z4")
MAX_FAILURE_FRACTION = 0.01
COVERAGE_HEADER = ("method", "truth", "n", "coverage", "mean_length", "stderr", "replicates")

_POWER = re.compile(r"^\s*(?:([-+0-9.eE]+)\s*\*\s*)?n\s*\^\s*([-+0-9.eE]+)\s*$")


def resolve_component(value, n: int) -> float:
    """A truth component: a number, or ``"[c*]n^p"`` evaluated at sample size ``n``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    m = _POWER.match(text)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        return coef * float(n) ** float(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise ArgumentError(f"cannot interpret truth component {value!r}") from None


@dataclass(frozen=True)
class StudySpec:
    """Design of a coverage study.

    ``truths`` lists full parameter vectors of the simulated model; for
    marginal models coverage is about the interest component.  ``B`` is the
    bootstrap size.  ``lengths`` turns on region solves for the plausibility
    method; without it only coverage (membership of the truth) is computed.
    """

    study: str
    model: str
    truths: list
    sizes: list
    replicates: int = 1000
    alpha: float = 0.05
    methods: list = field(default_factory=lambda: ["mpl"])
    M: int = 10_000
    seed: int = 0
    B: int = 1000
    lengths: bool = False
    model_options: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if self.replicates < 100:
            raise ArgumentError("a coverage study needs at least 100 replicates")
        if not 0 < self.alpha < 1:
            raise ArgumentError("alpha must lie in (0, 1)")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ArgumentError(f"unknown methods {unknown}; choose from {METHODS}")
        if not self.truths or not self.sizes:
            raise ArgumentError("a study needs at least one truth and one sample size")
        McConfig(M=self.M)
        get_model(self.model, **self.model_options)

    @classmethod
    def from_dict(cls, d: dict) -> "StudySpec":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ArgumentError(f"unknown study fields {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ArgumentError(f"invalid study specification: {exc}") from None

    @classmethod
    def load(cls, path) -> "StudySpec":
        """Read a JSON study file; a bare name refers to a bundled study."""
        path = Path(path)
        if not path.exists():
            name = path.name if path.suffix else path.name + ".json"
            bundled = resources.files("plaus.studies") / name
            if not bundled.is_file():
                raise ArgumentError(f"study file {str(path)!r} not found")
            text = bundled.read_text()
        else:
            text = path.read_text()
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"study file is not valid JSON: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CoverageRow:
    method: str
    truth: float
    n: int
    coverage: float
    mean_length: float
    stderr: float
    replicates: int
    failures: int = 0


def _row(method, truth, n, hits, lengths, failures):
    r = len(hits)
    cov = float(np.mean(hits)) if r else float("nan")
    mean_len = float(np.mean(lengths)) if lengths else float("nan")
    return CoverageRow(method, float(truth), int(n), cov, mean_len, float(np.sqrt(cov * (1 - cov) / r)), r, failures)


def replicate_data(model, truth, n, seed, r):
    """Dataset for replicate ``r``: known constants and data from separate substreams."""
    base = model.base if isinstance(model, MarginalModelSpec) else model
    like = base.template(n, streams.substream(seed, streams.DESIGN, r))
    return base.sample(truth, n, streams.substream(seed, streams.DATA, r), like)


def _interval(method, model, data, spec, target, r, cfg):
    """``(hit, length)`` for one method on one dataset; length may be None."""
    alpha = spec.alpha
    if method == "mpl":
        problem = bind(model, data)
        hit = plausibility(problem, [target], cfg).estimate > alpha
        if not spec.lengths:
            return hit, None
        region = plaus_region(problem, alpha=alpha, cfg=cfg, points=64)
        return hit, region.length
    if method == "wald":
        iv = wald_interval(model, data, alpha)
    elif method == "pboot":
        iv = bootstrap_percentile(model, data, alpha, spec.B, streams.substream(spec.seed, streams.BOOTSTRAP, r))
    elif method == "cp":
        iv = clopper_pearson(int(data.known[0]), int(data.obs[0, 0]), alpha)
    else:
        iv = correlation_interval(method, data, alpha)
    return iv.contains(target), iv.length


def _target_index(model):
    if isinstance(model, MarginalModelSpec):
        return model.interest
    if model.space.dims != 1:
        raise ArgumentError("coverage studies need a scalar parameter or a marginal model")
    return 0


def run_coverage(spec: StudySpec, progress=None) -> list[CoverageRow]:
    """Run every (method, truth, n) cell of ``spec``.

    Replicate ``r`` uses the same data substream in every cell, so methods
    (and truths that differ only by scale) are compared on coupled data.
    On interrupt, the cells finished so far are returned.
    """
    model = get_model(spec.model, **spec.model_options)
    idx = _target_index(model)
    base = model.base if isinstance(model, MarginalModelSpec) else model
    rows = []
    try:
        for n in spec.sizes:
            for truth_spec in spec.truths:
                truth = np.array([resolve_component(v, n) for v in np.atleast_1d(truth_spec)])
                base.space.require(truth)
                target = float(truth[idx])
                hits = {m: [] for m in spec.methods}
                lens = {m: [] for m in spec.methods}
                fails = {m: 0 for m in spec.methods}
                for r in range(spec.replicates):
                    data = replicate_data(model, truth, n, spec.seed, r)
                    cfg = McConfig(M=spec.M, seed=streams.derive_seed(spec.seed, streams.REPLICATE, r))
                    for m in spec.methods:
                        try:
                            hit, length = _interval(m, model, data, spec, target, r, cfg)
                        except (ArithmeticError, ValueError) as exc:
                            fails[m] += 1
                            log.debug("replicate %d of %s failed: %s", r, m, exc)
                            continue
                        hits[m].append(bool(hit))
                        if length is not None:
                            lens[m].append(float(length))
                    if progress is not None:
                        progress(n, target, r)
                for m in spec.methods:
                    if fails[m] > MAX_FAILURE_FRACTION * spec.replicates:
                        raise NumericError(f"{m}: {fails[m]} of {spec.replicates} replicates failed "
                                           f"(truth {target}, n {n})")
                    rows.append(_row(m, target, n, hits[m], lens[m], fails[m]))
    except KeyboardInterrupt:
        log.warning("interrupted; returning %d finished rows", len(rows))
    return sorted(rows, key=lambda row: (row.method, row.truth, row.n))


def _fmt(x, full):
    if isinstance(x, (int, np.integer)) or isinstance(x, str):
        return str(x)
    return f"{x:.17g}" if full else f"{x:.6g}"


def coverage_csv(rows, full: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COVERAGE_HEADER)
    for row in rows:
        w.writerow([_fmt(getattr(row, k), full) for k in COVERAGE_HEADER])
    return buf.getvalue()
