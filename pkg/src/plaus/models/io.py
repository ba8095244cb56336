"""Reading datasets from CSV files and from the inline ``key=value`` syntax."""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from ..errors import ArgumentError
from .base import Dataset

# column names holding known per-unit constants rather than observations
KNOWN_COLUMNS = ("sigma", "trials")


def _floats(values, where):
    try:
        return [float(v) for v in values]
    except ValueError as exc:
        raise ArgumentError(f"non-numeric value in {where}: {exc}") from None


def from_columns(columns: dict[str, list[float]], model=None) -> Dataset:
    """Assemble a dataset from named columns.

    ``x_*`` columns become the design, ``sigma``/``trials`` the known
    constants, and everything else an observation column in the given order.
    """
    if not columns:
        raise ArgumentError("no data columns given")
    lengths = {len(v) for v in columns.values()}
    if model is not None and getattr(_base(model), "name", "") == "binomial":
        return _binomial(columns)
    if len(lengths) != 1:
        raise ArgumentError("all data columns must have the same length")
    design = [v for k, v in columns.items() if k.startswith("x_")]
    known = [v for k, v in columns.items() if k in KNOWN_COLUMNS]
    obs = [v for k, v in columns.items() if not k.startswith("x_") and k not in KNOWN_COLUMNS]
    if not obs:
        raise ArgumentError("data has no observation column")
    if len(known) > 1:
        raise ArgumentError("at most one known-constant column is allowed")
    return Dataset(np.column_stack(obs),
                   design=np.column_stack(design) if design else None,
                   known=np.asarray(known[0]) if known else None)


def _base(model):
    return getattr(model, "base", model)


def _binomial(columns):
    trials = columns.get("n", columns.get("trials"))
    y = columns.get("y")
    if trials is None or y is None or len(trials) != 1 or len(y) != 1:
        raise ArgumentError("binomial data is given as n=<trials>,y=<successes>")
    return Dataset([[y[0]]], known=[trials[0]])


def parse_inline(text: str, model=None) -> Dataset:
    """Parse ``key=value,...``; list values are separated by ``;`` or spaces.

    Example: ``y=1.2;0.4;2.2,sigma=1;1;2``.
    """
    columns: dict[str, list[float]] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ArgumentError(f"inline data entry {part!r} is not key=value")
        key, value = (s.strip() for s in part.split("=", 1))
        items = [v for v in re.split(r"[;\s]+", value) if v]
        if not key or not items:
            raise ArgumentError(f"inline data entry {part!r} is empty")
        columns[key] = _floats(items, f"inline entry {key!r}")
    return from_columns(columns, model)


def read_csv(path, model=None) -> Dataset:
    """Read a CSV file with a header row, one column per variable."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc}") from None
    if len(rows) < 2:
        raise ArgumentError(f"{path} needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ArgumentError(f"{path} has duplicate column names")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ArgumentError(f"{path} has rows of unequal length")
    columns = {h: _floats([r[j] for r in body], f"column {h!r}") for j, h in enumerate(header)}
    return from_columns(columns, model)


def load_data(spec: str, model=None) -> Dataset:
    """Inline data when ``spec`` contains ``=``, otherwise a CSV path."""
    if "=" in spec and not Path(spec).exists():
        return parse_inline(spec, model)
    return read_csv(spec, model)


def write_csv(data: Dataset, path, names=None):
    """Write ``data`` in the format :func:`read_csv` accepts."""
    obs_names = list(names or (["y"] if data.obs.shape[1] == 1 else [f"y{j + 1}" for j in range(data.obs.shape[1])]))
    cols = [data.obs[:, j] for j in range(data.obs.shape[1])]
    if data.design is not None:
        obs_names += [f"x_{j + 1}" for j in range(data.design.shape[1])]
        cols += [data.design[:, j] for j in range(data.design.shape[1])]
    if data.known is not None:
        obs_names.append("sigma")
        cols.append(data.known)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(obs_names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
