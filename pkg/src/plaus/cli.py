"""Command-line interface: ``plaus <subcommand> [options]``.

Exit codes: 0 success, 2 bad arguments/domain/capability, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .baselines import (bootstrap_percentile, clopper_pearson, fisher_z_interval, hotelling_z4_interval,
                        sample_correlation, wald_interval)
from .engine import Box, FiniteSet, McConfig, bind, pivotality_check, plaus_region, plaus_test, plausibility
from .errors import ArgumentError, CapabilityError, DomainError, NumericError
from .experiments import (StudySpec, coverage_csv, ellipse_misfit, export_contour, export_curve, gamma_demo,
                          lambda0_sensitivity, probit_demo, run_coverage)
from .models import Dataset, get_model, load_data, model_names
from .models.base import MarginalModelSpec
from . import streams

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC = 0, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> np.ndarray:
    """``lo:hi:count`` or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ArgumentError("grid must be lo:hi:count")
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 2 or not lo < hi:
            raise ArgumentError("grid needs lo < hi and count >= 2")
        return np.linspace(lo, hi, count)
    return np.array(_floats(text))


def _option_value(text):
    vals = _floats(text) if any(c in text for c in ",;") else None
    if vals is not None:
        return vals
    try:
        f = float(text)
        return int(f) if f.is_integer() and "." not in text else f
    except ValueError:
        return None if text.lower() == "none" else text


def _model(args):
    opts = {}
    for item in args.opt or []:
        if "=" not in item:
            raise ArgumentError(f"model option {item!r} is not key=value")
        k, v = item.split("=", 1)
        opts[k.strip()] = _option_value(v.strip())
    return get_model(args.model, **opts)


def _data(args, model):
    if args.data is None:
        raise ArgumentError("--data is required")
    return load_data(args.data, model)


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("PLAUS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ArgumentError(f"PLAUS_SEED must be an integer, got {env!r}") from None
    return 0


def _cfg(args) -> McConfig:
    return McConfig(M=args.M, seed=_seed(args), workers=args.workers, crn=not getattr(args, "no_crn", False))


def _meta(args, cfg: McConfig | None = None, **extra) -> dict:
    meta = {"version": __version__, "command": args.command}
    if getattr(args, "model", None):
        meta["model"] = args.model
    if cfg is not None:
        meta["config"] = cfg.to_dict()
        meta["seed"] = cfg.seed
    meta.update(extra)
    return meta


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict):
    # repr-based float formatting round-trips doubles exactly (at most 17 significant digits)
    _emit(args, json.dumps(_jsonable(payload), indent=2) + "\n")


def _fmt(x, full):
    return f"{x:.17g}" if full else f"{x:.6g}"


def _csv_text(header, rows, meta: dict, full: bool, sections=()) -> str:
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (str, int)) else _fmt(v, full) for v in row])
    for name, sec_header, sec_rows in sections:
        buf.write(f"# {name}\n")
        w.writerow(sec_header)
        for row in sec_rows:
            w.writerow([v if isinstance(v, (str, int)) else _fmt(v, full) for v in row])
    return buf.getvalue()


# -- subcommands ----------------------------------------------------------------

def cmd_eval(args) -> int:
    model = _model(args)
    data = _data(args, model)
    cfg = _cfg(args)
    method = "exact" if args.exact else args.method
    theta = _floats(args.theta)
    res = plausibility(bind(model, data), theta, cfg, method)
    payload = {"plausibility": res.estimate, "stderr": res.mc_stderr, "method": res.method,
               "M_used": res.M_used, "failed": res.failed, "theta": theta}
    payload["metadata"] = _meta(args, cfg, method_requested=method)
    _emit_json(args, payload)
    return EXIT_OK


def cmd_region(args) -> int:
    model = _model(args)
    data = _data(args, model)
    cfg = _cfg(args)
    region = plaus_region(model, data, args.alpha, cfg, span=args.span, points=args.points, method=args.method)
    if args.format == "csv":
        _emit(args, _csv_text(("lo", "hi"), region.intervals, _meta(args, cfg, alpha=args.alpha), args.full))
    else:
        _emit_json(args, {**region.to_dict(), "metadata": _meta(args, cfg)})
    return EXIT_OK


def _set_from_args(args):
    if args.point:
        return FiniteSet([_floats(p) for p in args.point])
    if args.lower is None and args.upper is None:
        raise ArgumentError("give the set with --point (repeatable) or --lower/--upper")
    lo = _floats(args.lower) if args.lower is not None else None
    hi = _floats(args.upper) if args.upper is not None else None
    dims = len(lo or hi)
    lo = lo or [-math.inf] * dims
    hi = hi or [math.inf] * dims
    return Box(lo, hi)


def cmd_test(args) -> int:
    model = _model(args)
    data = _data(args, model)
    cfg = _cfg(args)
    decision = plaus_test(model, data, _set_from_args(args), args.alpha, cfg, args.method)
    _emit_json(args, {**decision.to_dict(), "metadata": _meta(args, cfg)})
    return EXIT_OK


def cmd_curve(args) -> int:
    model = _model(args)
    data = _data(args, model)
    cfg = _cfg(args)
    grid = _grid(args.grid)
    table = export_curve(model, data, grid, cfg, args.method, args.overlay_mc)
    header = ["theta", "pl", "stderr"] + (["pl_mc", "stderr_mc"] if args.overlay_mc else [])
    if args.format == "json":
        _emit_json(args, {"columns": header, "rows": table, "metadata": _meta(args, cfg)})
    else:
        _emit(args, _csv_text(header, table.tolist(), _meta(args, cfg), args.full))
    return EXIT_OK


def cmd_contour(args) -> int:
    if args.demo:
        model = get_model("gamma2" if args.demo == "gamma" else "probit")
        data = gamma_demo() if args.demo == "gamma" else probit_demo(seed=_seed(args))
    else:
        if not args.model:
            raise ArgumentError("--model or --demo is required")
        model = _model(args)
        data = _data(args, model)
    cfg = _cfg(args)
    res = export_contour(model, data, args.alpha, _grid(args.grid1), _grid(args.grid2), cfg, args.method)
    level = [(k, *p) for k, path in enumerate(res.levelset) for p in path]
    wald = [(0, *p) for p in res.wald] if res.wald is not None else []
    meta = _meta(args, cfg, alpha=args.alpha, area=res.area, wald_area=res.wald_area,
                 ellipse_misfit=ellipse_misfit(res.main_path) if len(res.main_path) >= 6 else None)
    if args.format == "json":
        _emit_json(args, {"theta1": res.theta1, "theta2": res.theta2, "pl": res.pl, "levelset": res.levelset,
                          "wald": res.wald, "metadata": meta})
    else:
        _emit(args, _csv_text(("theta1", "theta2", "pl"), res.rows().tolist(), meta, args.full,
                              sections=[("levelset", ("path", "theta1", "theta2"), level),
                                        ("wald", ("path", "theta1", "theta2"), wald)]))
    return EXIT_OK


def cmd_coverage(args) -> int:
    spec = StudySpec.load(args.study)
    changes = {}
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.M_given:
        changes["M"] = args.M
    if args.seed is not None or "PLAUS_SEED" in os.environ:
        changes["seed"] = _seed(args)
    if args.lengths:
        changes["lengths"] = True
    if changes:
        spec = StudySpec.from_dict({**spec.to_dict(), **changes})
    rows = run_coverage(spec)
    if args.format == "json":
        _emit_json(args, {"rows": [r.__dict__ for r in rows], "metadata": _meta(args, study=spec.to_dict())})
    else:
        meta = "".join(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n"
                       for k, v in _meta(args, study=spec.to_dict()).items())
        _emit(args, meta + coverage_csv(rows, args.full))
    return EXIT_OK


def cmd_baseline(args) -> int:
    m = args.method
    if m == "cp":
        if args.n is None or args.y is None:
            raise ArgumentError("cp needs --n and --y")
        iv = clopper_pearson(args.n, args.y, args.alpha)
    elif m in ("fisher-z", "z4"):
        if args.r is not None:
            if args.n is None:
                raise ArgumentError(f"{m} with --r needs --n")
            r, n = args.r, args.n
        else:
            data = _data(args, None)
            r, n = sample_correlation(data), data.n
        iv = (fisher_z_interval if m == "fisher-z" else hotelling_z4_interval)(r, n, args.alpha)
    else:
        if not args.model:
            raise ArgumentError(f"{m} needs --model and --data")
        model = _model(args)
        data = _data(args, model)
        if m == "wald":
            iv = wald_interval(model, data, args.alpha)
        else:
            iv = bootstrap_percentile(model, data, args.alpha, args.B, streams.substream(_seed(args), streams.BOOTSTRAP))
    _emit_json(args, {**iv.to_dict(), "metadata": _meta(args, seed=_seed(args))})
    return EXIT_OK


def cmd_pivotcheck(args) -> int:
    model = _model(args)
    cfg = _cfg(args)
    base = model.base if isinstance(model, MarginalModelSpec) else model
    if args.data:
        like = _data(args, model)
    else:
        if args.n is None:
            raise ArgumentError("give --data or --n")
        like = base.template(args.n, streams.substream(cfg.seed, streams.DESIGN))
        if like is None:
            if base.name == "binomial":
                like = Dataset([[0.0]], known=[float(args.n)])
            else:
                cols = 2 if base.space.dims == 5 else 1
                like = Dataset(np.ones((args.n, cols)))
    grid = [_floats(t) for t in args.theta]
    report = pivotality_check(model, like, grid, cfg, tuple(_floats(args.q)), "exact" if args.exact else "mc")
    _emit_json(args, {**report.to_dict(), "metadata": _meta(args, cfg)})
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = _cfg(args)
    res = lambda0_sensitivity(args.psi, _floats(args.lambdas), args.n, cfg)
    if args.format == "json":
        _emit_json(args, {"psi": res.psi, "lambdas": res.lambdas, "max_distance": res.max_distance,
                          "distances": {f"{i}-{j}": d for (i, j), d in res.distances.items()},
                          "asymptotic_distance": res.asymptotic_distance, "t": res.t_grid, "cdf": res.cdfs,
                          "metadata": _meta(args, cfg)})
    else:
        header = ["t"] + [f"lambda={v:g}" for v in res.lambdas]
        rows = np.column_stack([res.t_grid, res.cdfs.T]).tolist()
        _emit(args, _csv_text(header, rows, _meta(args, cfg, max_distance=res.max_distance), args.full))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

class _MAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.M_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--M", type=int, default=50_000, action=_MAction, help="Monte Carlo size (default 50000)")
    g.add_argument("--seed", type=int, default=None, help="base seed (default: $PLAUS_SEED or 0)")
    g.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="threads for Monte Carlo chunks")
    g.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    g.add_argument("--out", default=None, help="write output to this file instead of stdout")
    g.add_argument("--full", action="store_true", help="CSV floats at 17 significant digits instead of 6")

    model_args = argparse.ArgumentParser(add_help=False)
    model_args.add_argument("--model", help=f"model id: {', '.join(model_names())}")
    model_args.add_argument("--data", help="CSV path or inline key=value,... (lists separated by ';')")
    model_args.add_argument("--opt", action="append", help="model option key=value (repeatable)")

    method_choices = ("mc", "exact", "closed", "auto")
    parser = argparse.ArgumentParser(prog="plaus", description="Plausibility-function inference.")
    parser.add_argument("--version", action="version", version=f"plaus {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common, model_args], help="plausibility of one parameter value")
    p.add_argument("--theta", required=True, help="parameter value (comma-separated for vectors)")
    p.add_argument("--exact", action="store_true", help="exact enumeration (discrete models)")
    p.add_argument("--method", choices=method_choices, default="mc")
    p.add_argument("--no-crn", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_eval, default_format="json")

    p = sub.add_parser("region", parents=[common, model_args], help="plausibility region for a scalar target")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--span", type=float, default=2.0)
    p.add_argument("--method", choices=method_choices, default="mc")
    p.set_defaults(func=cmd_region, default_format="json")

    p = sub.add_parser("test", parents=[common, model_args], help="test the assertion theta in A")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--point", action="append", help="member of a finite set A (repeatable)")
    p.add_argument("--lower", help="lower corner of a box A (omit for -inf)")
    p.add_argument("--upper", help="upper corner of a box A (omit for +inf)")
    p.add_argument("--method", choices=method_choices, default="mc")
    p.set_defaults(func=cmd_test, default_format="json")

    p = sub.add_parser("curve", parents=[common, model_args], help="plausibility curve on a grid")
    p.add_argument("--grid", required=True, help="lo:hi:count or comma-separated values")
    p.add_argument("--method", choices=method_choices, default="auto")
    p.add_argument("--overlay-mc", action="store_true", help="add Monte Carlo columns")
    p.set_defaults(func=cmd_curve, default_format="csv")

    p = sub.add_parser("contour", parents=[common, model_args], help="2-D plausibility surface and level set")
    p.add_argument("--demo", choices=("gamma", "probit"), help="use a bundled demonstration dataset")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--grid1", required=True, help="lo:hi:count for the first parameter")
    p.add_argument("--grid2", required=True, help="lo:hi:count for the second parameter")
    p.add_argument("--method", choices=method_choices, default="mc")
    p.set_defaults(func=cmd_contour, default_format="csv")

    p = sub.add_parser("coverage", parents=[common], help="run a coverage study from a JSON study file")
    p.add_argument("--study", required=True, help="study JSON path or bundled name (lindley, corr, ranef, gamma-mean)")
    p.add_argument("--replicates", type=int, default=None, help="override the replicate count")
    p.add_argument("--lengths", action="store_true", help="also solve regions for mean lengths")
    p.set_defaults(func=cmd_coverage, default_format="csv")

    p = sub.add_parser("baseline", parents=[common, model_args], help="comparison intervals")
    p.add_argument("--method", required=True, choices=("cp", "wald", "pboot", "fisher-z", "z4"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, help="sample size / trials")
    p.add_argument("--y", type=int, help="binomial count (cp)")
    p.add_argument("--r", type=float, help="sample correlation (fisher-z, z4)")
    p.add_argument("--B", type=int, default=5000, help="bootstrap size")
    p.set_defaults(func=cmd_baseline, default_format="json")

    p = sub.add_parser("pivotcheck", parents=[common, model_args], help="does the law of T depend on theta?")
    p.add_argument("--theta", action="append", required=True, help="full parameter value (repeat >= 2 times)")
    p.add_argument("--n", type=int, help="sample size when no --data is given")
    p.add_argument("--q", default="0.05,0.25,0.5,0.75,0.95", help="quantile levels")
    p.add_argument("--exact", action="store_true", help="exact enumeration (discrete models)")
    p.set_defaults(func=cmd_pivotcheck, default_format="json")

    p = sub.add_parser("sensitivity", parents=[common], help="gamma-mean: law of T across shapes")
    p.add_argument("--psi", type=float, default=1.0)
    p.add_argument("--lambdas", default="0.1,0.5,1,2,5,10")
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_sensitivity, default_format="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.M_given = getattr(args, "M_given", False)
    if args.format is None:
        args.format = args.default_format
    try:
        if getattr(args, "model", None) is None and args.func in (cmd_eval, cmd_region, cmd_test, cmd_curve,
                                                                  cmd_pivotcheck):
            raise ArgumentError("--model is required")
        return args.func(args)
    except (ArgumentError, DomainError, CapabilityError) as exc:
        print(f"plaus: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except NumericError as exc:
        print(f"plaus: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
