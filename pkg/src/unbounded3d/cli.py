"""Command-line interface: reproducible reports and trajectory exports.

Sub-commands::

    unbounded3d zoo list
    unbounded3d analyze         (--system ID | --file PATH) [--param k=v ...]
    unbounded3d degree          (--system ID | --file PATH) [--radius R] [--method M]
    unbounded3d check-theorem   (--system ID | --file PATH) [--component i] [--branched]
    unbounded3d trace           (--system ID | --file PATH) [--equilibrium k] [--t-max T]
    unbounded3d sweep-connection [--c-min A] [--c-max B] [--step H] [--tol TOL]

Common flags: ``--json PATH`` (``-`` for stdout), ``--csv-dir DIR``, ``--seed N``.

Exit codes: 0 success, 1 analysis failure or inconclusive result, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .equilibria import Equilibrium, find_equilibria
from .level_sets import LevelSetError, level_set_analysis
from .manifolds import (BOUNDED_MAXTIME, ManifoldError, NoSignChangeError, find_connection,
                        michelson_family, trace_1d_manifolds)
from .polyfield import (ParameterRangeError, ParseError, PolyVectorField, UnknownSystemError,
                        parse_system, zoo, zoo_entry, zoo_ids)
from .sphere_degree import DegreeError, index_at_infinity, sphere_map_degree
from .theorem import (PASS, PredictionError, check_hypotheses, default_search_box,
                      predict_structure, verify_prediction)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON helpers


def jsonable(obj):
    """Plain-JSON copy: numpy scalars/arrays converted, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True)


def _emit(report: dict, json_path: str | None) -> None:
    text = dumps(report)
    if json_path == "-":
        sys.stdout.write(text + "\n")
    elif json_path:
        Path(json_path).write_text(text + "\n")


# ---------------------------------------------------------------------------
# system loading


def _parse_params(items: Sequence[str]) -> dict[str, float]:
    params = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"--param {k}: {v!r} is not a number") from None
    return params


def load_system(args) -> tuple[PolyVectorField, dict]:
    params = _parse_params(args.param)
    if bool(args.system) == bool(args.file):
        raise UsageError("give exactly one of --system or --file")
    if args.system:
        try:
            f = zoo(args.system, params)
        except (UnknownSystemError, ParameterRangeError) as exc:
            raise UsageError(str(exc.args[0] if exc.args else exc)) from None
        entry = zoo_entry(args.system)
        desc = {"source": "zoo", "id": args.system, "parameters": dict(f.parameters),
                "description": entry.description, "default_component": entry.component}
    else:
        try:
            text = Path(args.file).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
        try:
            f = parse_system(text, params, name="custom")
        except ParseError as exc:
            raise UsageError(f"{args.file}: {exc}") from None
        desc = {"source": "file", "path": str(args.file), "parameters": dict(f.parameters),
                "default_component": 1}
    desc["equations"] = [c.to_expr() for c in f.components]
    return f, desc


def _box(args, f: PolyVectorField) -> tuple:
    if getattr(args, "box", None):
        return ((-args.box, args.box),) * 3
    return default_search_box(f)


def _component(args, desc) -> int:
    i = args.component if args.component is not None else desc["default_component"]
    if i not in (1, 2, 3):
        raise UsageError("--component must be 1, 2 or 3")
    return i


def _base_report(command: str, args, desc: dict | None = None) -> dict:
    rep = {"schema_version": SCHEMA_VERSION, "tool_version": __version__,
           "command": command, "seed": args.seed, "wall_time": {}}
    if desc is not None:
        rep["system"] = desc
    return rep


class _Timer:
    def __init__(self, report):
        self.report = report

    def __call__(self, phase):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                timer.report["wall_time"][phase] = time.perf_counter() - self.t
                return False

        return _Ctx()


def _export_traces(csv_dir, f, name, traces) -> list[str]:
    if not csv_dir:
        return []
    out = Path(csv_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, tr in traces:
        p = out / f"{name}_eq{k}_{tr.branch}.csv"
        tr.trajectory.to_csv(p, f)
        paths.append(str(p))
    return paths


def divergence_summary(f: PolyVectorField, box) -> dict:
    div = f.divergence()
    if div.is_zero():
        return {"polynomial": "0", "sign": "zero", "sampled": False}
    if div.is_constant():
        c = div.constant_value()
        return {"polynomial": div.to_expr(), "sign": "positive" if c > 0 else "negative",
                "sampled": False}
    axes = [np.linspace(a, b, 21) for a, b in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    v = div.evaluate(pts)
    pos, neg = int(np.sum(v > 0)), int(np.sum(v < 0))
    sign = "mixed" if pos and neg else "positive" if pos else "negative" if neg else "zero"
    return {"polynomial": div.to_expr(), "sign": sign, "sampled": True,
            "positive_samples": pos, "negative_samples": neg, "samples": len(pts)}


# ---------------------------------------------------------------------------
# sub-commands


def cmd_zoo(args) -> int:
    if args.action != "list":
        raise UsageError(f"unknown zoo action {args.action!r}")
    systems = []
    for sid in zoo_ids():
        e = zoo_entry(sid)
        systems.append({"id": sid, "description": e.description,
                        "parameters": dict(e.defaults), "component": e.component,
                        "validity": {k: d for k, (d, _) in e.validity.items()}})
        if not args.json:
            params = ", ".join(f"{k}={v:g}" for k, v in e.defaults.items())
            print(f"{sid:18s} {params:20s} {e.description}")
    rep = _base_report("zoo list", args)
    rep["systems"] = systems
    _emit(rep, args.json)
    return EXIT_OK


def _equilibria_dict(eqs: Sequence[Equilibrium]) -> list[dict]:
    return [e.to_dict() for e in eqs]


def cmd_analyze(args) -> int:
    f, desc = load_system(args)
    i = _component(args, desc)
    box = _box(args, f)
    rep = _base_report("analyze", args, desc)
    timed = _Timer(rep)
    rep["component"] = i
    inconclusive, failures = [], []
    with timed("equilibria"):
        eqs = find_equilibria(f, box)
    rep["equilibria"] = _equilibria_dict(eqs)
    with timed("index_at_infinity"):
        try:
            ind = index_at_infinity(f, eqs, rng_seed=args.seed)
            rep["index_at_infinity"] = ind.to_dict()
            if not ind.stable:
                inconclusive.append("index at infinity not stable across radii")
        except (DegreeError, ValueError) as exc:
            rep["index_at_infinity"] = {"error": str(exc)}
            inconclusive.append("index at infinity failed")
    with timed("divergence"):
        rep["divergence"] = divergence_summary(f, box)
    with timed("level_sets"):
        try:
            rep["level_sets"] = level_set_analysis(f, i, box, equilibria=eqs).to_dict()
        except LevelSetError as exc:
            rep["level_sets"] = {"error": str(exc)}
    with timed("hypotheses"):
        hyp = check_hypotheses(f, i, search_box=box, equilibria=eqs, rng_seed=args.seed)
    rep["hypotheses"] = hyp.to_dict()
    rep["prediction"] = None
    rep["verification"] = None
    with timed("prediction"):
        try:
            pred = predict_structure(f, i, hyp)
            rep["prediction"] = pred.to_dict()
        except PredictionError as exc:
            pred = None
            rep["prediction_error"] = str(exc)
            failures.append(str(exc))
    if pred is not None:
        with timed("verification"):
            try:
                ver = verify_prediction(f, pred, t_max=args.t_max)
                rep["verification"] = ver.to_dict()
                if ver.inconclusive:
                    inconclusive.append("all traced branches bounded at t_max")
                elif not ver.verified:
                    failures.extend(ver.notes or ["prediction not verified"])
                _export_traces(args.csv_dir, f, desc.get("id", "custom"),
                               [(k, t) for k, t in enumerate(ver.traces)])
            except PredictionError as exc:
                rep["verification"] = {"error": str(exc)}
                inconclusive.append("verification failed")
    rep["inconclusive"] = inconclusive
    rep["failures"] = failures
    _emit(rep, args.json)
    if not args.json or args.json != "-":
        _summary_analyze(rep)
    return EXIT_FAIL if inconclusive or failures else EXIT_OK


def _summary_analyze(rep: dict) -> None:
    ind = rep.get("index_at_infinity", {})
    print(f"equilibria: {len(rep['equilibria'])}")
    print(f"index at infinity: {ind.get('index')} (stable={ind.get('stable')})")
    print(f"hypotheses (component {rep['component']}): {rep['hypotheses']['verdict']}"
          + (f", failed {rep['hypotheses']['failed']}" if rep['hypotheses']['failed'] else ""))
    ver = rep.get("verification")
    if isinstance(ver, dict) and "verified" in ver:
        print(f"verification: verified={ver['verified']} "
              f"unknot_certified={ver['unknot_certified']} path={ver['path']}")


def cmd_degree(args) -> int:
    f, desc = load_system(args)
    box = _box(args, f)
    rep = _base_report("degree", args, desc)
    timed = _Timer(rep)
    with timed("equilibria"):
        eqs = find_equilibria(f, box)
    try:
        with timed("degree"):
            if args.radius is not None:
                d = sphere_map_degree(f, args.radius, method=args.method, rng_seed=args.seed,
                                      equilibria=eqs)
                rep["degree"] = d.to_dict()
                ok = d.conclusive
                if not args.json or args.json != "-":
                    print(f"degree at r={args.radius:g} ({args.method}): {d.degree} "
                          f"conclusive={d.conclusive}")
            else:
                ind = index_at_infinity(f, eqs, rng_seed=args.seed)
                rep["index_at_infinity"] = ind.to_dict()
                ok = ind.stable
                if not args.json or args.json != "-":
                    print(f"index at infinity: {ind.index} (stable={ind.stable})")
    except (DegreeError, ValueError) as exc:
        rep["error"] = str(exc)
        _emit(rep, args.json)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(rep, args.json)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_theorem(args) -> int:
    f, desc = load_system(args)
    i = _component(args, desc)
    box = _box(args, f)
    rep = _base_report("check-theorem", args, desc)
    timed = _Timer(rep)
    rep["component"] = i
    with timed("hypotheses"):
        hyp = check_hypotheses(f, i, search_box=box, rng_seed=args.seed)
    rep["hypotheses"] = hyp.to_dict()
    diagnostics = []
    rep["prediction"] = None
    rep["verification"] = None
    code = EXIT_OK
    if hyp.verdict != PASS:
        diagnostics.append(f"hypotheses fail: {', '.join(hyp.failed)}")
        if hyp.branched_path_applicable:
            diagnostics.append("only the topology of the tangency curve fails: the branched "
                               "analysis path applies (rerun with --branched)")
    run = hyp.verdict == PASS or (args.branched and hyp.branched_path_applicable)
    if run:
        try:
            with timed("prediction"):
                pred = predict_structure(f, i, hyp, allow_branched=args.branched)
            rep["prediction"] = pred.to_dict()
            with timed("verification"):
                ver = verify_prediction(f, pred, t_max=args.t_max)
            rep["verification"] = ver.to_dict()
            diagnostics.extend(ver.notes)
            _export_traces(args.csv_dir, f, desc.get("id", "custom"),
                           [(k, t) for k, t in enumerate(ver.traces)])
            if not ver.verified:
                code = EXIT_FAIL
        except PredictionError as exc:
            diagnostics.append(str(exc))
            code = EXIT_FAIL
    if hyp.verdict != PASS and not (run and code == EXIT_OK):
        code = EXIT_FAIL
    rep["diagnostics"] = diagnostics
    _emit(rep, args.json)
    if not args.json or args.json != "-":
        print(f"hypotheses: {hyp.verdict}")
        for d in diagnostics:
            print(f"  {d}")
        if rep["verification"]:
            v = rep["verification"]
            print(f"verified={v['verified']} unknot_certified={v['unknot_certified']}")
    return code


def cmd_trace(args) -> int:
    f, desc = load_system(args)
    box = _box(args, f)
    rep = _base_report("trace", args, desc)
    timed = _Timer(rep)
    with timed("equilibria"):
        eqs = find_equilibria(f, box)
    if args.equilibrium is not None and not 0 <= args.equilibrium < len(eqs):
        raise UsageError(f"--equilibrium must be in [0, {len(eqs) - 1}]")
    chosen = range(len(eqs)) if args.equilibrium is None else [args.equilibrium]
    traces, skipped = [], []
    with timed("tracing"):
        for k in chosen:
            try:
                for tr in trace_1d_manifolds(f, eqs[k], args.eps, args.t_max, eqs):
                    traces.append((k, tr))
            except ManifoldError as exc:
                skipped.append({"equilibrium": k, "reason": str(exc)})
    rep["equilibria"] = _equilibria_dict(eqs)
    rep["traces"] = [{"equilibrium_index": k, **tr.to_dict()} for k, tr in traces]
    rep["skipped"] = skipped
    rep["csv"] = _export_traces(args.csv_dir, f, desc.get("id", "custom"), traces)
    rep["inconclusive"] = [f"eq{k} {tr.branch}: bounded at t_max={args.t_max:g}"
                           for k, tr in traces if tr.status == BOUNDED_MAXTIME]
    if not traces:
        rep["inconclusive"].append("no traceable equilibrium")
    _emit(rep, args.json)
    if not args.json or args.json != "-":
        for k, tr in traces:
            signs = ", ".join(f"F{c}:{r.value}" for c, r in tr.signs.items())
            print(f"eq{k} {tr.branch:5s} {tr.stability:8s} {tr.status:16s} {signs}")
    if not traces or any(tr.status == BOUNDED_MAXTIME for _, tr in traces):
        return EXIT_FAIL
    return EXIT_OK


def cmd_sweep_connection(args) -> int:
    rep = _base_report("sweep-connection", args,
                       {"source": "zoo", "id": "michelson", "parameters": {"c": "swept"}})
    timed = _Timer(rep)
    if not args.c_min < args.c_max or args.step <= 0:
        raise UsageError("need c-min < c-max and step > 0")
    try:
        with timed("sweep"):
            cert = find_connection(michelson_family, (args.c_min, args.c_max), args.step,
                                   args.tol, t_max=args.t_max)
    except (NoSignChangeError, ManifoldError) as exc:
        rep["error"] = str(exc)
        _emit(rep, args.json)
        print(f"no connection: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rep["connection"] = cert.to_dict()
    _emit(rep, args.json)
    if not args.json or args.json != "-":
        print(f"c* = {cert.c_star:.12g}  bracket {cert.final_bracket}  "
              f"distance {cert.distance:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unbounded3d",
                                description="Unbounded invariant manifolds of 3D polynomial flows")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", help="zoo system id (see 'zoo list')")
            sp.add_argument("--file", help="system-definition file")
            sp.add_argument("--param", action="append", default=[], metavar="K=V",
                            help="parameter override (repeatable)")
            sp.add_argument("--box", type=float, default=None,
                            help="half-width of the equilibrium search box")
        sp.add_argument("--json", default=None, metavar="PATH",
                        help="write the JSON report to PATH ('-' for stdout)")
        sp.add_argument("--csv-dir", default=None, help="export trajectories as CSV here")
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    zp = sub.add_parser("zoo", help="built-in systems")
    zp.add_argument("action", choices=["list"])
    common(zp, system=False)
    zp.set_defaults(func=cmd_zoo)

    ap = sub.add_parser("analyze", help="full report for one system")
    common(ap)
    ap.add_argument("--component", type=int, default=None)
    ap.add_argument("--t-max", type=float, default=200.0)
    ap.set_defaults(func=cmd_analyze)

    dp = sub.add_parser("degree", help="sphere-map degree / index at infinity")
    common(dp)
    dp.add_argument("--radius", type=float, default=None)
    dp.add_argument("--method", choices=["regular_value", "omitted_direction"],
                    default="regular_value")
    dp.set_defaults(func=cmd_degree)

    cp = sub.add_parser("check-theorem", help="hypotheses, prediction and verification")
    common(cp)
    cp.add_argument("--component", type=int, default=None)
    cp.add_argument("--t-max", type=float, default=200.0)
    cp.add_argument("--branched", action="store_true",
                    help="run the branched path when only the topology of l fails")
    cp.set_defaults(func=cmd_check_theorem)

    tp = sub.add_parser("trace", help="trace 1D invariant manifolds")
    common(tp)
    tp.add_argument("--equilibrium", type=int, default=None)
    tp.add_argument("--eps", type=float, default=None)
    tp.add_argument("--t-max", type=float, default=200.0)
    tp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("sweep-connection", help="heteroclinic shooting in the Michelson family")
    common(sp, system=False)
    sp.add_argument("--c-min", type=float, default=0.2)
    sp.add_argument("--c-max", type=float, default=2.0)
    sp.add_argument("--step", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--t-max", type=float, default=200.0)
    sp.set_defaults(func=cmd_sweep_connection)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2 already
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
