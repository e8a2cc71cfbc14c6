"""Command-line front end.

Subcommands: ``attribute``, ``game``, ``decompose``, ``axioms``, ``classify``.
Exit status is 0 on success, 2 for configuration errors and 3 for numeric
failures; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cad import check_idempotence, check_separability, full_decomposition, minimal_dependency_structure
from .coalition import Coalition, Permutation
from .config import (
    ConfigError,
    load_aggregation,
    load_behaviour,
    load_dataset,
    load_gaussian,
    load_json_arg,
    load_method,
    load_removal,
)
from .exprfn import ExprDomainError, ExprSyntaxError, FunctionModel
from .game import permuted_game
from .indices import classify_aggregation
from .rbam import (
    AGGREGATION_PRESETS,
    METHOD_PRESETS,
    Method,
    aggregation_preset,
    attributions,
    check_functional_axiom,
    check_internal_consistency,
    pointwise_game,
    preset,
)
from .removal import OLSLearner

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_common(p: argparse.ArgumentParser, *, method: bool = True) -> None:
    p.add_argument("--fn", required=True, help='expression in x1..xd, or "ols" to fit least squares on --data')
    p.add_argument("--d", type=int, help="input dimension (inferred from --data when omitted)")
    p.add_argument("--data", help="CSV with header x1..xd[,y]")
    p.add_argument("--points", help="evaluation points: inline JSON list of rows, a JSON file or a CSV file")
    p.add_argument("--removal", help="removal config as JSON text or a path to a JSON file")
    p.add_argument("--behaviour", help="behaviour config as JSON text or a path to a JSON file")
    p.add_argument("--gaussian", help='Gaussian spec {"mean": [...], "cov": [[...]]} as JSON text or path')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, help="Monte Carlo samples for expectation-based removal")
    p.add_argument("--exact", action="store_true", help="enumerate finite reference supports exactly")
    p.add_argument("--out", help="output file (default: standard output)")
    if method:
        p.add_argument("--method", help="method config as JSON text or a path to a JSON file")
        p.add_argument("--preset", help="preset name: " + ", ".join(sorted(set(AGGREGATION_PRESETS + METHOD_PRESETS))))
        p.add_argument("--order", type=int, help="interaction order k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbamkit", description="Removal-based attribution workbench")
    parser.add_argument("--version", action="version", version=f"rbamkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attribute", help="attributions at each evaluation point")
    _add_common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("game", help="pointwise cooperative game at one point")
    _add_common(p, method=False)
    p.add_argument("--permute", help="permutation such as 2,1,3 applied to the emitted game")

    p = sub.add_parser("decompose", help="decomposition components on a grid")
    _add_common(p, method=False)
    p.add_argument("--mds", action="store_true", help="report the minimal dependency structure")

    p = sub.add_parser("axioms", help="functional axiom and consistency checks")
    _add_common(p)
    p.add_argument("--axiom", required=True,
                   choices=("null", "dummy", "symmetry", "anonymity", "consistency", "idempotence", "separability"))
    p.add_argument("--var", type=int, help="declared variable i")
    p.add_argument("--pair", help="declared symmetric pair i,j")
    p.add_argument("--perm", help="permutation such as 2,3,1")

    p = sub.add_parser("classify", help="taxonomy labels of an aggregation scheme")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--preset", help="aggregation preset name")
    p.add_argument("--coeffs", help="aggregation config as JSON text or a path to a JSON file")
    p.add_argument("--order", type=int)
    p.add_argument("--out")
    return parser


def _dimension(args, data) -> int:
    if args.d is not None:
        if data is not None and data.d != args.d:
            raise ConfigError(f"--d {args.d} disagrees with dataset dimension {data.d}")
        return args.d
    if data is not None:
        return data.d
    raise ConfigError("--d is required without --data")


def _load_points(text: str | None, d: int) -> list[list[float]]:
    if text is None:
        raise ConfigError("--points is required")
    if text.strip().endswith(".csv") and Path(text.strip()).exists():
        rows = load_dataset(text.strip(), has_label=False).X.tolist()
    else:
        rows = load_json_arg(text)
        if isinstance(rows, list) and rows and not isinstance(rows[0], list):
            rows = [rows]
    if not isinstance(rows, list) or not rows:
        raise ConfigError("--points must be a non-empty list of rows")
    out = []
    for r in rows:
        if not isinstance(r, list) or len(r) != d:
            raise ConfigError(f"point {r!r} does not have {d} coordinates")
        try:
            out.append([float(v) for v in r])
        except (TypeError, ValueError):
            raise ConfigError(f"non-numeric point {r!r}") from None
    return out


def _model(args, d: int, data) -> FunctionModel:
    if args.fn == "ols":
        if data is None or data.y is None:
            raise ConfigError('--fn ols needs --data with a y column')
        return OLSLearner().fit_model(data)
    try:
        return FunctionModel.from_expression(args.fn, d)
    except ExprSyntaxError as exc:
        raise ConfigError(f"--fn: {exc}") from None


def _removal(args, d: int, data):
    overrides = {"mc_samples": args.samples, "seed": args.seed, "exact": True if args.exact else None}
    if args.removal:
        return load_removal(load_json_arg(args.removal), d, **overrides)
    return load_removal({"kind": "anchored", "baseline": [0.0] * d}, d, **overrides)


def _method(args, d: int, data) -> Method:
    if args.method and args.preset:
        raise ConfigError("give either --method or --preset, not both")
    if args.method:
        overrides = {"mc_samples": args.samples, "seed": args.seed, "exact": True if args.exact else None}
        doc = load_json_arg(args.method)
        if args.order is not None:
            doc = {**doc, "order": args.order}
        return load_method(doc, d, **overrides)
    if not args.preset:
        raise ConfigError("one of --method or --preset is required")
    gaussian = load_gaussian(load_json_arg(args.gaussian)) if args.gaussian else None
    behaviour = load_behaviour(load_json_arg(args.behaviour), d) if args.behaviour else None
    removal = _removal(args, d, data) if (args.removal or args.preset in AGGREGATION_PRESETS) else None
    try:
        return preset(args.preset, d, data=data, gaussian=gaussian, removal=removal, behaviour=behaviour,
                      order=args.order, mc_samples=args.samples or 1024, seed=args.seed,
                      exact=True if args.exact or args.samples is None else False)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config_hash(args) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "threads")}
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode("utf-8")).hexdigest()


def _emit(args, doc: dict | str) -> None:
    text = doc if isinstance(doc, str) else json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _meta(args) -> dict:
    return {"config_hash": _config_hash(args), "version": __version__}


def cmd_attribute(args) -> None:
    data = load_dataset(args.data) if args.data else None
    d = _dimension(args, data)
    f = _model(args, d, data)
    method = _method(args, d, data)
    points = _load_points(args.points, d)
    report = attributions(method, f, points, seed=args.seed, threads=max(1, args.threads))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_index", "coalition", "value"])
        for k, row in enumerate(report.points):
            for key, val in row["attributions"].items():
                w.writerow([k, key, repr(float(val))])
        _emit(args, buf.getvalue())
        return
    _emit(args, {**report.to_dict(), **_meta(args)})


def cmd_game(args) -> None:
    data = load_dataset(args.data) if args.data else None
    d = _dimension(args, data)
    f = _model(args, d, data)
    points = _load_points(args.points, d)
    if len(points) != 1:
        raise ConfigError("game needs exactly one point")
    behaviour = load_behaviour(load_json_arg(args.behaviour), d) if args.behaviour else load_behaviour(None, d)
    v = pointwise_game(behaviour, _removal(args, d, data), f, points[0])
    if args.permute:
        try:
            v = permuted_game(Permutation.parse(args.permute), v)
        except ValueError as exc:
            raise ConfigError(f"--permute: {exc}") from None
    _emit(args, {"d": v.d, "values": v.to_dict(), "x": points[0], **_meta(args)})


def cmd_decompose(args) -> None:
    data = load_dataset(args.data) if args.data else None
    d = _dimension(args, data)
    f = _model(args, d, data)
    doc = _meta(args)
    if args.mds:
        mds = minimal_dependency_structure(f, seed=args.seed)
        doc["mds"] = mds.as_lists()
    if args.points or not args.mds:
        grid = _load_points(args.points, d)
        table = full_decomposition(_removal(args, d, data), f, seed=args.seed)
        doc.update(json.loads(table.to_json(grid)))
    _emit(args, doc)


def _report_doc(report) -> dict:
    return {"passed": bool(report.passed), "max_deviation": float(report.max_deviation), "witness": report.witness}


def cmd_axioms(args) -> None:
    data = load_dataset(args.data) if args.data else None
    d = _dimension(args, data)
    f = _model(args, d, data)
    points = _load_points(args.points, d) if args.points else None
    doc = {"axiom": args.axiom, **_meta(args)}
    if args.axiom in ("idempotence", "separability"):
        family = _removal(args, d, data)
        check = check_idempotence if args.axiom == "idempotence" else check_separability
        report = check(family, f, points=points, seed=args.seed)
        doc.update(_report_doc(report))
        _emit(args, doc)
        return
    method = _method(args, d, data)
    if args.axiom == "consistency":
        if points is None:
            raise ConfigError("consistency check needs --points")
        results = []
        for x in points:
            rep = check_internal_consistency(method, f, x)
            results.append({"x": x, "passed": rep.passed, "sign_flip_holds": rep.sign_flip_holds,
                            "locally_independent": rep.locally_independent,
                            "dependence_witness": {str(k): v for k, v in rep.dependence_witness.items()},
                            "attributions": rep.attributions})
        doc.update({"passed": all(r["passed"] for r in results), "points": results})
        _emit(args, doc)
        return
    kwargs = {}
    if args.var is not None:
        kwargs["i"] = args.var
    if args.pair:
        try:
            i, j = (int(t) for t in args.pair.split(","))
        except ValueError:
            raise ConfigError(f"--pair must look like 1,2, got {args.pair!r}") from None
        kwargs.update(i=i, j=j)
    if args.perm:
        try:
            kwargs["pi"] = Permutation.parse(args.perm)
        except ValueError as exc:
            raise ConfigError(f"--perm: {exc}") from None
    try:
        report = check_functional_axiom(method, args.axiom, f, points=points, seed=args.seed, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    doc.update(_report_doc(report))
    _emit(args, doc)


def cmd_classify(args) -> None:
    if args.preset and args.coeffs:
        raise ConfigError("give either --preset or --coeffs, not both")
    if args.preset:
        try:
            scheme = aggregation_preset(args.preset, args.d, order=args.order)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif args.coeffs:
        scheme = load_aggregation(load_json_arg(args.coeffs), args.d, args.order)
    else:
        raise ConfigError("one of --preset or --coeffs is required")
    try:
        labels = classify_aggregation(scheme, args.d)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _emit(args, {"labels": sorted(labels), "d": args.d, "order": scheme.order, **_meta(args)})


COMMANDS = {
    "attribute": cmd_attribute,
    "game": cmd_game,
    "decompose": cmd_decompose,
    "axioms": cmd_axioms,
    "classify": cmd_classify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ExprDomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"rbamkit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ExprSyntaxError, ValueError, OSError) as exc:
        print(f"rbamkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
