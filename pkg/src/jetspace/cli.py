"""Command-line entry point.

Subcommands: metric, whitney, select, tree, helly, experiment, schema.
Inputs are versioned JSON documents (see the schema subcommand); results
go to stdout or --out as JSON with full double precision, with any
human-readable summary on stderr.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible or degraded
result, 3 internal solver error.  Every subcommand that uses randomness
requires an explicit --seed; there is no silent clock seed.  The env var
JETS_LOG sets the log level.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import io
from .errors import (
    GenerationError,
    JetSpaceError,
    SchemaError,
    SelectionHypothesisError,
    SolverError,
)
from .harness import (
    CSV_HEADER,
    constructive_vs_optimal,
    finiteness_experiment,
    two_point_finiteness_check,
)
from .metric import chain_metric_bounds, chain_upper_bound_search, two_point_delta
from .polytopes import helly_check
from .selection import (
    bounded_constructive_selection,
    constructive_selection,
    min_lambda_selection,
    selection_feasible,
)
from .trees import build_tree
from .whitney import lipschitz_orlicz_norm

log = logging.getLogger("jetspace")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3


def _read_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError("$", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON in {path}: {exc}") from None


def _emit(payload: dict, out: str | None):
    text = io.dumps(io.document(payload))
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _summary(text: str):
    print(text, file=sys.stderr)


def _cmd_metric(args) -> int:
    ctx, jets = io.load_jets(_read_document(args.input))
    if len(jets) != 2:
        raise SchemaError("$.jets", f"the metric subcommand takes exactly two jets, got {len(jets)}")
    d_prime = two_point_delta(ctx, jets[0], jets[1])
    interval = chain_metric_bounds(ctx, jets[0], jets[1])
    heuristic = chain_upper_bound_search(
        ctx, jets[0], jets[1], max_links=args.max_links, restarts=args.restarts, seed=args.seed
    )
    _emit(
        {
            "d_prime": d_prime,
            "interval_lower": interval.lower,
            "interval_upper": interval.upper,
            "heuristic_upper": heuristic,
        },
        args.out,
    )
    return EXIT_OK


def _cmd_whitney(args) -> int:
    field = io.load_field(_read_document(args.input))
    report = lipschitz_orlicz_norm(field)
    _emit(report.to_json(), args.out)
    finite = report.to_json()["lambda_star"] is not None
    _summary(f"lambda_star = {report.lambda_star}; lo_star = {report.lo_star}")
    return EXIT_OK if finite else EXIT_INFEASIBLE


def _cmd_select(args) -> int:
    instance = io.load_instance(_read_document(args.input))
    if args.tree_degree is not None and args.constructive is None and args.bounded is None:
        raise SchemaError("$", "--tree-degree only applies to --constructive or --bounded")
    if args.seed is not None:
        log.info("select is deterministic; --seed %d recorded but unused", args.seed)
    if args.min_lambda:
        lam, result = min_lambda_selection(instance)
        _emit({"lambda_star": lam, "result": result.to_json()}, args.out)
        _summary(f"minimal scale {lam}")
        return EXIT_OK
    if args.feasibility is not None:
        result = selection_feasible(instance, args.feasibility)
        if result is None:
            _emit({"feasible": False, "lambda": args.feasibility}, args.out)
            _summary(f"infeasible at scale {args.feasibility}")
            return EXIT_INFEASIBLE
        _emit({"feasible": True, "result": result.to_json()}, args.out)
        _summary(f"feasible at scale {args.feasibility}")
        return EXIT_OK
    try:
        if args.bounded is not None:
            result = bounded_constructive_selection(instance, args.bounded, tree_degree=args.tree_degree)
        else:
            result = constructive_selection(instance, args.constructive, tree_degree=args.tree_degree)
    except SelectionHypothesisError as exc:
        _emit({"feasible": False, "certificate": exc.certificate}, args.out)
        _summary(f"hypothesis failed: {exc.certificate.get('kind')}")
        return EXIT_INFEASIBLE
    _emit({"result": result.to_json()}, args.out)
    _summary(
        f"constructive scale {result.lambda_used} "
        f"(posterior bound {result.certificate['posterior_bound']})"
    )
    return EXIT_OK


def _cmd_tree(args) -> int:
    points = io.load_tree_points(_read_document(args.input))
    tree = build_tree(
        points,
        required_degree=args.degree,
        eta_budget=args.eta_budget,
        method=args.method,
    )
    _emit(tree.to_json(), args.out)
    _summary(f"eta = {tree.eta_observed}; hub degree {tree.max_degree}")
    return EXIT_INFEASIBLE if tree.degraded else EXIT_OK


def _cmd_helly(args) -> int:
    sets = io.load_sets(_read_document(args.input))
    subset_size = args.subset_size if args.subset_size is not None else sets[0].dim_ambient + 1
    report = helly_check(sets, subset_size)
    _emit(report.to_json(), args.out)
    return EXIT_OK if report.global_intersects else EXIT_INFEASIBLE


def _cmd_experiment(args) -> int:
    cfg = io.load_experiment_config(_read_document(args.config))
    if args.csv is not None and args.mode != "finiteness":
        raise SchemaError("$", "--csv applies to the finiteness mode only")
    if args.mode == "two-point":
        _emit(two_point_finiteness_check(cfg, threads=args.threads), args.out)
        return EXIT_OK
    if args.mode == "constructive":
        _emit(constructive_vs_optimal(cfg, threads=args.threads), args.out)
        return EXIT_OK
    report = finiteness_experiment(cfg, threads=args.threads)
    _emit(report.to_json(), args.out)
    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for trial, n_used, feas, lam, gamma in report.csv_rows():
                writer.writerow(
                    [
                        trial,
                        n_used,
                        "true" if feas else "false",
                        "" if lam is None else repr(float(lam)),
                        "" if gamma is None else repr(float(gamma)),
                    ]
                )
    _summary(
        f"trials {report.trials_run}; all-subsets feasible {report.all_subsets_feasible_count}; "
        f"gamma_max {report.gamma_max}; counterexamples {len(report.counterexamples)}"
    )
    return EXIT_OK if not report.counterexamples else EXIT_INFEASIBLE


def _cmd_schema(args) -> int:
    _emit(io.schema_document(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="two-point metric value with certified interval")
    p.add_argument("input", help="JSON document with exactly two jets")
    p.add_argument("--seed", type=int, required=True, help="seed for the chain search restarts")
    p.add_argument("--max-links", type=int, default=4)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("whitney", help="field norm report: sup part, lambda_star, norm interval")
    p.add_argument("input", help="JSON document with a jet field")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_whitney)

    p = sub.add_parser("select", help="Lipschitz selection from convex sets")
    p.add_argument("input", help="JSON document with an instance")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--lambda", dest="feasibility", type=float, help="feasibility solve at this scale")
    mode.add_argument("--min-lambda", action="store_true", help="minimize the scale exactly")
    mode.add_argument("--constructive", type=float, metavar="K", help="tree-guided route at hypothesis scale K")
    mode.add_argument("--bounded", type=float, metavar="K", help="constructive route with the sup bound K enforced")
    p.add_argument("--tree-degree", type=int, help="hub degree override for the constructive routes")
    p.add_argument("--seed", type=int, help="accepted for interface symmetry; selection is deterministic")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("tree", help="low-distortion spanning tree with a high-degree hub")
    p.add_argument("input", help="JSON document with points")
    p.add_argument("--degree", type=int, help="required hub degree (default: ceil(log2 m))")
    p.add_argument("--eta-budget", type=float, help="declare the result degraded above this eta")
    p.add_argument("--method", choices=("greedy", "exhaustive"), default="greedy")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tree)

    p = sub.add_parser("helly", help="subfamily intersection check")
    p.add_argument("input", help="JSON document with sets")
    p.add_argument("--subset-size", type=int, help="subfamily size (default: ambient dimension + 1)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_helly)

    p = sub.add_parser("experiment", help="seeded finiteness experiments")
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--mode", choices=("finiteness", "two-point", "constructive"), default="finiteness")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--csv", help="per-trial gamma table (finiteness mode)")
    p.add_argument("--threads", type=int, help="worker threads (default: available parallelism)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("schema", help="print the accepted input formats")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_schema)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("JETS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SelectionHypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"solver error: {exc} {exc.report}", file=sys.stderr)
        return EXIT_SOLVER
    except JetSpaceError as exc:
        # domain misuse reads as a usage problem; anything else is internal
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
