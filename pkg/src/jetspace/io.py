"""Versioned JSON input/output for the command-line surface.

Every document carries ``"format": "jetspace/1"``.  Loaders validate
shape before any numeric work and report failures by JSON path
(``$.sets[2].A``), so a malformed file never surfaces as a solver error.
Convex sets are certified nonempty at load: emptiness is a contract
violation at the boundary, not a condition discovered mid-run.

Serialization is deterministic (sorted keys, fixed indentation, repr
floats); identical results produce identical bytes.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DomainError, InvariantError, SchemaError
from .harness import SET_FAMILIES, ExperimentConfig
from .jets import Jet, Poly, Space
from .metric import MetricCtx
from .moduli import Modulus
from .polytopes import ConvexSetSpec
from .selection import Instance
from .whitney import JetField

FORMAT = "jetspace/1"


def _expect(doc, key: str, path: str):
    if not isinstance(doc, dict):
        raise SchemaError(path, f"expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required key")
    return doc[key]


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {value!r}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {value!r}")
    return value


def _as_matrix(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected a numeric array: {exc}") from None
    if arr.ndim != 2:
        raise SchemaError(path, f"expected a 2-d array, got shape {arr.shape}")
    return arr


def _as_vector(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected a numeric array: {exc}") from None
    if arr.ndim != 1:
        raise SchemaError(path, f"expected a 1-d array, got shape {arr.shape}")
    return arr


def check_format(doc, path: str = "$"):
    tag = _expect(doc, "format", path)
    if tag != FORMAT:
        raise SchemaError(f"{path}.format", f"expected {FORMAT!r}, got {tag!r}")


def load_modulus(obj, path: str = "$.modulus") -> Modulus:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a modulus object")
    try:
        return Modulus.from_json(obj)
    except KeyError as exc:
        raise SchemaError(f"{path}.{exc.args[0]}", "missing required key") from None
    except (DomainError, TypeError, ValueError) as exc:
        raise SchemaError(path, str(exc)) from None


def load_ctx(doc, path: str = "$") -> MetricCtx:
    k = _as_int(_expect(doc, "k", path), f"{path}.k")
    n = _as_int(_expect(doc, "n", path), f"{path}.n")
    try:
        space = Space(k, n)
    except DomainError as exc:
        raise SchemaError(f"{path}.k", str(exc)) from None
    return MetricCtx(space, load_modulus(_expect(doc, "modulus", path), f"{path}.modulus"))


def _load_points(doc, ctx_n: int, path: str) -> np.ndarray:
    pts = _as_matrix(_expect(doc, "points", path), f"{path}.points")
    if pts.shape[1] != ctx_n:
        raise SchemaError(f"{path}.points", f"points have {pts.shape[1]} coordinates, expected {ctx_n}")
    return pts


def load_jets(doc) -> tuple[MetricCtx, list[Jet]]:
    """Document: format, k, n, modulus, jets: [{coeffs, base}, ...]."""
    check_format(doc)
    ctx = load_ctx(doc)
    raw = _expect(doc, "jets", "$")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("$.jets", "expected a nonempty array of jets")
    jets = []
    for i, item in enumerate(raw):
        path = f"$.jets[{i}]"
        coeffs = _as_vector(_expect(item, "coeffs", path), f"{path}.coeffs")
        base = _as_vector(_expect(item, "base", path), f"{path}.base")
        try:
            jets.append(Jet(Poly.from_coeffs(ctx.space, coeffs), tuple(base)))
        except DomainError as exc:
            raise SchemaError(path, str(exc)) from None
    return ctx, jets


def load_field(doc) -> JetField:
    """Document: format, k, n, modulus, points, polys."""
    check_format(doc)
    ctx = load_ctx(doc)
    points = _load_points(doc, ctx.space.n, "$")
    raw = _expect(doc, "polys", "$")
    if not isinstance(raw, list):
        raise SchemaError("$.polys", "expected an array of coefficient vectors")
    polys = []
    for i, item in enumerate(raw):
        coeffs = _as_vector(item, f"$.polys[{i}]")
        try:
            polys.append(Poly.from_coeffs(ctx.space, coeffs))
        except DomainError as exc:
            raise SchemaError(f"$.polys[{i}]", str(exc)) from None
    try:
        return JetField(ctx, points, tuple(polys))
    except DomainError as exc:
        raise SchemaError("$", str(exc)) from None


def load_set(obj, dim: int | None, path: str) -> ConvexSetSpec:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a set object")
    try:
        spec = ConvexSetSpec.from_json(obj)
    except KeyError as exc:
        raise SchemaError(f"{path}.{exc.args[0]}", "missing required key") from None
    except (DomainError, TypeError, ValueError) as exc:
        raise SchemaError(path, str(exc)) from None
    if dim is not None and spec.dim_ambient != dim:
        raise SchemaError(f"{path}.A", f"set lives in dimension {spec.dim_ambient}, expected {dim}")
    return spec


def _certify_set(spec: ConvexSetSpec, path: str):
    try:
        witness = spec.certify_nonempty()
    except InvariantError:
        raise SchemaError(path, "set is empty; nonemptiness is a load-time contract") from None
    if spec.declared_dim is not None:
        try:
            spec.check_declared_dim(witness)
        except InvariantError as exc:
            raise SchemaError(f"{path}.dim", str(exc)) from None


def load_instance(doc, certify: bool = True) -> Instance:
    """Document: format, k, n, modulus, points, sets."""
    check_format(doc)
    ctx = load_ctx(doc)
    points = _load_points(doc, ctx.space.n, "$")
    raw = _expect(doc, "sets", "$")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("$.sets", "expected a nonempty array of sets")
    sets = [load_set(item, ctx.space.dim, f"$.sets[{i}]") for i, item in enumerate(raw)]
    if certify:
        for i, spec in enumerate(sets):
            _certify_set(spec, f"$.sets[{i}]")
    try:
        return Instance(ctx, points, tuple(sets))
    except DomainError as exc:
        raise SchemaError("$", str(exc)) from None


def load_tree_points(doc) -> np.ndarray:
    """Document: format, points."""
    check_format(doc)
    pts = _as_matrix(_expect(doc, "points", "$"), "$.points")
    if pts.shape[0] < 2:
        raise SchemaError("$.points", "a tree needs at least two points")
    return pts


def load_sets(doc, certify: bool = True) -> list[ConvexSetSpec]:
    """Document: format, sets.  All sets must share one ambient dimension."""
    check_format(doc)
    raw = _expect(doc, "sets", "$")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("$.sets", "expected a nonempty array of sets")
    first = load_set(raw[0], None, "$.sets[0]")
    sets = [first] + [
        load_set(item, first.dim_ambient, f"$.sets[{i}]") for i, item in enumerate(raw[1:], start=1)
    ]
    if certify:
        for i, spec in enumerate(sets):
            _certify_set(spec, f"$.sets[{i}]")
    return sets


def load_experiment_config(doc) -> ExperimentConfig:
    """Document: format, k, n, ell, num_points, trials, seed, modulus,
    set_family, optional K and facets."""
    check_format(doc)
    kwargs = dict(
        k=_as_int(_expect(doc, "k", "$"), "$.k"),
        n=_as_int(_expect(doc, "n", "$"), "$.n"),
        ell=_as_int(_expect(doc, "ell", "$"), "$.ell"),
        num_points=_as_int(_expect(doc, "num_points", "$"), "$.num_points"),
        trials=_as_int(_expect(doc, "trials", "$"), "$.trials"),
        seed=_as_int(_expect(doc, "seed", "$"), "$.seed"),
        modulus=load_modulus(_expect(doc, "modulus", "$")),
        set_family=_as_str(_expect(doc, "set_family", "$"), "$.set_family"),
    )
    if "K" in doc:
        kwargs["K"] = _as_number(doc["K"], "$.K")
    if "facets" in doc:
        kwargs["facets"] = _as_int(doc["facets"], "$.facets")
    try:
        return ExperimentConfig(**kwargs)
    except DomainError as exc:
        raise SchemaError("$", str(exc)) from None


def document(payload: dict) -> dict:
    """Stamp a result payload with the format tag."""
    return {"format": FORMAT, **payload}


def dumps(payload: dict) -> str:
    """Deterministic serialization: sorted keys, two-space indent."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def schema_document() -> dict:
    """The formats accepted by every subcommand, in one machine-readable
    document; pinned by a golden-file test."""
    modulus = {
        "oneOf": [
            {"kind": "power", "p": "number in (0, 1]", "eps": "optional number >= 0", "t_cap": "optional number > 0"},
            {"kind": "pl", "knots": "array of [t, w] pairs, concave nondecreasing from (0, 0)",
             "eps": "optional number >= 0", "t_cap": "optional number > 0"},
        ]
    }
    set_spec = {
        "A": "matrix, one row per inequality",
        "b": "vector, A @ c <= b",
        "eq": "optional {A, b} with A @ c == b",
        "dim": "optional declared affine dimension, verified at load",
    }
    return {
        "format": FORMAT,
        "conventions": {
            "multiindex_order": "graded lexicographic: total order first, then lexicographic; "
            "coefficient vectors list one entry per multiindex in that order",
            "coefficients": "coeffs[a] multiplies the monomial y^a in global coordinates",
            "exit_codes": {
                "0": "success",
                "1": "usage or parse error",
                "2": "infeasible or degraded result",
                "3": "internal solver error",
            },
        },
        "subcommands": {
            "metric": {
                "input": {"format": FORMAT, "k": "integer", "n": "integer", "modulus": modulus,
                          "jets": "array of exactly two {coeffs, base}"},
                "output": "two-point value with certified chain-metric interval",
            },
            "whitney": {
                "input": {"format": FORMAT, "k": "integer", "n": "integer", "modulus": modulus,
                          "points": "matrix, one row per point", "polys": "matrix, one coefficient row per point"},
                "output": "sup part, lambda_star, norm interval, feasibility witness data",
            },
            "select": {
                "input": {"format": FORMAT, "k": "integer", "n": "integer", "modulus": modulus,
                          "points": "matrix, one row per point", "sets": [set_spec]},
                "output": "selection field with scale and certificate",
            },
            "tree": {
                "input": {"format": FORMAT, "points": "matrix, one row per point"},
                "output": "edge list, eta_observed, hub vertex, degraded flag",
            },
            "helly": {
                "input": {"format": FORMAT, "sets": [set_spec]},
                "output": "subfamily check report with witness or failing subfamily",
            },
            "experiment": {
                "input": {"format": FORMAT, "k": "integer", "n": "integer", "ell": "integer",
                          "num_points": "integer", "trials": "integer", "seed": "integer",
                          "modulus": modulus, "set_family": f"one of {list(SET_FAMILIES)}",
                          "K": "optional number; nonpositive calibrates per trial",
                          "facets": "integer, random_polytopes only"},
                "output": "finiteness report; optional CSV (trial, N_used, subsets_feasible, lambda_global, gamma)",
            },
            "schema": {"input": {}, "output": "this document"},
        },
    }
