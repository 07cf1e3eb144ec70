"""Lipschitz selection from convex sets of polynomials over a finite set.

Everything reduces to linear programs over the stacked coefficient vectors
{c_x}: set membership is linear, and for a fixed scale the pairwise
compatibility condition

    |D^a(c_i - c_j)(x)| <= scale * ||x_i - x_j||**(k-|a|) * w(||x_i - x_j||)

splits into two linear rows per derivative row and evaluation point.  The
scale can also enter as one extra LP variable, which makes the minimal
selection constant a single solve.

The constructive algorithm mirrors the inductive existence proof: a
low-distortion tree with a high-degree hub, per-neighbor subtree systems
at scale e**n * K, hub links minimized jointly and checked against the
ceiling 3**(k+1) * e**(3n) * K, then recursion into the subtrees with the
neighbor polynomials pinned.  Its output is verified a posteriori rather
than trusted from the analysis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvariantError, ModelingError, SelectionHypothesisError, SolverError
from .jets import Poly
from .lp import FEAS_TOL, solve_lp, solve_lp_exact
from .metric import MetricCtx
from .polytopes import ConvexSetSpec
from .trees import build_tree
from .whitney import JetField, wg_lambda_star, wg_sup_part

_DISTINCT_TOL = 1e-12


@dataclass(frozen=True)
class Instance:
    """Points x_i with one convex coefficient set G(x_i) each."""

    ctx: MetricCtx
    points: np.ndarray
    sets: tuple[ConvexSetSpec, ...]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 1:
            raise DomainError("an instance needs at least one point")
        if pts.shape[1] != self.ctx.space.n:
            raise DomainError(f"points have {pts.shape[1]} coordinates, space has n={self.ctx.space.n}")
        sets = tuple(self.sets)
        if len(sets) != pts.shape[0]:
            raise DomainError(f"{pts.shape[0]} points but {len(sets)} sets")
        dim = self.ctx.space.dim
        for s in sets:
            if s.dim_ambient != dim:
                raise DomainError(f"set lives in dimension {s.dim_ambient}, coefficient space has {dim}")
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                if float(np.max(np.abs(pts[i] - pts[j]))) <= _DISTINCT_TOL:
                    raise DomainError(f"points {i} and {j} coincide within {_DISTINCT_TOL:g}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sets", sets)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def ell(self) -> int:
        """Largest effective set dimension; bounded by dim P_k by construction."""
        return max(s.effective_dim() for s in self.sets)

    def restricted(self, indices: Sequence[int]) -> "Instance":
        idx = list(indices)
        return Instance(self.ctx, self.points[idx], tuple(self.sets[i] for i in idx))

    def field_from(self, coeffs: np.ndarray) -> JetField:
        space = self.ctx.space
        polys = tuple(Poly.from_coeffs(space, coeffs[i]) for i in range(self.size))
        return JetField(self.ctx, self.points, polys)

    def to_json(self) -> dict:
        return {
            "k": self.ctx.space.k,
            "n": self.ctx.space.n,
            "modulus": self.ctx.modulus.to_json(),
            "points": self.points.tolist(),
            "sets": [s.to_json() for s in self.sets],
        }


@dataclass(frozen=True)
class SelectionResult:
    """A selection witness with the scale it certifies."""

    field: JetField
    lambda_used: float
    method: str
    certificate: dict

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "lambda_used": self.lambda_used,
            "method": self.method,
            "certificate": self.certificate,
        }


class _Assembler:
    """Incremental LP rows over stacked coefficient blocks plus an optional
    trailing scale column."""

    def __init__(self, instance: Instance, scale_col: bool):
        self.inst = instance
        self.dim = instance.ctx.space.dim
        self.m = instance.size
        self.width = self.m * self.dim + (1 if scale_col else 0)
        self.scale_col = self.m * self.dim if scale_col else None
        self.mats = instance.ctx.space.derivative_matrices(instance.points)
        self.rows_ub: list[np.ndarray] = []
        self.b_ub: list[np.ndarray] = []
        self.rows_eq: list[np.ndarray] = []
        self.b_eq: list[np.ndarray] = []

    def block(self, i: int) -> slice:
        return slice(i * self.dim, (i + 1) * self.dim)

    def add_membership(self):
        for i, s in enumerate(self.inst.sets):
            if s.a_ub.shape[0]:
                rows = np.zeros((s.a_ub.shape[0], self.width))
                rows[:, self.block(i)] = s.a_ub
                self.rows_ub.append(rows)
                self.b_ub.append(s.b_ub)
            if s.a_eq is not None:
                rows = np.zeros((s.a_eq.shape[0], self.width))
                rows[:, self.block(i)] = s.a_eq
                self.rows_eq.append(rows)
                self.b_eq.append(s.b_eq)

    def add_pin(self, i: int, value: np.ndarray):
        rows = np.zeros((self.dim, self.width))
        rows[:, self.block(i)] = np.eye(self.dim)
        self.rows_eq.append(rows)
        self.b_eq.append(np.asarray(value, dtype=float))

    def add_pair(self, i: int, j: int, lam: float | None):
        """Compatibility rows for one pair; lam None puts the scale on the
        trailing column instead of the right-hand side."""
        dist = float(np.linalg.norm(self.inst.points[i] - self.inst.points[j]))
        rhs = self.inst.ctx.pair_rhs(dist)
        local = np.vstack([self.mats[i], self.mats[j]])
        stacked = np.vstack([local, -local])
        rows = np.zeros((stacked.shape[0], self.width))
        rows[:, self.block(i)] = stacked
        rows[:, self.block(j)] = -stacked
        rhs2 = np.concatenate([rhs, rhs, rhs, rhs])
        if lam is None:
            rows[:, self.scale_col] = -rhs2
            self.rows_ub.append(rows)
            self.b_ub.append(np.zeros(rows.shape[0]))
        else:
            self.rows_ub.append(rows)
            self.b_ub.append(lam * rhs2)

    def add_scale_nonneg(self):
        row = np.zeros((1, self.width))
        row[0, self.scale_col] = -1.0
        self.rows_ub.append(row)
        self.b_ub.append(np.zeros(1))

    def gather(self):
        a_ub = np.vstack(self.rows_ub) if self.rows_ub else None
        b_ub = np.concatenate(self.b_ub) if self.b_ub else None
        a_eq = np.vstack(self.rows_eq) if self.rows_eq else None
        b_eq = np.concatenate(self.b_eq) if self.b_eq else None
        return a_ub, b_ub, a_eq, b_eq


def _slack_summary(instance: Instance, coeffs: np.ndarray, lam: float) -> dict:
    worst_membership = max(s.violation(coeffs[i]) for i, s in enumerate(instance.sets))
    min_pair_slack = math.inf
    mats = instance.ctx.space.derivative_matrices(instance.points)
    for i in range(instance.size):
        for j in range(i + 1, instance.size):
            diff = coeffs[i] - coeffs[j]
            num = np.maximum(np.abs(mats[i] @ diff), np.abs(mats[j] @ diff))
            dist = float(np.linalg.norm(instance.points[i] - instance.points[j]))
            slack = lam * instance.ctx.pair_rhs(dist) - num
            min_pair_slack = min(min_pair_slack, float(slack.min()))
    return {
        "max_membership_violation": float(worst_membership),
        "min_pair_slack": None if math.isinf(min_pair_slack) else min_pair_slack,
    }


def _check_membership(instance: Instance, coeffs: np.ndarray):
    for i, s in enumerate(instance.sets):
        v = s.violation(coeffs[i])
        if v > FEAS_TOL:
            raise SolverError(
                "selection witness violates set membership",
                report={"point": i, "violation": float(v)},
            )


def selection_feasible(instance: Instance, lam: float) -> SelectionResult | None:
    """One feasibility solve at a fixed scale; None when infeasible."""
    if lam < 0.0:
        raise DomainError("lambda must be >= 0")
    asm = _Assembler(instance, scale_col=False)
    asm.add_membership()
    for i in range(instance.size):
        for j in range(i + 1, instance.size):
            asm.add_pair(i, j, lam)
    a_ub, b_ub, a_eq, b_eq = asm.gather()
    res = solve_lp(np.zeros(asm.width), a_ub, b_ub, a_eq, b_eq, feasibility_only=True)
    if res.status != "optimal":
        return None
    coeffs = res.x.reshape(instance.size, asm.dim)
    _check_membership(instance, coeffs)
    return SelectionResult(
        field=instance.field_from(coeffs),
        lambda_used=float(lam),
        method="lp",
        certificate=_slack_summary(instance, coeffs, lam),
    )


def min_lambda_selection(instance: Instance) -> tuple[float, SelectionResult]:
    """Minimal scale over all selections; the scale is one extra variable."""
    asm = _Assembler(instance, scale_col=True)
    asm.add_membership()
    for i in range(instance.size):
        for j in range(i + 1, instance.size):
            asm.add_pair(i, j, None)
    asm.add_scale_nonneg()
    a_ub, b_ub, a_eq, b_eq = asm.gather()
    cost = np.zeros(asm.width)
    cost[asm.scale_col] = 1.0
    res = solve_lp(cost, a_ub, b_ub, a_eq, b_eq)
    if res.status != "optimal":
        raise ModelingError(
            f"scale minimization came back {res.status}; "
            "this requires an empty or modulus-degenerate set system"
        )
    lam = max(float(res.x[asm.scale_col]), 0.0)
    coeffs = res.x[: asm.scale_col].reshape(instance.size, asm.dim)
    _check_membership(instance, coeffs)
    result = SelectionResult(
        field=instance.field_from(coeffs),
        lambda_used=lam,
        method="lp",
        certificate=_slack_summary(instance, coeffs, lam),
    )
    return lam, result


def selection_feasible_exact(instance: Instance, lam: float) -> bool:
    """Rational-arithmetic recheck of feasibility at a fixed scale.

    Decides the literal float data with no tolerance; used before any
    infeasibility is reported as a finding.  Slow, small systems only.
    """
    if lam < 0.0:
        raise DomainError("lambda must be >= 0")
    asm = _Assembler(instance, scale_col=False)
    asm.add_membership()
    for i in range(instance.size):
        for j in range(i + 1, instance.size):
            asm.add_pair(i, j, lam)
    a_ub, b_ub, a_eq, b_eq = asm.gather()
    res = solve_lp_exact(np.zeros(asm.width), a_ub, b_ub, a_eq, b_eq, feasibility_only=True)
    return res.status == "optimal"


# -- constructive route ---------------------------------------------------


def _components(vertices: Sequence[int], edges, removed: int) -> list[tuple[list[int], list[tuple[int, int]]]]:
    """Connected components of the tree after removing one vertex, as
    (vertex list, induced edges), ordered by smallest contained index."""
    adj = {v: [] for v in vertices if v != removed}
    for i, j in edges:
        if i != removed and j != removed:
            adj[i].append(j)
            adj[j].append(i)
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            u = queue.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        comp.sort()
        induced = [(i, j) for i, j in edges if i in adj and j in adj and i != removed and j != removed
                   and (i in comp)]
        comps.append((comp, induced))
    return comps


def _choose_hub(vertices: list[int], edges, required: int) -> int:
    deg = {v: 0 for v in vertices}
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    top = max(deg.values())
    threshold = required if top >= required else top
    best = None
    for v in sorted(vertices):
        if deg[v] < threshold:
            continue
        worst = max((len(c) for c, _ in _components(vertices, edges, v)), default=0)
        key = (worst, v)
        if best is None or key < best[0]:
            best = (key, v)
    return best[1]


def _hypothesis_certificate(instance: Instance, vertices: list[int], K: float, cap: int) -> dict | None:
    """Search the vertex set for a subset infeasible at the hypothesis scale."""
    for size in range(2, min(cap, len(vertices)) + 1):
        for combo in itertools.combinations(sorted(vertices), size):
            if selection_feasible(instance.restricted(combo), K) is None:
                return {"kind": "subset_infeasible", "subset": list(combo), "lambda": K}
    return None


def constructive_selection(instance: Instance, K: float, tree_degree: int | None = None) -> SelectionResult:
    """Tree-guided selection under the subset feasibility hypothesis.

    Small instances are solved exactly.  Otherwise each level fixes the
    hub and its neighbors from a joint solve (subtree edges at e**n * K,
    hub links at a common minimized scale checked against the ceiling
    3**(k+1) * e**(3n) * K) and recurses into the subtrees with the
    neighbor values pinned.  Raises SelectionHypothesisError with a
    certificate when the hypothesis fails; otherwise the returned field
    is re-verified: membership within 1e-8 and the measured constant
    against tau(m * eta) * K * e**n.
    """
    if K < 0.0:
        raise DomainError("K must be >= 0")
    consts = instance.ctx.constants
    ell_g = consts.ell_g(instance.ell)
    cap = 2 ** ell_g
    e_n = consts.e_n
    ceiling = consts.ts * K
    m = instance.size
    values: dict[int, np.ndarray] = {}
    levels: list[dict] = []
    eta_top = 1.0
    tree_doc = None

    def base_case(idxs: list[int]):
        sub = instance.restricted(idxs)
        lam, res = min_lambda_selection(sub)
        if lam > K * (1.0 + 1e-9) + FEAS_TOL:
            raise SelectionHypothesisError(
                "subset needs a larger scale than the hypothesis allows",
                certificate={"kind": "subset_infeasible", "subset": list(idxs),
                             "lambda": K, "lambda_star": lam},
            )
        coeffs = res.field.coeff_matrix()
        for local, g in enumerate(idxs):
            values[g] = coeffs[local]

    def fail(vertices: list[int], info: dict):
        cert = _hypothesis_certificate(instance, vertices, K, cap)
        if cert is None:
            cert = {"kind": "helly_step", **info}
        raise SelectionHypothesisError("constructive step has no witness", certificate=cert)

    def level(vertices: list[int], edges: list[tuple[int, int]], hub: int,
              pin: np.ndarray | None, top: bool):
        local = {g: i for i, g in enumerate(vertices)}
        sub = instance.restricted(vertices)
        asm = _Assembler(sub, scale_col=True)
        asm.add_membership()
        if pin is not None:
            asm.add_pin(local[hub], pin)
        hub_nbrs = {j if i == hub else i for i, j in edges if hub in (i, j)}
        neighbors = []
        for comp, comp_edges in _components(vertices, edges, hub):
            nb = next(v for v in comp if v in hub_nbrs)
            neighbors.append((nb, comp, comp_edges))
        for nb, comp, comp_edges in neighbors:
            asm.add_pair(local[hub], local[nb], None)
            for i, j in comp_edges:
                asm.add_pair(local[i], local[j], e_n * K)
        asm.add_scale_nonneg()
        a_ub, b_ub, a_eq, b_eq = asm.gather()
        cost = np.zeros(asm.width)
        cost[asm.scale_col] = 1.0
        res = solve_lp(cost, a_ub, b_ub, a_eq, b_eq)
        if res.status != "optimal":
            fail(vertices, {"level_hub": hub, "status": res.status})
        t = float(res.x[asm.scale_col])
        if top and t > ceiling * (1.0 + 1e-9) + FEAS_TOL:
            fail(vertices, {"level_hub": hub, "link_scale": t, "ceiling": ceiling})
        coeffs = res.x[: asm.scale_col].reshape(len(vertices), asm.dim)
        if pin is None:
            values[hub] = coeffs[local[hub]]
        levels.append({"hub": hub, "size": len(vertices), "link_scale": t})
        for nb, comp, comp_edges in neighbors:
            values[nb] = coeffs[local[nb]]
            if len(comp) > 1:
                level(comp, comp_edges, nb, values[nb], top=False)

    if m == 1:
        values[0] = instance.sets[0].certify_nonempty()
    elif m <= cap:
        base_case(list(range(m)))
    else:
        required = min(ell_g + 1 if tree_degree is None else int(tree_degree), m - 1)
        tree = build_tree(instance.points, required_degree=required)
        eta_top = tree.eta_observed
        tree_doc = tree.to_json()
        hub = _choose_hub(list(range(m)), tree.edges, required)
        level(list(range(m)), list(tree.edges), hub, None, top=True)

    coeffs = np.array([values[i] for i in range(m)])
    _check_membership(instance, coeffs)
    field = instance.field_from(coeffs)
    realized = wg_lambda_star(field)
    bound = consts.tau(max(1.0, m * eta_top)) * K * e_n
    certificate = _slack_summary(instance, coeffs, realized)
    certificate.update({
        "hypothesis_scale": K,
        "realized_lambda": realized,
        "posterior_bound": bound,
        "bound_ok": bool(realized <= bound * (1.0 + 1e-9) + FEAS_TOL),
        "eta_observed": eta_top,
        "levels": levels,
        "tree": tree_doc,
    })
    return SelectionResult(field=field, lambda_used=realized, method="constructive", certificate=certificate)


def bounded_constructive_selection(instance: Instance, K: float, tree_degree: int | None = None) -> SelectionResult:
    """Constructive selection with the pointwise box |D^a c(x_i)| <= K
    intersected into every set, so the result also has sup_part <= K."""
    if K < 0.0:
        raise DomainError("K must be >= 0")
    mats = instance.ctx.space.derivative_matrices(instance.points)
    dim = instance.ctx.space.dim
    boxed = []
    for i, s in enumerate(instance.sets):
        rows = np.vstack([mats[i], -mats[i]])
        box = ConvexSetSpec(rows, np.full(2 * dim, float(K)))
        merged = s.intersect(box)
        try:
            merged.certify_nonempty()
        except InvariantError:
            raise SelectionHypothesisError(
                "a set has no point with derivatives bounded by K",
                certificate={"kind": "subset_infeasible", "subset": [i], "lambda": K},
            )
        boxed.append(merged)
    bounded = Instance(instance.ctx, instance.points, tuple(boxed))
    result = constructive_selection(bounded, K, tree_degree=tree_degree)
    certificate = dict(result.certificate)
    certificate["sup_part"] = wg_sup_part(result.field)
    return SelectionResult(
        field=result.field,
        lambda_used=result.lambda_used,
        method="constructive",
        certificate=certificate,
    )
