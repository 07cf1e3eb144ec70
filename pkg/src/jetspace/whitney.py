"""Finite-set jet fields: compatibility constants and the induced norms.

A jet field assigns one polynomial to each point of a finite set S.  The
central quantity is the smallest lambda such that for every pair x != y
and every derivative order alpha up to k

    max{|D^a(P_x - P_y)(x)|, |D^a(P_x - P_y)(y)|}
        <= lambda * ||x-y||**(k-|a|) * w(||x-y||).

This is the classical pairwise compatibility condition; it is exactly the
two-point-metric Lipschitz condition after rescaling the polynomials by
lambda, so the same constant doubles as the selection norm in the
two-point metric, with a certified interval for the chain metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .jets import Poly
from .metric import MetricCtx, MetricInterval
from .numerics import leq_array

_DISTINCT_TOL = 1e-12


@dataclass(frozen=True)
class JetField:
    """Polynomials P_x indexed by the points x of a finite set S."""

    ctx: MetricCtx
    points: np.ndarray
    polys: tuple[Poly, ...]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 1:
            raise DomainError("a jet field needs at least one point")
        if pts.shape[1] != self.ctx.space.n:
            raise DomainError(f"points have {pts.shape[1]} coordinates, space has n={self.ctx.space.n}")
        polys = tuple(self.polys)
        if len(polys) != pts.shape[0]:
            raise DomainError(f"{pts.shape[0]} points but {len(polys)} polynomials")
        for p in polys:
            if p.space != self.ctx.space:
                raise DomainError("polynomial space does not match the field context")
        # S is a set: coincident points with two polynomials are a modeling
        # error, not an infeasible constraint.
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                if float(np.max(np.abs(pts[i] - pts[j]))) <= _DISTINCT_TOL:
                    raise DomainError(f"points {i} and {j} coincide within {_DISTINCT_TOL:g}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "polys", polys)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def coeff_matrix(self) -> np.ndarray:
        return np.array([p.coeffs for p in self.polys], dtype=float)

    def scaled(self, factor: float) -> "JetField":
        return JetField(self.ctx, self.points, tuple(p.scaled(factor) for p in self.polys))

    def restricted(self, indices: Sequence[int]) -> "JetField":
        idx = list(indices)
        return JetField(self.ctx, self.points[idx], tuple(self.polys[i] for i in idx))

    def to_json(self) -> dict:
        sp = self.ctx.space
        return {
            "k": sp.k,
            "n": sp.n,
            "modulus": self.ctx.modulus.to_json(),
            "points": self.points.tolist(),
            "polys": [list(p.coeffs) for p in self.polys],
        }


@dataclass(frozen=True)
class FieldNormReport:
    """sup_part: largest |D^a P_x(x)|; lambda_star: minimal pairwise
    constant; lo_interval brackets the chain-metric selection norm;
    lo_star = sup_part + lambda_star is the bounded norm."""

    sup_part: float
    lambda_star: float
    lo_interval: MetricInterval
    lo_star: float

    def to_json(self) -> dict:
        def fin(v: float):
            return v if math.isfinite(v) else None

        return {
            "sup_part": fin(self.sup_part),
            "lambda_star": fin(self.lambda_star),
            "lo_interval": {"lower": fin(self.lo_interval.lower), "upper": fin(self.lo_interval.upper)},
            "lo_star": fin(self.lo_star),
        }


def _pair_stats(field: JetField):
    """Per-pair worst ratio of the compatibility condition.

    Yields (ratio, (i, j), alpha_index) in lexicographic pair order;
    ratio is +inf when the denominator vanishes under a nonzero
    numerator and the pair is degenerate for this modulus.
    """
    ctx = field.ctx
    pts = field.points
    coeffs = field.coeff_matrix()
    mats = ctx.space.derivative_matrices(pts)
    m = pts.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            diff = coeffs[i] - coeffs[j]
            num = np.maximum(np.abs(mats[i] @ diff), np.abs(mats[j] @ diff))
            dist = float(np.linalg.norm(pts[i] - pts[j]))
            rhs = ctx.pair_rhs(dist)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(num > 0.0, num / rhs, 0.0)
            a = int(np.argmax(ratios))
            yield float(ratios[a]), (i, j), a


def wg_lambda_star(field: JetField) -> float:
    """Minimal lambda satisfying the pairwise condition; 0 for singletons,
    +inf when some pair is incompatible with a degenerate modulus value."""
    best = 0.0
    for ratio, _, _ in _pair_stats(field):
        best = max(best, ratio)
    return best


def wg_worst_pair(field: JetField) -> tuple[float, tuple[int, int] | None, tuple[int, ...] | None]:
    """lambda_star together with the first pair and derivative order
    achieving it (None for singletons)."""
    best, pair, alpha = 0.0, None, None
    for ratio, ij, a in _pair_stats(field):
        if ratio > best:
            best, pair, alpha = ratio, ij, field.ctx.space.multiindices[a]
    return best, pair, alpha


def wg_sup_part(field: JetField) -> float:
    """max over points and orders of |D^a P_x(x)|."""
    mats = field.ctx.space.derivative_matrices(field.points)
    coeffs = field.coeff_matrix()
    vals = np.einsum("mij,mj->mi", mats, coeffs)
    return float(np.max(np.abs(vals)))


def lipschitz_orlicz_norm(field: JetField) -> FieldNormReport:
    """Norm report for the field.

    lambda_star is exact for the two-point metric; the chain-metric norm
    lies in [lambda_star / e**n, lambda_star] by the sandwich theorem, and
    lo_star = sup_part + lambda_star is the bounded norm.
    """
    lam = wg_lambda_star(field)
    sup = wg_sup_part(field)
    e_n = field.ctx.constants.e_n
    lower = lam / e_n if math.isfinite(lam) else math.inf
    return FieldNormReport(
        sup_part=sup,
        lambda_star=lam,
        lo_interval=MetricInterval(lower, lam),
        lo_star=sup + lam,
    )


def wg_feasibility_check(field: JetField, lam: float) -> dict:
    """Check both conditions at a given lambda.

    Returns {nd_ok, dp_ok, witness}; the witness identifies the first
    violated constraint in deterministic scan order (pairs before points,
    each in index order, orders in the graded ordering).
    """
    if lam < 0.0:
        raise DomainError("lambda must be >= 0")
    ctx = field.ctx
    mats = ctx.space.derivative_matrices(field.points)
    coeffs = field.coeff_matrix()
    midx = ctx.space.multiindices
    witness = None

    dp_ok = True
    for i in range(field.size):
        if not dp_ok:
            break
        for j in range(i + 1, field.size):
            diff = coeffs[i] - coeffs[j]
            num = np.maximum(np.abs(mats[i] @ diff), np.abs(mats[j] @ diff))
            rhs = lam * ctx.pair_rhs(float(np.linalg.norm(field.points[i] - field.points[j])))
            bad = np.flatnonzero(~leq_array(num, rhs))
            if bad.size:
                dp_ok = False
                witness = {"kind": "dp", "pair": (i, j), "alpha": midx[int(bad[0])]}
                break

    nd_ok = True
    vals = np.abs(np.einsum("mij,mj->mi", mats, coeffs))
    bad = np.argwhere(~leq_array(vals, lam))
    if bad.size:
        i, a = (int(v) for v in bad[0])
        nd_ok = False
        if witness is None:
            witness = {"kind": "nd", "point": i, "alpha": midx[a]}

    return {"nd_ok": nd_ok, "dp_ok": dp_ok, "witness": witness}
