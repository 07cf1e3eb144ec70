"""Convex constraint sets in coefficient space, and Helly-style checks.

A set is described by halfspaces A @ c <= b plus optional equality rows.
Nonemptiness is certified at load with one phase-1 solve.  A declared
affine dimension is verified from the rank of the equality system,
refined where needed by probing inequality rows for implicit equalities
(rows whose slack is zero on the whole region).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvariantError
from .lp import FEAS_TOL, feasible_point, solve_lp

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ConvexSetSpec:
    """A nonempty polyhedral set {c : A @ c <= b, A_eq @ c == b_eq}."""

    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    declared_dim: int | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_ub, dtype=float))
        if a.size == 0:
            a = a.reshape(0, self._infer_dim())
        b = np.asarray(self.b_ub, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise DomainError(f"{a.shape[0]} halfspace rows but {b.shape[0]} offsets")
        object.__setattr__(self, "a_ub", a)
        object.__setattr__(self, "b_ub", b)
        if self.a_eq is not None:
            ae = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
            be = np.asarray(self.b_eq, dtype=float).reshape(-1)
            if ae.shape[1] != a.shape[1] and a.shape[0] > 0:
                raise DomainError("equality rows have mismatched width")
            if ae.shape[0] != be.shape[0]:
                raise DomainError(f"{ae.shape[0]} equality rows but {be.shape[0]} offsets")
            object.__setattr__(self, "a_eq", ae)
            object.__setattr__(self, "b_eq", be)
        if self.declared_dim is not None and self.declared_dim < 0:
            raise DomainError("declared_dim must be >= 0")

    def _infer_dim(self) -> int:
        if self.a_eq is not None:
            return np.atleast_2d(np.asarray(self.a_eq, dtype=float)).shape[1]
        raise DomainError("a set needs at least one halfspace or equality row")

    @property
    def dim_ambient(self) -> int:
        return self.a_ub.shape[1] if self.a_ub.size or self.a_eq is None else self.a_eq.shape[1]

    def contains(self, c: np.ndarray, tol: float = FEAS_TOL) -> bool:
        c = np.asarray(c, dtype=float)
        if self.a_ub.shape[0] and float((self.a_ub @ c - self.b_ub).max()) > tol:
            return False
        if self.a_eq is not None and float(np.abs(self.a_eq @ c - self.b_eq).max()) > tol:
            return False
        return True

    def violation(self, c: np.ndarray) -> float:
        """Largest constraint violation at c (<= 0 means inside)."""
        c = np.asarray(c, dtype=float)
        worst = -np.inf
        if self.a_ub.shape[0]:
            worst = max(worst, float((self.a_ub @ c - self.b_ub).max()))
        if self.a_eq is not None:
            worst = max(worst, float(np.abs(self.a_eq @ c - self.b_eq).max()))
        return worst if worst > -np.inf else 0.0

    def certify_nonempty(self) -> np.ndarray:
        """One phase-1 solve; raises when the region is empty."""
        x = feasible_point(self.a_ub, self.b_ub, self.a_eq, self.b_eq, nv=self.dim_ambient)
        if x is None:
            raise InvariantError("convex set is empty")
        return x

    def verified_dim(self, witness: np.ndarray | None = None) -> int:
        """Affine-hull dimension: ambient minus the rank of all equality
        rows, explicit and implicit.  Probing solves run only for rows
        that are tight at the witness."""
        d = self.dim_ambient
        rows = [] if self.a_eq is None else [self.a_eq]
        if witness is None:
            witness = self.certify_nonempty()
        if self.a_ub.shape[0]:
            slack = self.b_ub - self.a_ub @ witness
            implicit = []
            for i in np.flatnonzero(slack <= FEAS_TOL):
                # Does row i admit positive slack anywhere on the region?
                res = solve_lp(self.a_ub[i], self.a_ub, self.b_ub, self.a_eq, self.b_eq)
                if res.status == "optimal" and self.b_ub[i] - res.objective <= FEAS_TOL:
                    implicit.append(self.a_ub[i])
                # unbounded in this direction means genuinely slack
            if implicit:
                rows.append(np.array(implicit))
        if not rows:
            return d
        stacked = np.vstack(rows)
        rank = int(np.linalg.matrix_rank(stacked, tol=_RANK_TOL * max(1.0, float(np.abs(stacked).max()))))
        return d - rank

    def check_declared_dim(self, witness: np.ndarray | None = None):
        if self.declared_dim is None:
            return
        if self.declared_dim >= self.dim_ambient:
            return  # trivially an upper bound
        actual = self.verified_dim(witness)
        if actual > self.declared_dim:
            raise InvariantError(
                f"declared_dim={self.declared_dim} but the affine hull has dimension {actual}"
            )

    def effective_dim(self) -> int:
        """The dimension used for finiteness numbers: the declared value
        when present (verified separately), else the ambient bound from
        explicit equality rows alone."""
        if self.declared_dim is not None:
            return min(self.declared_dim, self.dim_ambient)
        if self.a_eq is not None:
            rank = int(np.linalg.matrix_rank(self.a_eq, tol=_RANK_TOL * max(1.0, float(np.abs(self.a_eq).max()))))
            return self.dim_ambient - rank
        return self.dim_ambient

    @staticmethod
    def box(center: np.ndarray, radius: float) -> "ConvexSetSpec":
        center = np.asarray(center, dtype=float)
        d = center.shape[0]
        eye = np.eye(d)
        if radius == 0.0:
            return ConvexSetSpec(np.zeros((0, d)), np.zeros(0), a_eq=eye, b_eq=center, declared_dim=0)
        a = np.vstack([eye, -eye])
        b = np.concatenate([center + radius, radius - center])
        return ConvexSetSpec(a, b, declared_dim=d)

    @staticmethod
    def singleton(point: np.ndarray) -> "ConvexSetSpec":
        return ConvexSetSpec.box(point, 0.0)

    def intersect(self, other: "ConvexSetSpec") -> "ConvexSetSpec":
        if other.dim_ambient != self.dim_ambient:
            raise DomainError("cannot intersect sets of different ambient dimension")
        a = np.vstack([self.a_ub, other.a_ub])
        b = np.concatenate([self.b_ub, other.b_ub])
        eqs = [s for s in (self, other) if s.a_eq is not None]
        a_eq = np.vstack([s.a_eq for s in eqs]) if eqs else None
        b_eq = np.concatenate([s.b_eq for s in eqs]) if eqs else None
        dims = [s.declared_dim for s in (self, other) if s.declared_dim is not None]
        return ConvexSetSpec(a, b, a_eq=a_eq, b_eq=b_eq, declared_dim=min(dims) if dims else None)

    def to_json(self) -> dict:
        doc: dict = {"A": self.a_ub.tolist(), "b": self.b_ub.tolist()}
        if self.a_eq is not None:
            doc["eq"] = {"A": self.a_eq.tolist(), "b": self.b_eq.tolist()}
        if self.declared_dim is not None:
            doc["dim"] = self.declared_dim
        return doc

    @staticmethod
    def from_json(doc: dict) -> "ConvexSetSpec":
        eq = doc.get("eq")
        return ConvexSetSpec(
            np.asarray(doc["A"], dtype=float),
            np.asarray(doc["b"], dtype=float),
            a_eq=None if eq is None else np.asarray(eq["A"], dtype=float),
            b_eq=None if eq is None else np.asarray(eq["b"], dtype=float),
            declared_dim=doc.get("dim"),
        )


def _stack(sets: Sequence[ConvexSetSpec]):
    a = np.vstack([s.a_ub for s in sets])
    b = np.concatenate([s.b_ub for s in sets])
    eqs = [s for s in sets if s.a_eq is not None]
    a_eq = np.vstack([s.a_eq for s in eqs]) if eqs else None
    b_eq = np.concatenate([s.b_eq for s in eqs]) if eqs else None
    return a, b, a_eq, b_eq


def intersection_point(sets: Sequence[ConvexSetSpec]) -> np.ndarray | None:
    """A point in the common intersection, or None."""
    sets = list(sets)
    if not sets:
        raise DomainError("need at least one set")
    d = sets[0].dim_ambient
    if any(s.dim_ambient != d for s in sets):
        raise DomainError("sets live in different ambient dimensions")
    a, b, a_eq, b_eq = _stack(sets)
    return feasible_point(a, b, a_eq, b_eq, nv=d)


@dataclass(frozen=True)
class HellyReport:
    subset_size: int
    all_subfamilies_intersect: bool
    global_intersects: bool
    witness: tuple[float, ...] | None
    failing_subfamily: tuple[int, ...] | None

    def to_json(self) -> dict:
        return {
            "subset_size": self.subset_size,
            "all_subfamilies_intersect": self.all_subfamilies_intersect,
            "global_intersects": self.global_intersects,
            "witness": None if self.witness is None else list(self.witness),
            "failing_subfamily": None if self.failing_subfamily is None else list(self.failing_subfamily),
        }


def helly_check(sets: Sequence[ConvexSetSpec], subset_size: int) -> HellyReport:
    """Brute-force every subfamily of the given size and the full family.

    For families in R^d the classical pattern is subset_size = d + 1;
    when one member has affine dimension <= l, subset_size = l + 2
    already decides the full intersection.
    """
    sets = list(sets)
    if subset_size < 1:
        raise DomainError("subset_size must be >= 1")
    size = min(subset_size, len(sets))
    all_ok = True
    failing = None
    for combo in itertools.combinations(range(len(sets)), size):
        if intersection_point([sets[i] for i in combo]) is None:
            all_ok = False
            failing = combo
            break
    witness = intersection_point(sets)
    return HellyReport(
        subset_size=size,
        all_subfamilies_intersect=all_ok,
        global_intersects=witness is not None,
        witness=None if witness is None else tuple(float(v) for v in witness),
        failing_subfamily=failing,
    )
