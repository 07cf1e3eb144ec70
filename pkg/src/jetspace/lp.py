"""A small dense LP core: two-phase simplex run on the dual.

Problems are stated over free variables:

    minimize c @ x   subject to   A_ub @ x <= b_ub,   A_eq @ x == b_eq.

The workloads here are tall and thin: a few dozen free variables against
hundreds of inequality rows, with row magnitudes spread over several
orders.  A primal tableau over that many rows accumulates pivot error
fast, so the float path solves the dual instead,

    minimize b @ y   subject to   A^T y = -c,   y >= 0,

whose tableau has one row per primal *variable*.  The primal solution is
the multiplier vector of the optimal dual basis; it is recomputed from
the original constraint rows (never from the drifted tableau) and then
verified against the original data, feasibility and duality gap both.
Unbounded-ray claims get the same treatment: the ray is rebuilt in
original coordinates and must verify as a Farkas certificate before it
is believed.  A failed verification retries under Bland's rule before
giving up with a :class:`SolverError` condition report.

Status mapping: dual unbounded means primal infeasible; dual infeasible
is disambiguated by a feasibility probe (primal feasible then unbounded,
otherwise infeasible).

The same two-phase algorithm also runs over exact rationals
(:func:`solve_lp_exact`), in primal form, for re-verifying certificates:
every float is a rational, so the exact pass decides feasibility of the
literal input data with no tolerance at all.  It is slow and meant for
small systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, SolverError

FEAS_TOL = 1e-8
_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_RATIO_TIE = 1e-12
_GAP_TOL = 1e-6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    x_exact: list[Fraction] | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _normalize(c, a_ub, b_ub, a_eq, b_eq):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nv = c.shape[0]
    if a_ub is None:
        a_ub, b_ub = np.zeros((0, nv)), np.zeros(0)
    a_ub = np.asarray(a_ub, dtype=float).reshape(-1, nv)
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    if a_eq is None:
        a_eq, b_eq = np.zeros((0, nv)), np.zeros(0)
    a_eq = np.asarray(a_eq, dtype=float).reshape(-1, nv)
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    if b_ub.shape[0] != a_ub.shape[0] or b_eq.shape[0] != a_eq.shape[0]:
        raise DomainError("constraint matrix and rhs sizes disagree")
    for arr in (c, a_ub, b_ub, a_eq, b_eq):
        if arr.size and not np.all(np.isfinite(arr)):
            raise DomainError("non-finite coefficient in LP data")
    return c, a_ub, b_ub, a_eq, b_eq


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, feasibility_only: bool = False) -> LpResult:
    """Minimize c @ x over free x.  With ``feasibility_only`` the objective
    is ignored and any feasible point is returned."""
    c, a_ub, b_ub, a_eq, b_eq = _normalize(c, a_ub, b_ub, a_eq, b_eq)
    nv = c.shape[0]
    # Equality rows become opposing inequality pairs so the dual carries
    # one sign-constrained variable per row across the board.
    a = np.vstack([a_ub, a_eq, -a_eq])
    b = np.concatenate([b_ub, b_eq, -b_eq])
    cost = np.zeros(nv) if feasibility_only else c

    x, iters, report = _dual_solve(cost, a, b, bland=False)
    if isinstance(x, str):
        return LpResult(status=x, x=None, objective=None, iterations=iters)
    if x is None:
        x, it2, report2 = _dual_solve(cost, a, b, bland=True)
        iters += it2
        if isinstance(x, str):
            return LpResult(status=x, x=None, objective=None, iterations=iters)
        if x is None:
            report2["first_attempt"] = report
            raise SolverError("LP solution failed verification against input data", report=report2)
    return LpResult(status=OPTIMAL, x=x, objective=float(c @ x), iterations=iters)


def feasible_point(a_ub=None, b_ub=None, a_eq=None, b_eq=None, nv: int | None = None) -> np.ndarray | None:
    """Phase-1 only: a point satisfying the rows, or None."""
    if nv is None:
        if a_ub is not None:
            nv = np.asarray(a_ub).shape[1]
        elif a_eq is not None:
            nv = np.asarray(a_eq).shape[1]
        else:
            raise SolverError("cannot infer variable count for feasibility check")
    res = solve_lp(np.zeros(nv), a_ub, b_ub, a_eq, b_eq, feasibility_only=True)
    return res.x if res.ok else None


def _dual_solve(c, a, b, bland):
    """Core pass: min c @ x s.t. a @ x <= b, x free.

    Returns (x, iterations, report).  ``x`` is an ndarray on verified
    success, a status string for infeasible/unbounded, or None when the
    optimum was reached but the recovered point failed verification.
    """
    nv = c.shape[0]
    nr = a.shape[0]
    if nr == 0:
        if np.any(c != 0.0):
            return UNBOUNDED, 0, {}
        return np.zeros(nv), 0, {}

    # Scale primal rows to unit max-abs (dual column equilibration), then
    # dual rows likewise.  The answer is later rebuilt from raw data, so
    # scaling only has to keep pivot selection honest.
    q = np.abs(a).max(axis=1)
    q[q == 0.0] = 1.0
    a_s = a / q[:, None]
    b_s = b / q

    ad = a_s.T.copy()
    bd = -c.astype(float)
    r = np.abs(ad).max(axis=1) if nr else np.zeros(nv)
    r[r == 0.0] = 1.0
    ad /= r[:, None]
    bd = bd / r
    neg = bd < 0.0
    ad[neg] *= -1.0
    bd = np.where(neg, -bd, bd)

    n_art = nv
    T = np.zeros((nv, nr + n_art + 1))
    T[:, :nr] = ad
    T[:, nr : nr + n_art] = np.eye(nv)
    T[:, -1] = bd
    basis = np.arange(nr, nr + n_art, dtype=np.int64)

    max_iter = 5000 + 100 * (nv + nr)
    cost1 = np.zeros(nr + n_art)
    cost1[nr:] = 1.0
    status, iters, _ = _run_phase(T, basis, cost1, allowed=nr + n_art, max_iter=max_iter, stop_at_zero=True, bland=bland)
    if status != OPTIMAL:
        raise SolverError("phase 1 cannot be unbounded", report={"status": status})
    resid = float(T[basis >= nr, -1].sum())
    if resid > FEAS_TOL:
        # Dual infeasible.  A zero-objective probe on the same rows tells
        # the primal stories apart; its own dual is always feasible.
        probe, it2, rep = _dual_solve(np.zeros(nv), a, b, bland)
        iters += it2
        if probe is None:
            return None, iters, {"reason": "feasibility probe failed verification", **rep}
        if isinstance(probe, str):
            return INFEASIBLE, iters, {}
        return UNBOUNDED, iters, {}
    _drive_out_artificials(T, basis, nr)

    cost2 = np.zeros(nr + n_art)
    cost2[:nr] = b_s
    status, it2, enter = _run_phase(T, basis, cost2, allowed=nr, max_iter=max_iter, bland=bland)
    iters += it2
    if status == UNBOUNDED:
        # A dual recession direction is a Farkas certificate of primal
        # infeasibility, but the tableau that produced it may have drifted;
        # only a certificate that verifies against the raw rows counts.
        if _farkas_certified(a, b, q, T, basis, nr, enter):
            return INFEASIBLE, iters, {}
        return None, iters, {"reason": "unbounded claim failed Farkas verification", "iterations": int(iters)}

    # Multipliers of the optimal dual basis solve the primal.  Basic real
    # column j pins original row j to equality; a basic artificial sits on
    # a dependent dual row and pins that coordinate to zero.
    M = np.zeros((nv, nv))
    rhs = np.zeros(nv)
    for i, bi in enumerate(basis):
        if bi < nr:
            M[i] = a[bi]
            rhs[i] = b[bi]
        else:
            M[i, bi - nr] = 1.0
    try:
        x = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        x = np.linalg.lstsq(M, rhs, rcond=None)[0]
    if not np.all(np.isfinite(x)):
        return None, iters, {"reason": "non-finite multipliers"}

    row_scale = np.maximum(1.0, np.maximum(q, np.abs(b)))
    viol = float(np.max((a @ x - b) / row_scale))
    dual_obj = float(cost2[basis] @ T[:, -1])
    gap = abs(float(c @ x) + dual_obj)
    gap_tol = _GAP_TOL * max(1.0, abs(float(c @ x)), abs(dual_obj))
    if viol > FEAS_TOL or gap > gap_tol:
        return None, iters, {"violation": viol, "gap": gap, "rows": int(nr), "cols": int(nv), "iterations": int(iters)}
    return x, iters, {}


def _farkas_certified(a, b, q, T, basis, nr, enter) -> bool:
    """Rebuild the claimed dual ray in original coordinates and verify it.

    The ray sets the entering variable to one and moves the basic ones by
    minus the tableau column.  It proves primal infeasibility exactly when
    y >= 0, a^T y = 0 and b @ y < 0 hold on the raw data; a drifted
    tableau fails one of the three.
    """
    y = np.zeros(a.shape[0])
    y[enter] = 1.0
    for i, bi in enumerate(basis):
        if bi < nr:
            y[bi] = -T[i, enter]
    if float(y.min()) < -FEAS_TOL * max(1.0, float(np.abs(y).max())):
        return False
    y = np.maximum(y, 0.0) / q
    res = a.T @ y
    res_scale = np.maximum(1.0, np.abs(a.T) @ y)
    if float(np.max(np.abs(res) / res_scale)) > FEAS_TOL:
        return False
    drop = float(b @ y)
    return drop < -FEAS_TOL * max(1.0, float(np.abs(b) @ y))


def _run_phase(T, basis, cost, allowed, max_iter, stop_at_zero=False, bland=False):
    """Pivot until optimal or unbounded; returns (status, iterations, enter).
    ``allowed`` caps the entering column index so phase 2 never re-admits
    artificials; ``enter`` is the column that witnessed unboundedness (-1
    otherwise).

    Pricing starts with the most negative reduced cost (deterministic:
    first index on ties) and switches permanently to Bland's rule after a
    run of degenerate pivots, which bounds cycling; ``bland`` starts there
    outright.  ``stop_at_zero`` allows phase 1 to end as soon as the
    infeasibility sum is cleared.

    The ratio test clamps small negative basic values to zero (they are
    degeneracy drift, and dividing them by a tiny pivot manufactures a
    bogus most-negative ratio) and breaks ties on the largest pivot
    element, which keeps row scaling tame across degenerate runs; under
    Bland's rule the tie goes to the lowest basis index instead, as the
    termination argument requires.
    """
    m = T.shape[0]
    red = cost.astype(float).copy()
    obj = 0.0
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            red -= cb * T[i, :-1]
            obj += cb * T[i, -1]
    iters = 0
    stall = 0
    while True:
        iters += 1
        if iters > max_iter:
            raise SolverError(
                "simplex iteration cap exceeded",
                report={"iterations": iters, "rows": int(m), "allowed_cols": int(allowed)},
            )
        if stop_at_zero and obj <= FEAS_TOL * 1e-3:
            return OPTIMAL, iters, -1
        cand = red[:allowed]
        if cand.size == 0:
            return OPTIMAL, iters, -1
        if bland:
            negs = np.flatnonzero(cand < -_COST_TOL)
            if negs.size == 0:
                return OPTIMAL, iters, -1
            enter = int(negs[0])
        else:
            enter = int(np.argmin(cand))
            if cand[enter] >= -_COST_TOL:
                return OPTIMAL, iters, -1
        col = T[:, enter]
        pos = col > _PIVOT_TOL
        if not np.any(pos):
            return UNBOUNDED, iters, enter
        rhs = np.maximum(T[:, -1], 0.0)
        ratios = np.where(pos, rhs / np.where(pos, col, 1.0), np.inf)
        best = float(ratios.min())
        ties = np.flatnonzero(ratios <= best + _RATIO_TIE)
        if bland:
            leave = int(ties[np.argmin(basis[ties])])
        else:
            leave = int(ties[np.argmax(col[ties])])
        stall = stall + 1 if best <= _RATIO_TIE else 0
        if stall > 50:
            bland = True
        factor = red[enter]
        T[leave] /= T[leave, enter]
        colv = T[:, enter].copy()
        colv[leave] = 0.0
        T -= np.outer(colv, T[leave])
        red -= factor * T[leave, :-1]
        obj += factor * T[leave, -1]
        basis[leave] = enter


def _drive_out_artificials(T, basis, n):
    m = T.shape[0]
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            js = np.where(np.abs(row) > _PIVOT_TOL)[0]
            if js.size:
                j = int(js[0])
                T[i] /= T[i, j]
                colv = T[:, j].copy()
                colv[i] = 0.0
                T -= np.outer(colv, T[i])
                basis[i] = j
            # else: the row is redundant; its artificial stays basic at zero
            # and is barred from re-entering, so it never moves again.


# ---------------------------------------------------------------------------
# Exact-rational variant.


def solve_lp_exact(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, feasibility_only: bool = False) -> LpResult:
    """The same two-phase simplex over Fractions; zero tolerances.

    Inputs may be floats (converted exactly) or Fractions.  Intended for
    small certificate re-verification, not for bulk solving.
    """
    c, a_ub, b_ub, a_eq, b_eq = _normalize(
        np.asarray(c, dtype=float), a_ub, b_ub, a_eq, b_eq
    )
    nv = c.shape[0]
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    F = Fraction

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    slack_col: list[int] = []
    n = 2 * nv + m_ub
    for i in range(m_ub):
        row = [F(v) for v in a_ub[i]] + [-F(v) for v in a_ub[i]] + [F(0)] * m_ub
        row[2 * nv + i] = F(1)
        bi = F(b_ub[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            slack_col.append(-1)
        else:
            slack_col.append(2 * nv + i)
        rows.append(row)
        rhs.append(bi)
    for i in range(m_eq):
        row = [F(v) for v in a_eq[i]] + [-F(v) for v in a_eq[i]] + [F(0)] * m_ub
        bi = F(b_eq[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhs.append(bi)
        slack_col.append(-1)

    m = len(rows)
    art_rows = [i for i in range(m) if slack_col[i] < 0]
    n_art = len(art_rows)
    for i in range(m):
        rows[i] = rows[i] + [F(0)] * n_art + [rhs[i]]
    for j, i in enumerate(art_rows):
        rows[i][n + j] = F(1)
    basis = [slack_col[i] if slack_col[i] >= 0 else 0 for i in range(m)]
    for j, i in enumerate(art_rows):
        basis[i] = n + j

    def run_phase(cost: list[Fraction], allowed: int) -> str:
        red = list(cost)
        for i in range(m):
            cb = cost[basis[i]]
            if cb != 0:
                red = [r - cb * v for r, v in zip(red, rows[i][:-1])]
        guard = 0
        while True:
            guard += 1
            if guard > 20000 + 200 * (m + n):
                raise SolverError("exact simplex iteration cap exceeded", report={"iterations": guard})
            enter = next((j for j in range(allowed) if red[j] < 0), -1)
            if enter < 0:
                return OPTIMAL
            best_ratio, leave = None, -1
            for i in range(m):
                aij = rows[i][enter]
                if aij > 0:
                    ratio = rows[i][-1] / aij
                    if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[leave]):
                        best_ratio, leave = ratio, i
            if leave < 0:
                return UNBOUNDED
            piv = rows[leave][enter]
            rows[leave] = [v / piv for v in rows[leave]]
            for i in range(m):
                if i != leave and rows[i][enter] != 0:
                    f = rows[i][enter]
                    rows[i] = [v - f * w for v, w in zip(rows[i], rows[leave])]
            f = red[enter]
            red = [r - f * w for r, w in zip(red, rows[leave][:-1])]
            basis[leave] = enter

    if n_art > 0:
        cost1 = [F(0)] * n + [F(1)] * n_art
        if run_phase(cost1, n + n_art) != OPTIMAL:
            raise SolverError("phase 1 cannot be unbounded")
        if sum((rows[i][-1] for i in range(m) if basis[i] >= n), F(0)) > 0:
            return LpResult(status=INFEASIBLE, x=None, objective=None, iterations=0)
        for i in range(m):
            if basis[i] >= n:
                j = next((jj for jj in range(n) if rows[i][jj] != 0), -1)
                if j >= 0:
                    piv = rows[i][j]
                    rows[i] = [v / piv for v in rows[i]]
                    for r in range(m):
                        if r != i and rows[r][j] != 0:
                            f = rows[r][j]
                            rows[r] = [v - f * w for v, w in zip(rows[r], rows[i])]
                    basis[i] = j

    status = OPTIMAL
    if not feasibility_only:
        cost2 = [F(v) for v in c] + [-F(v) for v in c] + [F(0)] * (m_ub + n_art)
        status = run_phase(cost2, n)
        if status == UNBOUNDED:
            return LpResult(status=UNBOUNDED, x=None, objective=None, iterations=0)

    z = [F(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            z[bi] = rows[i][-1]
    x_exact = [z[j] - z[nv + j] for j in range(nv)]
    x = np.array([float(v) for v in x_exact])
    obj = sum((F(ci) * xi for ci, xi in zip(c, x_exact)), F(0))
    return LpResult(status=OPTIMAL, x=x, objective=float(obj), iterations=0, x_exact=x_exact)
