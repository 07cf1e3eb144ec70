"""LP core: random and structured batteries against an external oracle.

scipy.linprog (HiGHS) serves as the reference implementation for status
and objective; the package's own solver must also hand back a primal
point that satisfies the ORIGINAL rows within the published tolerance,
which is the property the selection layer depends on.  The exact
rational path is compared against the float path on integer data.
"""

from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from jetspace import DomainError, feasible_point, solve_lp, solve_lp_exact
from jetspace.lp import FEAS_TOL, INFEASIBLE, OPTIMAL, UNBOUNDED

_STATUS_FROM_SCIPY = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}


def _scipy_solve(c, a_ub, b_ub, a_eq=None, b_eq=None):
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(None, None),
        method="highs",
    )
    return _STATUS_FROM_SCIPY.get(res.status), res.fun


def _assert_primal_feasible(x, a_ub, b_ub, a_eq=None, b_eq=None):
    if a_ub is not None and len(b_ub):
        a_ub, b_ub = np.asarray(a_ub, dtype=float), np.asarray(b_ub, dtype=float)
        scale = np.maximum(1.0, np.abs(a_ub).max(axis=1) if a_ub.size else 1.0)
        scale = np.maximum(scale, np.abs(b_ub))
        assert float(((a_ub @ x - b_ub) / scale).max()) <= FEAS_TOL * 10
    if a_eq is not None and len(b_eq):
        a_eq, b_eq = np.asarray(a_eq, dtype=float), np.asarray(b_eq, dtype=float)
        scale = np.maximum(1.0, np.abs(a_eq).max(axis=1))
        scale = np.maximum(scale, np.abs(b_eq))
        assert float((np.abs(a_eq @ x - b_eq) / scale).max()) <= FEAS_TOL * 10


# -- hand cases --------------------------------------------------------


def test_known_optimum():
    # min x + 2y subject to x + y >= 1, x >= 0, y >= 0: optimum (1, 0).
    res = solve_lp([1.0, 2.0], a_ub=[[-1, -1], [-1, 0], [0, -1]], b_ub=[-1, 0, 0])
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-8)


def test_equalities_fold_in():
    # min x subject to x - y = 0 and x + y = 1: the single point (.5, .5).
    res = solve_lp([1.0, 0.0], a_eq=[[1, -1], [1, 1]], b_eq=[0, 1])
    assert res.status == OPTIMAL
    np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-9)


def test_infeasible_detected():
    res = solve_lp([1.0], a_ub=[[1], [-1]], b_ub=[-1, -2])  # x <= -1 and x >= 2
    assert res.status == INFEASIBLE
    assert res.x is None


def test_unbounded_detected():
    res = solve_lp([1.0], a_ub=[[1]], b_ub=[5.0])  # min x with only x <= 5
    assert res.status == UNBOUNDED


def test_no_rows_edge_cases():
    zero = solve_lp([0.0, 0.0])
    assert zero.status == OPTIMAL
    np.testing.assert_allclose(zero.x, [0.0, 0.0])
    assert solve_lp([1.0, 0.0]).status == UNBOUNDED


def test_feasibility_only_ignores_cost():
    res = solve_lp([1.0], a_ub=[[1], [-1]], b_ub=[3, -2], feasibility_only=True)
    assert res.status == OPTIMAL
    assert 2 - FEAS_TOL <= res.x[0] <= 3 + FEAS_TOL
    # The reported objective is still measured against the true cost.
    assert res.objective == pytest.approx(res.x[0])


def test_non_finite_data_rejected():
    with pytest.raises(DomainError):
        solve_lp([np.nan])
    with pytest.raises(DomainError):
        solve_lp([1.0], a_ub=[[np.inf]], b_ub=[1.0])
    with pytest.raises(DomainError):
        solve_lp([1.0], a_ub=[[1.0]], b_ub=[-np.inf])


def test_feasible_point_wrapper():
    x = feasible_point(a_ub=[[1, 0], [0, 1], [-1, 0], [0, -1]], b_ub=[1, 1, 0, 0])
    assert x is not None
    _assert_primal_feasible(x, [[1, 0], [0, 1], [-1, 0], [0, -1]], [1, 1, 0, 0])
    assert feasible_point(a_ub=[[1], [-1]], b_ub=[0, -1]) is None


# -- random battery vs scipy --------------------------------------------


def _random_lp(rng):
    nv = int(rng.integers(1, 8))
    n_ub = int(rng.integers(0, 12))
    n_eq = int(rng.integers(0, min(3, nv) + 1))
    c = rng.integers(-5, 6, nv).astype(float)
    a_ub = rng.normal(size=(n_ub, nv)).round(3)
    x0 = rng.uniform(-2, 2, nv)
    if rng.random() < 0.7:
        b_ub = a_ub @ x0 + rng.uniform(0, 2, n_ub)  # feasible by construction
    else:
        b_ub = rng.normal(size=n_ub)
    a_eq = rng.normal(size=(n_eq, nv)).round(3) if n_eq else None
    b_eq = (a_eq @ x0).round(6) if n_eq else None
    return c, a_ub, b_ub, a_eq, b_eq


def test_random_battery_matches_scipy():
    rng = np.random.default_rng(2024)
    counts = {OPTIMAL: 0, INFEASIBLE: 0, UNBOUNDED: 0}
    skipped = 0
    for _ in range(300):
        c, a_ub, b_ub, a_eq, b_eq = _random_lp(rng)
        want, want_obj = _scipy_solve(c, a_ub if len(b_ub) else None, b_ub if len(b_ub) else None, a_eq, b_eq)
        if want is None:  # oracle could not classify (rare HiGHS status 4)
            skipped += 1
            continue
        res = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
        assert res.status == want
        counts[want] += 1
        if want == OPTIMAL:
            scale = max(1.0, abs(want_obj))
            assert res.objective == pytest.approx(want_obj, abs=1e-6 * scale)
            _assert_primal_feasible(res.x, a_ub, b_ub, a_eq, b_eq)
    assert skipped <= 10
    assert counts[OPTIMAL] >= 100 and counts[INFEASIBLE] >= 10 and counts[UNBOUNDED] >= 10


def test_badly_scaled_rows_stay_verified():
    """Rows spanning twelve orders of magnitude: the regression class where
    a drifting tableau once reported infeasible points as optimal."""
    rng = np.random.default_rng(77)
    for _ in range(60):
        nv = int(rng.integers(2, 6))
        n_ub = int(rng.integers(4, 16))
        powers = rng.uniform(-6, 0, n_ub)
        a_ub = rng.normal(size=(n_ub, nv)) * (10.0 ** powers)[:, None]
        x0 = rng.uniform(-1, 1, nv)
        b_ub = a_ub @ x0 + rng.uniform(0, 1, n_ub) * (10.0 ** powers)
        c = rng.normal(size=nv)
        want, want_obj = _scipy_solve(c, a_ub, b_ub)
        res = solve_lp(c, a_ub, b_ub)
        if want is None:
            continue
        assert res.status == want
        if want == OPTIMAL:
            _assert_primal_feasible(res.x, a_ub, b_ub)
            assert res.objective == pytest.approx(want_obj, abs=1e-6 * max(1.0, abs(want_obj)))


# -- exact rational path -------------------------------------------------


def test_exact_known_optimum():
    res = solve_lp_exact([1, 2], a_ub=[[-1, -1], [-1, 0], [0, -1]], b_ub=[-1, 0, 0])
    assert res.status == OPTIMAL
    assert res.x_exact is not None
    assert res.x_exact[0] == Fraction(1) and res.x_exact[1] == Fraction(0)
    assert res.objective == pytest.approx(1.0)


def test_exact_agrees_with_float_on_integer_data():
    rng = np.random.default_rng(5)
    agreements = 0
    for _ in range(40):
        nv = int(rng.integers(1, 5))
        n_ub = int(rng.integers(1, 8))
        c = rng.integers(-4, 5, nv).astype(float)
        a_ub = rng.integers(-4, 5, (n_ub, nv)).astype(float)
        x0 = rng.integers(-2, 3, nv)
        b_ub = (a_ub @ x0 + rng.integers(0, 4, n_ub)).astype(float)
        f = solve_lp(c, a_ub, b_ub)
        e = solve_lp_exact(c, a_ub, b_ub)
        assert f.status == e.status
        if f.status == OPTIMAL:
            assert f.objective == pytest.approx(e.objective, abs=1e-7 * max(1.0, abs(e.objective)))
            agreements += 1
    assert agreements >= 15


def test_exact_detects_exact_infeasibility():
    res = solve_lp_exact([0], a_ub=[[1], [-1]], b_ub=[0, -1e-9], feasibility_only=True)
    # x <= 0 and x >= 1e-9 has no rational solution.
    assert res.status == INFEASIBLE
