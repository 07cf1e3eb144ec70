"""Two-point metric, certified intervals, and the chain estimates.

Oracles: the k = 1, n = 1 hand evaluation (terms w(1) = 1, sqrt(0) = 0,
sqrt(1) = 1, identity(1) = 1, so the max is 1), the exact same-polynomial
value w(|x - y|), and inequality properties quantified with hypothesis.
All sandwich factors are e**n, so tolerances scale with the compared
values.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetspace import (
    DegenerateChainError,
    DomainError,
    Jet,
    MetricCtx,
    Modulus,
    Poly,
    Space,
    chain_contraction_check,
    chain_metric_bounds,
    chain_upper_bound_search,
    jet_scale,
    one_point_delta,
    two_point_delta,
)
from strategies import contexts, contraction_chain, jet_chains, jet_pairs, jet_triples, jets

_TOL = 1e-9


def _tol(*vals: float) -> float:
    return _TOL * max(1.0, *map(abs, vals))


# -- hand values -------------------------------------------------------


def test_equal_jets_have_zero_delta(ctx11):
    T = Jet(Poly.from_coeffs(ctx11.space, [0.3, -1.2]), (0.7,))
    assert two_point_delta(ctx11, T, T) == 0.0
    assert one_point_delta(ctx11, T, T) == 0.0
    iv = chain_metric_bounds(ctx11, T, T)
    assert (iv.lower, iv.upper) == (0.0, 0.0)


def test_hand_example_value_is_one(ctx11):
    # P0 = 0 at x0 = 0 against P1(t) = t at x1 = 1 with w(t) = t:
    # terms {w(1), phi0(|P0-P1|(0)) = 0, phi0(1) = 1, phi1(1) = 1} -> 1.
    T0 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 0.0]), (0.0,))
    T1 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 1.0]), (1.0,))
    assert two_point_delta(ctx11, T0, T1) == pytest.approx(1.0)
    assert one_point_delta(ctx11, T0, T1) == pytest.approx(1.0)
    iv = chain_metric_bounds(ctx11, T0, T1)
    assert iv.lower == pytest.approx(math.exp(-1))
    assert iv.upper == pytest.approx(1.0)


@given(contexts(), st.data())
def test_same_polynomial_gives_modulus_of_distance(ctx, data):
    T0 = data.draw(jets(ctx))
    shift = data.draw(
        st.lists(
            st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
            min_size=ctx.space.n,
            max_size=ctx.space.n,
        )
    )
    T1 = Jet(T0.poly, tuple(b + s for b, s in zip(T0.base, shift)))
    dist = math.hypot(*(a - b for a, b in zip(T0.base, T1.base)))
    assert two_point_delta(ctx, T0, T1) == pytest.approx(ctx.modulus(dist), rel=1e-12, abs=1e-300)


def test_mismatched_spaces_rejected(ctx11):
    other = MetricCtx(Space(1, 2), Modulus.power(1.0))
    T = Jet(Poly.from_coeffs(other.space, [0.0, 0.0, 0.0]), (0.0, 0.0))
    with pytest.raises(DomainError):
        two_point_delta(ctx11, T, T)


# -- metric properties -------------------------------------------------


@given(jet_pairs())
def test_symmetry_is_exact(pair):
    ctx, T0, T1 = pair
    assert two_point_delta(ctx, T0, T1) == two_point_delta(ctx, T1, T0)


@given(jet_pairs())
def test_positivity_on_distinct_jets(pair):
    ctx, T0, T1 = pair
    d = two_point_delta(ctx, T0, T1)
    assert d >= 0.0
    distinct = T0.base != T1.base or any(
        abs(a - b) > 1e-12 for a, b in zip(T0.poly.coeffs, T1.poly.coeffs)
    )
    if distinct and ctx.modulus.is_strictly_increasing:
        assert d > 0.0


@given(jet_triples())
def test_quasi_triangle_inequality(triple):
    ctx, T0, T1, T2 = triple
    e_n = ctx.constants.e_n
    d02 = two_point_delta(ctx, T0, T2)
    via = two_point_delta(ctx, T0, T1) + two_point_delta(ctx, T1, T2)
    assert d02 <= e_n * via + _tol(d02, via)


@given(jet_pairs(), st.floats(min_value=1.0, max_value=5.0))
def test_scaling_monotonicity(pair, lam):
    ctx, T0, T1 = pair
    d = two_point_delta(ctx, T0, T1)
    d_scaled = two_point_delta(ctx, jet_scale(lam, T0), jet_scale(lam, T1))
    assert d_scaled <= lam * d + _tol(d_scaled, lam * d)


@given(jet_pairs())
def test_one_point_sandwich(pair):
    ctx, T0, T1 = pair
    op = one_point_delta(ctx, T0, T1)
    tp = two_point_delta(ctx, T0, T1)
    assert op <= tp + _tol(op, tp)
    assert tp <= ctx.constants.e_n * op + _tol(tp, op)


@given(jet_chains())
def test_chain_lower_bound_inequality(chain):
    # Lifting every chain jet by e**n makes the link sum dominate the
    # endpoint delta: the inequality behind the interval's lower end.
    ctx, links = chain
    e_n = ctx.constants.e_n
    lifted = [jet_scale(e_n, T) for T in links]
    total = sum(two_point_delta(ctx, a, b) for a, b in zip(lifted, lifted[1:]))
    direct = two_point_delta(ctx, links[0], links[-1])
    assert total >= direct - _tol(total, direct)


@given(jet_pairs())
def test_interval_shape(pair):
    ctx, T0, T1 = pair
    iv = chain_metric_bounds(ctx, T0, T1)
    assert iv.upper == two_point_delta(ctx, T0, T1)
    assert iv.lower == pytest.approx(iv.upper * math.exp(-ctx.space.n), rel=1e-12)


# -- chain search ------------------------------------------------------


def test_search_with_single_link_returns_delta(ctx11):
    T0 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 0.0]), (0.0,))
    T1 = Jet(Poly.from_coeffs(ctx11.space, [1.0, -0.5]), (0.8,))
    d = two_point_delta(ctx11, T0, T1)
    assert chain_upper_bound_search(ctx11, T0, T1, max_links=1, restarts=3, seed=5) == d


def test_search_is_deterministic_per_seed(ctx11):
    T0 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 1.0]), (0.0,))
    T1 = Jet(Poly.from_coeffs(ctx11.space, [2.0, -1.0]), (1.5,))
    a = chain_upper_bound_search(ctx11, T0, T1, max_links=3, restarts=4, seed=42)
    b = chain_upper_bound_search(ctx11, T0, T1, max_links=3, restarts=4, seed=42)
    assert a == b


def test_search_respects_the_sandwich():
    rng = np.random.default_rng(20)
    ctx = MetricCtx(Space(2, 2), Modulus.power(0.5))
    dim, n = ctx.space.dim, ctx.space.n
    for _ in range(25):
        T0 = Jet(Poly.from_coeffs(ctx.space, rng.uniform(-2, 2, dim)), tuple(rng.uniform(-1, 1, n)))
        T1 = Jet(Poly.from_coeffs(ctx.space, rng.uniform(-2, 2, dim)), tuple(rng.uniform(-1, 1, n)))
        d = two_point_delta(ctx, T0, T1)
        best = chain_upper_bound_search(ctx, T0, T1, max_links=3, restarts=3, seed=int(rng.integers(1 << 30)))
        assert best <= d + _tol(d)
        assert best >= d * math.exp(-n) - _tol(d)


def test_search_never_beats_exact_same_polynomial_value(ctx11):
    # d((P, x), (P, y)) = w(|x - y|) exactly, so no chain can do better.
    P = Poly.from_coeffs(ctx11.space, [0.4, 1.1])
    T0, T1 = Jet(P, (0.0,)), Jet(P, (2.0,))
    exact = ctx11.modulus(2.0)
    for seed in range(10):
        best = chain_upper_bound_search(ctx11, T0, T1, max_links=4, restarts=4, seed=seed)
        assert best >= exact - _tol(exact)


# -- chain contraction -------------------------------------------------


def test_two_element_chain_contracts(ctx11):
    T0 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 0.5]), (0.0,))
    T1 = Jet(Poly.from_coeffs(ctx11.space, [0.2, 0.4]), (1.0,))
    rep = chain_contraction_check(ctx11, [T0, T1], lam=1.0)
    assert rep.tau == pytest.approx(math.exp(2))
    assert rep.conclusion_holds


def test_collinear_interpolated_chain(ctx11):
    # Bases 0, 0.5, 1 with the same polynomial: link sums equal the
    # endpoint quantities exactly, so lam = 1 hypotheses hold; for w(t) = t
    # the modulus sums are also exact.
    P = Poly.from_coeffs(ctx11.space, [0.7, -0.2])
    chain = [Jet(P, (0.0,)), Jet(P, (0.5,)), Jet(P, (1.0,))]
    rep = chain_contraction_check(ctx11, chain, lam=1.0)
    assert rep.hypotheses_hold
    assert rep.conclusion_holds
    assert rep.length_ratio == pytest.approx(1.0)
    assert rep.modulus_ratio == pytest.approx(1.0)


def test_contraction_validation(ctx11):
    T0 = Jet(Poly.from_coeffs(ctx11.space, [0.0, 0.0]), (0.0,))
    T1 = Jet(Poly.from_coeffs(ctx11.space, [1.0, 0.0]), (1.0,))
    with pytest.raises(DomainError):
        chain_contraction_check(ctx11, [T0], lam=1.0)
    with pytest.raises(DomainError):
        chain_contraction_check(ctx11, [T0, T1], lam=0.5)
    loop = [T0, T1, Jet(T0.poly, (0.0,))]
    with pytest.raises(DegenerateChainError):
        chain_contraction_check(ctx11, loop, lam=2.0)


@pytest.mark.parametrize("k,n", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_contraction_battery(k, n):
    rng = np.random.default_rng(1000 + 10 * k + n)
    ctx = MetricCtx(Space(k, n), Modulus.power(rng.choice([0.5, 1.0])))
    held = 0
    for _ in range(40):
        chain, lam = contraction_chain(ctx, rng, int(rng.integers(2, 6)))
        rep = chain_contraction_check(ctx, chain, lam)
        assert rep.hypotheses_hold, "generator must hand over valid hypotheses"
        assert rep.conclusion_holds
        held += 1
    assert held == 40
