"""Moduli of continuity and the per-order rescalings.

Oracles: power moduli have closed forms for everything, so bisection
results can be checked against algebra; for arbitrary moduli the
defining identity phi(s**gap * w(s)) = w(s) pins the rescaling without
reference to the inversion route that computed it.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetspace import (
    BracketError,
    CapProximityWarning,
    DomainError,
    InvariantError,
    Modulus,
    PhiAlpha,
    invert_monotone,
    modulus_eval,
    phi_alpha_eval,
    phi_alpha_inverse_bound,
)
from strategies import moduli

# -- modulus families --------------------------------------------------


def test_power_values():
    m = Modulus.power(0.5)
    assert m(0.0) == 0.0
    assert m(4.0) == pytest.approx(2.0)
    assert Modulus.power(1.0)(0.7) == pytest.approx(0.7)


def test_power_validation():
    for bad in (0.0, -0.5, 1.5, math.nan, math.inf):
        with pytest.raises(DomainError):
            Modulus.power(bad)


def test_pl_values():
    m = Modulus.piecewise_linear([(0, 0), (1, 2), (3, 3)])
    assert m(0.5) == pytest.approx(1.0)
    assert m(2.0) == pytest.approx(2.5)
    # Beyond the last knot the final slope keeps going.
    assert m(5.0) == pytest.approx(3.0 + 0.5 * 2.0)


def test_pl_validation():
    with pytest.raises(DomainError):
        Modulus.piecewise_linear([(0.5, 0), (1, 1)])  # first knot not (0, 0)
    with pytest.raises(DomainError):
        Modulus.piecewise_linear([(0, 0), (1, 1), (1, 2)])  # abscissae not increasing
    with pytest.raises(DomainError):
        Modulus.piecewise_linear([(0, 0), (1, 2), (2, 1)])  # values decrease
    with pytest.raises(DomainError):
        Modulus.piecewise_linear([(0, 0), (1, 1), (2, 4)])  # slopes increase: not concave
    with pytest.raises(DomainError):
        Modulus.piecewise_linear([(0, 0)])  # single knot


def test_regularization_adds_strictness():
    m = Modulus.piecewise_linear([(0, 0), (1, 1), (2, 1)], strictness_eps=1e-3, t_cap=2.0)
    assert m(1.5) == pytest.approx(1.0 + 1e-3 * 1.5)
    assert m(10.0) == pytest.approx(1.0 + 1e-3 * 2.0)  # min(t, t_cap) saturates


def test_flat_tail_defaults_to_regularized():
    m = Modulus.piecewise_linear([(0, 0), (1, 1), (2, 1)])
    assert m.strictness_eps == pytest.approx(1e-9)
    assert math.isfinite(m.sup_value)
    assert not m.is_strictly_increasing  # certified only up to t_cap
    rising = Modulus.piecewise_linear([(0, 0), (1, 1), (2, 1.5)])
    assert rising.strictness_eps == 0.0
    assert rising.is_strictly_increasing
    assert rising.sup_value == math.inf


def test_negative_argument_rejected():
    m = Modulus.power(0.5)
    with pytest.raises(DomainError):
        m(-1e-9)
    with pytest.raises(DomainError):
        modulus_eval(m, -1.0)


@given(moduli, st.lists(st.floats(min_value=0.0, max_value=8.0), min_size=1, max_size=6))
def test_json_round_trip_preserves_values(m, ts):
    back = Modulus.from_json(m.to_json())
    for t in ts:
        assert back(t) == pytest.approx(m(t), rel=1e-12, abs=1e-300)


@given(moduli, st.floats(min_value=0.0, max_value=4.0), st.floats(min_value=0.0, max_value=4.0))
def test_modulus_monotone_and_subadditive(m, t0, t1):
    lo, hi = sorted((t0, t1))
    assert m(lo) <= m(hi) + 1e-12
    # Concavity with w(0) = 0 gives subadditivity.
    assert m(t0 + t1) <= m(t0) + m(t1) + 1e-9 * max(1.0, m(t0 + t1))


def test_array_evaluation_matches_scalar():
    m = Modulus.piecewise_linear([(0, 0), (1, 2), (3, 3)], strictness_eps=1e-6)
    ts = np.linspace(0.0, 5.0, 17)
    np.testing.assert_allclose(m(ts), [m(float(t)) for t in ts], rtol=1e-15)


# -- certified inversion ----------------------------------------------


def test_invert_monotone_square():
    root = invert_monotone(lambda s: s * s, 9.0, (0.0, 4.0))
    assert root == pytest.approx(3.0, rel=1e-10)


def test_invert_monotone_rejects_bad_bracket():
    with pytest.raises(DomainError):
        invert_monotone(lambda s: s, 1.0, (2.0, 2.0))
    with pytest.raises(BracketError):
        invert_monotone(lambda s: s, 5.0, (0.0, 1.0))


def test_invert_monotone_detects_non_monotone_samples():
    # Endpoint values bracket the target, but the first midpoint dips below.
    with pytest.raises(InvariantError):
        invert_monotone(lambda s: (s - 1.0) ** 2, 1.5, (0.0, 2.5))


# -- rescalings --------------------------------------------------------


def test_phi_closed_form_hand_values():
    # k = 1, order 0, w(t) = t: g(s) = s * s, so phi(t) = sqrt(t).
    phi = PhiAlpha(Modulus.power(1.0), k=1, order=0)
    assert phi(0.25) == pytest.approx(0.5)
    # k = 2, order 0, w(t) = t: g(s) = s**3, so phi(t) = t**(1/3).
    phi = PhiAlpha(Modulus.power(1.0), k=2, order=0)
    assert phi(0.125) == pytest.approx(0.5)


def test_phi_top_order_is_identity():
    phi = PhiAlpha(Modulus.power(0.5), k=2, order=2)
    for t in (0.0, 0.3, 2.7):
        assert phi(t) == t


def test_phi_order_validation():
    m = Modulus.power(1.0)
    with pytest.raises(DomainError):
        PhiAlpha(m, k=1, order=2)
    with pytest.raises(DomainError):
        PhiAlpha(m, k=1, order=-1)
    with pytest.raises(DomainError):
        PhiAlpha(m, k=0, order=0)
    with pytest.raises(DomainError):
        PhiAlpha(m, k=1, order=0)(-0.1)


@given(
    moduli,
    st.integers(min_value=1, max_value=3),
    st.data(),
    st.floats(min_value=1e-6, max_value=3.0),
)
def test_phi_inverse_bound_identity(m, k, data, w):
    """phi(g(w)) = w(w) with g(w) = w**gap * w(w): the defining equation.

    For piecewise-linear moduli this exercises the certified bisection,
    for power moduli the closed form; the identity itself is route-free.
    """
    order = data.draw(st.integers(min_value=0, max_value=k))
    phi = PhiAlpha(m, k=k, order=order)
    u = phi_alpha_inverse_bound(phi, w)
    assert phi_alpha_eval(phi, u) == pytest.approx(m(w), rel=1e-8)


@given(
    moduli,
    st.integers(min_value=1, max_value=3),
    st.data(),
    st.floats(min_value=0.0, max_value=5.0),
    st.floats(min_value=0.0, max_value=5.0),
)
def test_phi_monotone_with_zero_at_zero(m, k, data, t0, t1):
    order = data.draw(st.integers(min_value=0, max_value=k))
    phi = PhiAlpha(m, k=k, order=order)
    assert phi(0.0) == 0.0
    lo, hi = sorted((t0, t1))
    assert phi(lo) <= phi(hi) + 1e-10 * max(1.0, phi(hi))


@given(moduli, st.integers(min_value=1, max_value=2), st.data())
@settings(max_examples=40)
def test_phi_array_matches_scalar(m, k, data):
    order = data.draw(st.integers(min_value=0, max_value=k))
    phi = PhiAlpha(m, k=k, order=order)
    ts = np.linspace(0.0, 4.0, 13)
    got = phi.eval_array(ts)
    want = np.array([phi(float(t)) for t in ts])
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)


def test_phi_bisection_agrees_with_direct_inversion():
    """Evaluate phi through invert_monotone by hand and compare."""
    m = Modulus.piecewise_linear([(0, 0), (1, 2), (3, 3)])
    phi = PhiAlpha(m, k=2, order=1)  # gap = 1: g(s) = s * w(s)
    for t in (0.01, 0.6, 2.0, 7.5):
        s = invert_monotone(lambda s: s * m(s), t, (1e-12, 10.0))
        assert phi(t) == pytest.approx(m(s), rel=1e-9)


def test_phi_warns_near_the_modulus_cap():
    m = Modulus.piecewise_linear([(0, 0), (1, 1), (2, 1)])  # flat tail, default eps
    phi = PhiAlpha(m, k=1, order=0)
    with pytest.warns(CapProximityWarning):
        phi(60.0)  # g(60) ~ 60: the preimage sits deep in the flat tail
