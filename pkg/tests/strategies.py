"""Hypothesis strategies and seeded generators shared by the tests.

Everything here builds domain objects that are valid by construction:
moduli from both supported families (piecewise-linear knots generated
with nonincreasing slopes so concavity never needs filtering), then
jets, chains, and fields over the small spaces the properties quantify
over.  Field points are spread along the first coordinate so pairwise
distinctness holds without rejection.  The plain-rng generators at the
bottom feed the bulk batteries and the acceptance suite.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from jetspace import ConvexSetSpec, Jet, JetField, MetricCtx, Modulus, Poly, Space
from jetspace.metric import two_point_delta

SPACES = (Space(1, 1), Space(1, 2), Space(2, 1), Space(2, 2))

_coeff = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
_coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
_jitter = st.floats(min_value=-0.5, max_value=0.5, allow_nan=False, allow_infinity=False)


@st.composite
def power_moduli(draw) -> Modulus:
    p = draw(st.floats(min_value=0.1, max_value=1.0))
    return Modulus.power(p)


@st.composite
def pl_moduli(draw) -> Modulus:
    pieces = draw(st.integers(min_value=1, max_value=4))
    slopes = sorted(
        draw(st.lists(st.floats(min_value=0.05, max_value=2.0), min_size=pieces, max_size=pieces)),
        reverse=True,
    )
    widths = draw(st.lists(st.floats(min_value=0.2, max_value=1.5), min_size=pieces, max_size=pieces))
    knots = [(0.0, 0.0)]
    for s, w in zip(slopes, widths):
        t0, v0 = knots[-1]
        knots.append((t0 + w, v0 + s * w))
    return Modulus.piecewise_linear(knots)


moduli = st.one_of(power_moduli(), pl_moduli())


@st.composite
def contexts(draw, spaces=SPACES) -> MetricCtx:
    return MetricCtx(draw(st.sampled_from(spaces)), draw(moduli))


@st.composite
def jets(draw, ctx: MetricCtx) -> Jet:
    space = ctx.space
    coeffs = draw(st.lists(_coeff, min_size=space.dim, max_size=space.dim))
    base = draw(st.lists(_coord, min_size=space.n, max_size=space.n))
    return Jet(Poly.from_coeffs(space, coeffs), tuple(base))


@st.composite
def jet_pairs(draw) -> tuple[MetricCtx, Jet, Jet]:
    ctx = draw(contexts())
    return ctx, draw(jets(ctx)), draw(jets(ctx))


@st.composite
def jet_triples(draw) -> tuple[MetricCtx, Jet, Jet, Jet]:
    ctx = draw(contexts())
    return ctx, draw(jets(ctx)), draw(jets(ctx)), draw(jets(ctx))


@st.composite
def jet_chains(draw, min_len: int = 3, max_len: int = 5) -> tuple[MetricCtx, list[Jet]]:
    ctx = draw(contexts())
    m = draw(st.integers(min_value=min_len, max_value=max_len))
    return ctx, [draw(jets(ctx)) for _ in range(m)]


@st.composite
def separated_points(draw, n: int, min_points: int = 2, max_points: int = 5) -> np.ndarray:
    m = draw(st.integers(min_value=min_points, max_value=max_points))
    pts = np.zeros((m, n))
    for i in range(m):
        pts[i] = draw(st.lists(_jitter, min_size=n, max_size=n))
        pts[i, 0] += 1.5 * i  # spacing >= 0.5 along the first coordinate
    return pts


@st.composite
def fields(draw, min_points: int = 2, max_points: int = 5) -> JetField:
    ctx = draw(contexts())
    space = ctx.space
    pts = draw(separated_points(space.n, min_points, max_points))
    polys = tuple(
        Poly.from_coeffs(space, draw(st.lists(_coeff, min_size=space.dim, max_size=space.dim)))
        for _ in range(pts.shape[0])
    )
    return JetField(ctx, pts, polys)


# -- seeded generators (numpy rng, no hypothesis) -----------------------------


def unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def contraction_chain(ctx: MetricCtx, rng: np.random.Generator, m: int):
    """A chain satisfying the contraction hypotheses, with its lam.

    Interpolates bases along a segment and damps polynomial increments
    until every link delta sits at its modulus bound; lam is then read
    off the measured length and modulus ratios.
    """
    n, dim = ctx.space.n, ctx.space.dim
    a = rng.uniform(-1, 1, n)
    b = a + rng.uniform(0.3, 1.5) * unit_vector(rng, n)
    ts = np.sort(np.concatenate([[0.0], rng.uniform(0.05, 0.95, m - 2), [1.0]]))
    bases = a[None, :] + ts[:, None] * (b - a)[None, :]
    coeffs = np.cumsum(np.vstack([rng.uniform(-1, 1, dim), rng.uniform(-0.2, 0.2, (m - 1, dim))]), axis=0)

    def jet_at(i: int, damp: float) -> Jet:
        return Jet(Poly.from_coeffs(ctx.space, coeffs[0] + damp * (coeffs[i] - coeffs[0])), tuple(bases[i]))

    def chain_from(damp: float):
        return [jet_at(i, damp) for i in range(m)]

    # Each link delta is monotone in the damping factor (the difference
    # coefficients scale linearly with it), so the smallest power of 1/2
    # fitting all links is the max of per-link requirements; carrying the
    # exponent across links finds it without re-checking settled links.
    caps = [ctx.modulus(float(np.linalg.norm(bases[i] - bases[i + 1]))) for i in range(m - 1)]
    halvings = 0
    for i in range(m - 1):
        while halvings < 60 and two_point_delta(ctx, jet_at(i, 0.5 ** halvings), jet_at(i + 1, 0.5 ** halvings)) > caps[i]:
            halvings += 1
    chain = chain_from(0.5 ** halvings)
    lengths = [float(np.linalg.norm(s.x - t.x)) for s, t in zip(chain, chain[1:])]
    end = float(np.linalg.norm(chain[0].x - chain[-1].x))
    lam = max(
        1.0,
        sum(lengths) / end,
        sum(ctx.modulus(l) for l in lengths) / ctx.modulus(end),
    )
    return chain, lam * (1 + 1e-12)


def random_polytope(rng: np.random.Generator, d: int, facets: int, anchor=None) -> ConvexSetSpec:
    """Halfspaces pushed a positive margin away from an interior anchor."""
    anchor = rng.uniform(-1, 1, d) if anchor is None else anchor
    normals = rng.normal(size=(facets, d))
    offsets = normals @ anchor + rng.uniform(0.05, 1.0, facets)
    return ConvexSetSpec(normals, offsets)


def random_segment(rng: np.random.Generator, d: int):
    """A unit segment of affine dimension 1 in ambient dimension d,
    realized by direction bounds plus orthogonal equalities; returns the
    spec and a point-on-segment sampler."""
    a = rng.uniform(-1, 1, d)
    direction = unit_vector(rng, d)
    basis = np.linalg.svd(direction[None, :])[2][1:]
    segment = ConvexSetSpec(
        np.vstack([direction, -direction]),
        np.array([direction @ a + 1.0, -(direction @ a)]),
        a_eq=basis,
        b_eq=basis @ a,
        declared_dim=1,
    )
    return segment, lambda: a + rng.uniform(0, 1) * direction
