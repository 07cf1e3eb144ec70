"""The jet-space metric layer: two-point deltas, certified intervals, chains.

The two-point quantity delta(T0, T1) is the maximum of the base-distance
modulus and the rescaled derivative differences of the two polynomials,
measured at both base points.  It is symmetric and satisfies a quasi
triangle inequality up to e^n, and the chain infimum it generates is
sandwiched between e^{-n} * delta and delta.  That sandwich is what
:func:`chain_metric_bounds` certifies; :func:`chain_upper_bound_search`
additionally explores multi-link chains heuristically and can only lower
the upper bound, never break the certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateChainError, DomainError
from .jets import Constants, Jet, Poly, Space, jet_scale
from .moduli import Modulus, PhiAlpha
from .numerics import golden_section

DEFAULT_RESTARTS = 8
DEFAULT_MAX_LINKS = 4


class MetricCtx:
    """Bundles a jet space with a modulus and the per-order rescalings.

    The table ``phi_table[j]`` holds the rescaling for derivative order j;
    the top order is the identity.  Construction precomputes everything
    needed to evaluate deltas in a handful of vectorized operations.
    """

    def __init__(self, space: Space, modulus: Modulus):
        self.space = space
        self.modulus = modulus
        self.constants = Constants(space.k, space.n)
        self.phi_table = tuple(PhiAlpha(modulus, space.k, j) for j in range(space.k + 1))
        self._orders = space.orders
        if modulus.kind == "power" and modulus.strictness_eps == 0.0:
            gaps = space.k - self._orders
            self._fast_expo = modulus.p / (gaps + modulus.p)
        else:
            self._fast_expo = None

    def rescale_rows(self, vals: np.ndarray) -> np.ndarray:
        """Apply phi_{|alpha|} along the last axis of a derivative table."""
        if self._fast_expo is not None:
            return np.power(vals, self._fast_expo)
        out = np.empty_like(vals)
        for j in range(self.space.k + 1):
            rows = self._orders == j
            if np.any(rows):
                phi = self.phi_table[j]
                out[..., rows] = phi.eval_array(vals[..., rows].ravel()).reshape(vals[..., rows].shape)
        return out

    def pair_rhs(self, dist: float) -> np.ndarray:
        """Per-row bound dist^(k - |alpha|) * modulus(dist) used by the
        Whitney-Glaeser difference condition."""
        gaps = self.space.k - self._orders
        return np.power(dist, gaps) * self.modulus(dist)

    def __repr__(self):
        return f"MetricCtx(k={self.space.k}, n={self.space.n}, modulus={self.modulus.kind})"


@dataclass(frozen=True)
class MetricInterval:
    """A certified enclosure [lower, upper] of the chain metric."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper or math.isclose(self.lower, self.upper)):
            raise DomainError(f"interval must satisfy 0 <= lower <= upper, got {self!r}")


def _check_jet(ctx: MetricCtx, T: Jet):
    if T.space != ctx.space:
        raise DomainError(
            f"jet lives in k={T.space.k}, n={T.space.n} but context expects "
            f"k={ctx.space.k}, n={ctx.space.n}"
        )


def _base_dist(x0: np.ndarray, x1: np.ndarray) -> float:
    # Plain norm squares the components, which underflows for distances
    # below ~1e-154 and would break "zero iff equal"; rescale first.
    d = np.abs(x0 - x1)
    m = float(d.max())
    if m == 0.0 or not math.isfinite(m):
        return m
    return m * float(np.linalg.norm(d / m))


def _delta_arrays(ctx: MetricCtx, c0: np.ndarray, x0: np.ndarray, c1: np.ndarray, x1: np.ndarray) -> float:
    dist = _base_dist(x0, x1)
    dc = c0 - c1
    mats = ctx.space.derivative_matrices(np.stack([x0, x1]))
    vals = np.abs(mats @ dc)
    return max(float(ctx.modulus(dist)), float(ctx.rescale_rows(vals).max()))


def two_point_delta(ctx: MetricCtx, T0: Jet, T1: Jet) -> float:
    """max of modulus(base distance) and all rescaled derivative differences,
    evaluated at both base points.  Symmetric; zero exactly on equal jets
    when the modulus is strictly increasing."""
    _check_jet(ctx, T0)
    _check_jet(ctx, T1)
    return _delta_arrays(ctx, T0.poly.vec, T0.x, T1.poly.vec, T1.x)


def one_point_delta(ctx: MetricCtx, T0: Jet, T1: Jet) -> float:
    """The one-basepoint variant: derivative differences only at T0's base.
    Sandwiched between two_point_delta / e^n and two_point_delta."""
    _check_jet(ctx, T0)
    _check_jet(ctx, T1)
    dist = _base_dist(T0.x, T1.x)
    dc = T0.poly.vec - T1.poly.vec
    vals = np.abs(ctx.space.derivative_matrix(T0.x) @ dc)
    return max(float(ctx.modulus(dist)), float(ctx.rescale_rows(vals).max()))


def chain_metric_bounds(ctx: MetricCtx, T0: Jet, T1: Jet) -> MetricInterval:
    """Certified enclosure of the chain metric: [e^{-n} * delta, delta]."""
    d = two_point_delta(ctx, T0, T1)
    return MetricInterval(lower=d / ctx.constants.e_n, upper=d)


def chain_upper_bound_search(
    ctx: MetricCtx,
    T0: Jet,
    T1: Jet,
    max_links: int = DEFAULT_MAX_LINKS,
    restarts: int = DEFAULT_RESTARTS,
    seed: int | None = None,
) -> float:
    """Heuristic chain-sum minimization over intermediate jets.

    Starts each chain length from the linear interpolation of coefficients
    and base points, perturbs it per restart with a seeded generator, and
    refines coordinates by golden-section sweeps.  The one-link chain is
    always a candidate, so the result never exceeds two_point_delta; no
    chain sum can undercut the certified lower bound except by rounding.
    """
    _check_jet(ctx, T0)
    _check_jet(ctx, T1)
    if max_links < 1:
        raise DomainError("max_links must be >= 1")
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    d1 = two_point_delta(ctx, T0, T1)
    if max_links == 1 or d1 == 0.0:
        return d1
    rng = np.random.default_rng(seed)
    c0, c1 = T0.poly.vec, T1.poly.vec
    x0, x1 = T0.x, T1.x
    dim = ctx.space.dim
    width = dim + ctx.space.n
    scale = 0.25 * (float(np.abs(c0 - c1).max(initial=0.0)) + float(np.abs(x0 - x1).max(initial=0.0)) + 1e-3)

    def objective(theta: np.ndarray, links: int) -> float:
        total = 0.0
        pc, px = c0, x0
        for i in range(links - 1):
            seg = theta[i * width : (i + 1) * width]
            cc, cx = seg[:dim], seg[dim:]
            total += _delta_arrays(ctx, pc, px, cc, cx)
            pc, px = cc, cx
        return total + _delta_arrays(ctx, pc, px, c1, x1)

    best = d1
    for links in range(2, max_links + 1):
        fractions = np.arange(1, links) / links
        base_theta = np.concatenate(
            [np.concatenate([c0 + f * (c1 - c0), x0 + f * (x1 - x0)]) for f in fractions]
        )
        for attempt in range(restarts):
            theta = base_theta.copy()
            if attempt > 0:
                theta = theta + rng.normal(scale=scale, size=theta.shape)
            value = objective(theta, links)
            for idx in range(theta.size):
                lo, hi = theta[idx] - scale, theta[idx] + scale

                def line(v: float, _idx=idx) -> float:
                    saved = theta[_idx]
                    theta[_idx] = v
                    out = objective(theta, links)
                    theta[_idx] = saved
                    return out

                arg, val = golden_section(line, lo, hi, iters=6)
                if val < value:
                    theta[idx] = arg
                    value = val
            if value < best:
                best = value
    return min(best, d1)


@dataclass(frozen=True)
class ChainContractionReport:
    """Outcome of the chain contraction check."""

    hypotheses_hold: bool
    conclusion_holds: bool
    tau: float
    link_deltas: tuple[float, ...]
    length_ratio: float
    modulus_ratio: float
    endpoint_delta_scaled: float
    endpoint_modulus: float


def chain_contraction_check(ctx: MetricCtx, chain: Sequence[Jet], lam: float) -> ChainContractionReport:
    """Verify the chain contraction estimate on a concrete chain.

    Hypotheses (conservative, using the two-point delta as a stand-in for
    the chain metric it dominates): every link satisfies
    delta <= modulus(link length), total length <= lam * endpoint length,
    and total modulus <= lam * modulus(endpoint length).  Conclusion
    checked: delta of the endpoint jets scaled down by
    tau = e^{2n} * lam^(k+1) stays below modulus(endpoint length).
    """
    chain = list(chain)
    if len(chain) < 2:
        raise DomainError("a chain needs at least two jets")
    lam = float(lam)
    if lam < 1.0:
        raise DomainError("lam must be >= 1")
    for T in chain:
        _check_jet(ctx, T)
    link_len = [_base_dist(a.x, b.x) for a, b in zip(chain, chain[1:])]
    end_len = _base_dist(chain[0].x, chain[-1].x)
    if end_len == 0.0 and sum(link_len) > 0.0:
        raise DegenerateChainError(
            "chain endpoints coincide while the interior does not; the length "
            "hypotheses have no baseline"
        )
    link_deltas = tuple(two_point_delta(ctx, a, b) for a, b in zip(chain, chain[1:]))
    w = ctx.modulus
    tol = 1e-9
    links_ok = all(
        d <= w(l) + tol * max(1.0, d) for d, l in zip(link_deltas, link_len)
    )
    total_len = sum(link_len)
    total_mod = sum(w(l) for l in link_len)
    len_ok = total_len <= lam * end_len + tol * max(1.0, total_len)
    mod_ok = total_mod <= lam * w(end_len) + tol * max(1.0, total_mod)
    tau = ctx.constants.tau(lam)
    scaled0 = jet_scale(1.0 / tau, chain[0])
    scaled1 = jet_scale(1.0 / tau, chain[-1])
    end_delta = two_point_delta(ctx, scaled0, scaled1)
    end_mod = w(end_len)
    return ChainContractionReport(
        hypotheses_hold=bool(links_ok and len_ok and mod_ok),
        conclusion_holds=bool(end_delta <= end_mod + tol * max(1.0, end_mod)),
        tau=tau,
        link_deltas=link_deltas,
        length_ratio=total_len / end_len if end_len > 0 else 0.0,
        modulus_ratio=total_mod / end_mod if end_mod > 0 else 0.0,
        endpoint_delta_scaled=end_delta,
        endpoint_modulus=end_mod,
    )
