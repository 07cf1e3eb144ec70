"""Concave moduli of continuity and the derivative rescalings built from them.

A modulus is a nondecreasing concave function w on [0, inf) with w(0) = 0.
Two closed families are supported:

* ``power``: w(t) = t**p with 0 < p <= 1 (the Holder scale);
* ``pl``: the concave piecewise-linear interpolant of a knot list,
  extended past the last knot with the final slope.

Flat-tailed piecewise-linear moduli are not strictly increasing, which
breaks monotone inversion.  A strictness regularization is available:
the evaluated function is always

    w~(t) = w(t) + strictness_eps * min(t, t_cap),

which is concave, nondecreasing, and strictly increasing on [0, t_cap]
whenever strictness_eps > 0.  For flat-tailed piecewise-linear moduli the
constructor defaults strictness_eps to 1e-9 times the leading slope; every
other family defaults to 0.

For smoothness order k and derivative order a <= k, the rescaling phi_a
converts the size of a derivative difference into modulus units:

    phi_a(t) = w(g^{-1}(t))   with   g(s) = s**(k-a) * w(s),

and phi_a is the identity at the top order a = k.  g is strictly
increasing whenever w is not identically zero, so the inverse is computed
by certified bisection (relative tolerance 1e-12, at most 200 steps).
Power moduli with strictness_eps = 0 admit the closed form
phi_a(t) = t**(p / (k - a + p)), which is used as a fast path; tests pin
the two routes against each other.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError, CapProximityWarning, DomainError, InvariantError

INVERT_REL_TOL = 1e-12
INVERT_MAX_STEPS = 200

# Relative allowance when checking concavity of knot slopes; representation
# noise in hand-entered knots should not be rejected.
_SLOPE_TOL = 1e-12

_CAP_WARN_REL = 1e-6


def _as_float(x, what: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{what} must be a real number, got {x!r}")
    if not math.isfinite(v):
        raise DomainError(f"{what} must be finite, got {v!r}")
    return v


@dataclass(frozen=True)
class Modulus:
    """A concave modulus of continuity with optional strictness regularization.

    Use :meth:`power` or :meth:`piecewise_linear` instead of the raw
    constructor; they apply the documented defaults and validation.
    """

    kind: str
    p: float = 1.0
    knots: tuple[tuple[float, float], ...] = ()
    strictness_eps: float = 0.0
    t_cap: float = 1.0

    @staticmethod
    def power(p: float, strictness_eps: float = 0.0, t_cap: float = 1.0) -> "Modulus":
        p = _as_float(p, "power exponent")
        if not 0.0 < p <= 1.0:
            raise DomainError(f"power exponent must lie in (0, 1], got {p}")
        eps = _as_float(strictness_eps, "strictness_eps")
        if eps < 0.0:
            raise DomainError("strictness_eps must be >= 0")
        return Modulus(kind="power", p=p, strictness_eps=eps, t_cap=_as_float(t_cap, "t_cap"))

    @staticmethod
    def piecewise_linear(
        knots: Sequence[Sequence[float]],
        strictness_eps: float | None = None,
        t_cap: float | None = None,
    ) -> "Modulus":
        pts = tuple((_as_float(t, "knot abscissa"), _as_float(v, "knot value")) for t, v in knots)
        if len(pts) < 2:
            raise DomainError("piecewise-linear modulus needs at least two knots")
        if pts[0] != (0.0, 0.0):
            raise DomainError(f"first knot must be (0, 0), got {pts[0]!r}")
        slopes = []
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t1 <= t0:
                raise DomainError("knot abscissae must be strictly increasing")
            if v1 < v0:
                raise DomainError("knot values must be nondecreasing")
            slopes.append((v1 - v0) / (t1 - t0))
        scale = max(slopes)
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 > s0 + _SLOPE_TOL * max(1.0, scale):
                raise DomainError("knots are not concave: slopes must be nonincreasing")
        if strictness_eps is None:
            # Flat tail: regularize by default so inversion stays certified.
            strictness_eps = 1e-9 * scale if slopes[-1] == 0.0 else 0.0
        eps = _as_float(strictness_eps, "strictness_eps")
        if eps < 0.0:
            raise DomainError("strictness_eps must be >= 0")
        cap = pts[-1][0] if t_cap is None else _as_float(t_cap, "t_cap")
        if cap <= 0.0:
            raise DomainError("t_cap must be positive")
        return Modulus(kind="pl", knots=pts, strictness_eps=eps, t_cap=cap)

    # -- evaluation ------------------------------------------------------

    def __call__(self, t):
        """Evaluate the regularized modulus at t (scalar or array), t >= 0."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0):
            raise DomainError("modulus arguments must be >= 0")
        if self.kind == "power":
            base = np.power(arr, self.p)
        else:
            kt = self._knot_t
            kv = self._knot_v
            base = np.interp(arr, kt, kv)
            tail = self._final_slope
            if tail != 0.0:
                base = base + tail * np.maximum(arr - kt[-1], 0.0)
        if self.strictness_eps > 0.0:
            base = base + self.strictness_eps * np.minimum(arr, self.t_cap)
        if np.ndim(t) == 0:
            return float(base)
        return base

    @property
    def _knot_t(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots], dtype=float)

    @property
    def _knot_v(self) -> np.ndarray:
        return np.array([v for _, v in self.knots], dtype=float)

    @property
    def _final_slope(self) -> float:
        (t0, v0), (t1, v1) = self.knots[-2], self.knots[-1]
        return (v1 - v0) / (t1 - t0)

    @property
    def sup_value(self) -> float:
        """sup of the regularized modulus; inf unless the tail is flat."""
        if self.kind == "power" or self._final_slope > 0.0:
            return math.inf
        cap_gain = self.strictness_eps * self.t_cap
        return float(self.knots[-1][1]) + cap_gain

    @property
    def is_strictly_increasing(self) -> bool:
        """True when the regularized modulus is strictly increasing on all
        of [0, inf).  A positive strictness_eps only certifies [0, t_cap]."""
        if self.kind == "power":
            return True
        return self._final_slope > 0.0 and all(
            v1 > v0 for (_, v0), (_, v1) in zip(self.knots, self.knots[1:])
        )

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "power":
            doc["p"] = self.p
        else:
            doc["knots"] = [[t, v] for t, v in self.knots]
        if self.strictness_eps != 0.0:
            doc["eps"] = self.strictness_eps
            doc["t_cap"] = self.t_cap
        return doc

    @staticmethod
    def from_json(doc: dict) -> "Modulus":
        kind = doc.get("kind")
        if kind == "power":
            return Modulus.power(doc["p"], strictness_eps=doc.get("eps", 0.0), t_cap=doc.get("t_cap", 1.0))
        if kind == "pl":
            return Modulus.piecewise_linear(doc["knots"], strictness_eps=doc.get("eps"), t_cap=doc.get("t_cap"))
        raise DomainError(f"unknown modulus kind {kind!r}")


def modulus_eval(modulus: Modulus, t: float) -> float:
    """Regularized modulus value at t; domain error for t < 0."""
    return modulus(t)


def invert_monotone(
    f: Callable[[float], float],
    y: float,
    bracket: tuple[float, float],
    rel_tol: float = INVERT_REL_TOL,
    max_steps: int = INVERT_MAX_STEPS,
) -> float:
    """Solve f(s) = y for a nondecreasing f on a bracketing interval.

    Bisection, stopping when either the bracket or the residual is below
    the relative tolerance.  Raises :class:`BracketError` when y lies
    outside [f(lo), f(hi)] and :class:`InvariantError` when sampled values
    reveal non-monotone behaviour.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket!r}")
    flo, fhi = f(lo), f(hi)
    if fhi < flo:
        raise InvariantError(f"non-monotone samples: f({lo}) = {flo} > f({hi}) = {fhi}")
    slack = rel_tol * max(abs(y), abs(flo), abs(fhi), 1.0)
    if y < flo - slack or y > fhi + slack:
        raise BracketError("target outside bracket values", (lo, hi), y)
    y_tol = rel_tol * max(abs(y), 1e-300)
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket exhausted at float resolution
        fm = f(mid)
        if fm < flo - slack or fm > fhi + slack:
            raise InvariantError(f"non-monotone samples: f({mid}) = {fm} outside [{flo}, {fhi}]")
        if abs(fm - y) <= y_tol:
            return mid
        if fm < y:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if (hi - lo) <= rel_tol * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PhiAlpha:
    """The rescaling for one derivative order: phi(t) = w(g^{-1}(t)) with
    g(s) = s**(k - order) * w(s); the identity at order == k."""

    modulus: Modulus
    k: int
    order: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("smoothness order k must be >= 1")
        if not 0 <= self.order <= self.k:
            raise DomainError(f"derivative order must lie in [0, {self.k}], got {self.order}")

    @property
    def gap(self) -> int:
        """k - order, the power weighting the inversion."""
        return self.k - self.order

    @property
    def _closed_form_exponent(self) -> float | None:
        m = self.modulus
        if m.kind == "power" and m.strictness_eps == 0.0:
            return m.p / (self.gap + m.p)
        return None

    def _g(self, s):
        return np.power(s, self.gap) * self.modulus(s)

    def __call__(self, t: float) -> float:
        t = float(t)
        if t < 0.0:
            raise DomainError("phi arguments must be >= 0")
        if self.gap == 0 or t == 0.0:
            return t
        expo = self._closed_form_exponent
        if expo is not None:
            return t ** expo
        lo, hi = self._bracket_scalar(t)
        s = invert_monotone(self._g, t, (lo, hi))
        return self._finish(self.modulus(s))

    def eval_array(self, t: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; same semantics as scalar calls."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise DomainError("phi arguments must be >= 0")
        if self.gap == 0:
            return t.copy()
        expo = self._closed_form_exponent
        if expo is not None:
            return np.power(t, expo)
        out = np.zeros_like(t)
        pos = t > 0.0
        if np.any(pos):
            s = self._invert_array(t[pos])
            vals = self.modulus(s)
            out[pos] = vals
            self._finish(float(np.max(vals)))  # cap-proximity warning only
        return out

    def inverse_bound(self, w: float) -> float:
        """The certified preimage bound: the largest t with phi(t) <= w(w_arg).

        Closed form u = w**(k - order) * modulus(w) below the top order and
        u = modulus(w) at the top order.
        """
        w = float(w)
        if w < 0.0:
            raise DomainError("inverse_bound arguments must be >= 0")
        if self.gap == 0:
            return self.modulus(w)
        return w ** self.gap * self.modulus(w)

    # -- internals -------------------------------------------------------

    def _bracket_scalar(self, t: float) -> tuple[float, float]:
        hi = max(1.0, t)
        for _ in range(1200):
            if self._g(hi) >= t:
                break
            hi *= 2.0
            if hi > 1e300:
                raise BracketError("rescaling target not reachable", (0.0, hi), t)
        else:
            raise BracketError("rescaling target not reachable", (0.0, hi), t)
        lo = hi
        for _ in range(1200):
            half = 0.5 * lo
            if half <= 0.0 or self._g(half) < t:
                break
            lo = half
        # g(lo / 2) < t <= g(lo): a bracket of relative width one.
        return 0.5 * lo, lo

    def _invert_array(self, t: np.ndarray) -> np.ndarray:
        hi = np.maximum(t, 1.0)
        for _ in range(1200):
            need = self._g(hi) < t
            if not np.any(need):
                break
            hi = np.where(need, hi * 2.0, hi)
            if np.any(hi[need] > 1e300):
                bad = float(t[need][0])
                raise BracketError("rescaling target not reachable", (0.0, float(hi.max())), bad)
        else:
            raise BracketError("rescaling target not reachable", (0.0, float(hi.max())), float(t.max()))
        lo = hi.copy()
        for _ in range(1200):
            half = 0.5 * lo
            shrink = self._g(half) >= t
            if not np.any(shrink):
                break
            lo = np.where(shrink, half, lo)
        hi = lo
        lo = 0.5 * lo
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self._g(mid) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _finish(self, value: float) -> float:
        sup = self.modulus.sup_value
        if math.isfinite(sup) and value >= sup * (1.0 - _CAP_WARN_REL):
            warnings.warn(
                f"rescaling value {value} is within {_CAP_WARN_REL:g} of the modulus cap {sup}",
                CapProximityWarning,
                stacklevel=3,
            )
        return value


def phi_alpha_eval(phi: PhiAlpha, t: float) -> float:
    """phi(t); nondecreasing in t, zero at zero."""
    return phi(t)


def phi_alpha_inverse_bound(phi: PhiAlpha, w: float) -> float:
    """Largest argument whose rescaled value stays below modulus(w)."""
    return phi.inverse_bound(w)
