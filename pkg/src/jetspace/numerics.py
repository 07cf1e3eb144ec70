"""Small numeric helpers: scaled comparisons and 1-d golden-section search."""

from __future__ import annotations

from typing import Callable

# Default relative slack for inequality checks.  All "a <= b" style checks in
# the geometric layers allow 1e-9 scaled by the magnitudes involved.
REL_TOL = 1e-9

_GOLDEN = 0.6180339887498949  # (sqrt(5) - 1) / 2


def scaled_tol(*values: float, rel: float = REL_TOL) -> float:
    scale = 1.0
    for v in values:
        a = abs(v)
        if a > scale:
            scale = a
    return rel * scale


def leq(a: float, b: float, rel: float = REL_TOL) -> bool:
    """a <= b up to a relative slack in the larger magnitude."""
    return a <= b + scaled_tol(a, b, rel=rel)


def close(a: float, b: float, rel: float = REL_TOL) -> bool:
    return abs(a - b) <= scaled_tol(a, b, rel=rel)


def leq_array(a, b, rel: float = REL_TOL):
    """Vectorized a <= b with the same relative slack convention."""
    import numpy as np

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0)
    return a <= b + rel * scale


def golden_section(f: Callable[[float], float], lo: float, hi: float, iters: int = 8) -> tuple[float, float]:
    """Minimize f on [lo, hi]; returns (argmin, value) after a fixed number
    of golden-section steps.  Heuristic: only reliable for unimodal f, but
    never returns a point outside the interval."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)
