"""Polynomial jets: graded multiindex bases, derivatives, shifts, constants.

A k-jet on R^n is a pair (P, x) with P a polynomial of total degree <= k,
stored as monomial coefficients over the graded lexicographic multiindex
order (degree first, then lexicographic within a degree).  The order is
part of every file format, so :meth:`Space.multiindices` is the single
source of truth for coefficient layout.

Derivatives are evaluated exactly in double precision from the monomial
expansion with falling-factorial weights; the whole derivative table at a
point is available as a matrix so downstream code can batch it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError

# Factorial tables stay exact in double precision for k <= 8; larger orders
# would silently lose integer exactness, so they are rejected outright.
MAX_K = 8


@dataclass(frozen=True)
class Space:
    """The coefficient space of k-jets on R^n."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.k > MAX_K:
            raise DomainError(f"k must be <= {MAX_K} to keep factorial weights exact, got {self.k}")

    @cached_property
    def multiindices(self) -> tuple[tuple[int, ...], ...]:
        all_alpha = [
            a
            for a in itertools.product(range(self.k + 1), repeat=self.n)
            if sum(a) <= self.k
        ]
        all_alpha.sort(key=lambda a: (sum(a), a))
        return tuple(all_alpha)

    @cached_property
    def dim(self) -> int:
        return len(self.multiindices)

    @cached_property
    def index_of(self) -> dict[tuple[int, ...], int]:
        return {a: i for i, a in enumerate(self.multiindices)}

    @cached_property
    def orders(self) -> np.ndarray:
        """Total degree |alpha| per basis row."""
        return np.array([sum(a) for a in self.multiindices], dtype=np.int64)

    @cached_property
    def factorials(self) -> np.ndarray:
        """alpha! per basis row."""
        return np.array(
            [math.prod(math.factorial(ai) for ai in a) for a in self.multiindices],
            dtype=float,
        )

    @cached_property
    def _deriv_coeff(self) -> np.ndarray:
        """C[a, b] = prod_i beta_i! / (beta_i - alpha_i)! when beta >= alpha, else 0."""
        dim = self.dim
        C = np.zeros((dim, dim))
        for a, alpha in enumerate(self.multiindices):
            for b, beta in enumerate(self.multiindices):
                if all(bi >= ai for ai, bi in zip(alpha, beta)):
                    C[a, b] = math.prod(
                        math.perm(bi, ai) for ai, bi in zip(alpha, beta)
                    )
        return C

    @cached_property
    def _deriv_expo(self) -> np.ndarray:
        """E[a, b, :] = beta - alpha clipped at zero (unused rows have C = 0)."""
        dim = self.dim
        E = np.zeros((dim, dim, self.n), dtype=np.int64)
        for a, alpha in enumerate(self.multiindices):
            for b, beta in enumerate(self.multiindices):
                E[a, b] = [max(bi - ai, 0) for ai, bi in zip(alpha, beta)]
        return E

    def derivative_matrix(self, x: np.ndarray) -> np.ndarray:
        """M with (M @ coeffs)[a] = D^alpha P(x) for every basis row a."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainError(f"point must have shape ({self.n},), got {x.shape}")
        powers = np.power(x[None, None, :], self._deriv_expo).prod(axis=-1)
        return self._deriv_coeff * powers

    def derivative_matrices(self, xs: np.ndarray) -> np.ndarray:
        """Stacked derivative matrices for several points, shape (m, dim, dim)."""
        xs = np.asarray(xs, dtype=float)
        powers = np.power(xs[:, None, None, :], self._deriv_expo[None]).prod(axis=-1)
        return self._deriv_coeff[None] * powers

    def validate_alpha(self, alpha: Sequence[int]) -> tuple[int, ...]:
        a = tuple(int(v) for v in alpha)
        if len(a) != self.n or any(v < 0 for v in a) or sum(a) > self.k:
            raise DomainError(f"multiindex {alpha!r} is not valid for k={self.k}, n={self.n}")
        return a


@dataclass(frozen=True)
class Poly:
    """A polynomial of degree <= k in the monomial basis of a Space."""

    space: Space
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.space.dim:
            raise DomainError(
                f"expected {self.space.dim} coefficients for k={self.space.k}, "
                f"n={self.space.n}, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @staticmethod
    def from_coeffs(space: Space, coeffs: Sequence[float]) -> "Poly":
        return Poly(space, tuple(float(c) for c in coeffs))

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    def __call__(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        mono = np.array(
            [math.prod(yi ** ai for yi, ai in zip(y, a)) for a in self.space.multiindices]
        )
        return float(mono @ self.vec)

    def add(self, other: "Poly") -> "Poly":
        self._check_space(other)
        return Poly(self.space, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def sub(self, other: "Poly") -> "Poly":
        self._check_space(other)
        return Poly(self.space, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scaled(self, factor: float) -> "Poly":
        return Poly(self.space, tuple(factor * c for c in self.coeffs))

    def _check_space(self, other: "Poly"):
        if other.space != self.space:
            raise DomainError("polynomials live in different spaces")

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Jet:
    """A polynomial anchored at a base point."""

    poly: Poly
    base: tuple[float, ...]

    def __post_init__(self):
        base = tuple(float(v) for v in self.base)
        if len(base) != self.poly.space.n:
            raise DomainError(
                f"base point must have {self.poly.space.n} coordinates, got {len(base)}"
            )
        object.__setattr__(self, "base", base)

    @property
    def space(self) -> Space:
        return self.poly.space

    @property
    def x(self) -> np.ndarray:
        return np.array(self.base, dtype=float)

    def to_json(self) -> dict:
        return {"coeffs": list(self.poly.coeffs), "base": list(self.base)}


def derivative_eval(P: Poly, alpha: Sequence[int], x: np.ndarray) -> float:
    """D^alpha P(x), exact falling-factorial expansion."""
    a = P.space.validate_alpha(alpha)
    row = P.space.index_of[a]
    return float(P.space.derivative_matrix(np.asarray(x, dtype=float))[row] @ P.vec)


def taylor_shift(P: Poly, a: np.ndarray) -> Poly:
    """Re-expand P around a: coefficient of (y - a)^beta is D^beta P(a) / beta!.

    The identity P(y) = shifted(y - a) holds exactly up to rounding.
    """
    a = np.asarray(a, dtype=float)
    derivs = P.space.derivative_matrix(a) @ P.vec
    return Poly(P.space, tuple(derivs / P.space.factorials))


def derivative_transfer_bound(P: Poly, alpha: Sequence[int], a: np.ndarray, b: np.ndarray) -> float:
    """Triangle bound on |D^alpha P(b)| from the Taylor expansion at a:
    sum over |beta| <= k - |alpha| of |D^(alpha+beta) P(a)| * ||b - a||^|beta| / beta!.
    """
    space = P.space
    al = space.validate_alpha(alpha)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dist = float(np.linalg.norm(b - a))
    derivs = space.derivative_matrix(a) @ P.vec
    total = 0.0
    for g, gamma in enumerate(space.multiindices):
        if all(gi >= ai for ai, gi in zip(al, gamma)):
            beta = tuple(gi - ai for ai, gi in zip(al, gamma))
            bfac = math.prod(math.factorial(bi) for bi in beta)
            total += abs(float(derivs[g])) * dist ** sum(beta) / bfac
    return total


def jet_scale(factor: float, T: Jet) -> Jet:
    """Scale the polynomial part, keep the base point."""
    return Jet(T.poly.scaled(float(factor)), T.base)


@dataclass(frozen=True)
class Constants:
    """The dimensional constants used by the metric and selection layers."""

    k: int
    n: int

    def __post_init__(self):
        Space(self.k, self.n)  # reuse domain validation

    @cached_property
    def dim(self) -> int:
        return Space(self.k, self.n).dim

    @cached_property
    def e_n(self) -> float:
        return math.exp(self.n)

    @cached_property
    def e_2n(self) -> float:
        return math.exp(2 * self.n)

    @cached_property
    def e_3n(self) -> float:
        return self.e_2n * self.e_n

    def tau(self, lam: float) -> float:
        """Chain contraction factor e^{2n} * lam^(k+1)."""
        return self.e_2n * float(lam) ** (self.k + 1)

    @cached_property
    def ts(self) -> float:
        """Relaxation factor 3^{k+1} e^{3n} used by the constructive step;
        equal to tau(3) * e_n by construction."""
        return self.tau(3.0) * self.e_n

    def ell_g(self, ell: int) -> int:
        """Effective dimension parameter min(ell + 1, dim)."""
        ell = int(ell)
        if ell < 0:
            raise DomainError("ell must be >= 0")
        return min(ell + 1, self.dim)

    def finiteness_number(self, ell: int) -> int:
        """The subset cardinality 2^{min(ell + 1, dim)} that controls global
        selection; never exceeds 2^dim."""
        return 2 ** self.ell_g(ell)
