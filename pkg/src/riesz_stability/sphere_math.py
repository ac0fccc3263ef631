"""Zonal harmonics, sphere constants and polar-angle quadrature.

Everything on S^{n-1} in this package is zonal (invariant under rotations
fixing the last axis e_n), so a function on the sphere is a function of the
polar angle theta alone, and the surface measure reduces to

    dxi = |S^{n-2}| (sin theta)^{n-2} dtheta,   theta in (0, pi).

For n = 2 the factor |S^0| = 2 accounts for folding the circle onto its
upper half.  Sums over nodes are always taken in ascending node order so that
results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import eval_chebyt, eval_gegenbauer, gammaln, roots_jacobi

__all__ = [
    "AngularGrid",
    "GegenbauerBasis",
    "SpectralCoeffs",
    "ZonalFn",
    "angular_grid",
    "default_node_count",
    "gegenbauer_basis",
    "l2_norm_sq",
    "unit_ball_volume",
    "unit_sphere_area",
    "zonal_at_pole",
    "zonal_eval",
    "zonal_expand",
    "zonal_synthesize",
]


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1)."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return float(np.exp(0.5 * n * np.log(np.pi) - gammaln(0.5 * n + 1.0)))


def unit_sphere_area(n: int) -> float:
    """Surface area of S^{n-1}, equal to n |B^n|."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return n * unit_ball_volume(n)


def _meridian_factor(n: int) -> float:
    # |S^{n-2}|; for n = 2 this is |S^0| = 2 (two half-circles)
    return 2.0 if n == 2 else unit_sphere_area(n - 1)


def zonal_eval(k: int, n: int, t):
    """Zonal harmonic Z_k evaluated at t = cos(theta).

    For n >= 3 this is the Gegenbauer polynomial C_k^{(n-2)/2}(t), for n = 2
    the Chebyshev polynomial T_k(t) = cos(k theta).
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    if n < 2:
        raise ValueError("dimension must be >= 2")
    t = np.asarray(t, dtype=float)
    if n == 2:
        return eval_chebyt(k, t)
    return eval_gegenbauer(k, 0.5 * (n - 2), t)


def zonal_at_pole(k: int, n: int) -> float:
    """Z_k(1): Gamma(n-2+k) / (k! Gamma(n-2)) for n >= 3, and 1 for n = 2."""
    if n == 2:
        return 1.0
    return float(np.exp(gammaln(n - 2 + k) - gammaln(k + 1) - gammaln(n - 2)))


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Gauss nodes in the polar angle with weights for the zonal measure.

    ``weights`` already include |S^{n-2}|, so ``weights.sum()`` is |S^{n-1}|.
    Nodes are stored in ascending order of theta.
    """

    n: int
    theta: np.ndarray
    weights: np.ndarray

    @property
    def m(self) -> int:
        return self.theta.size

    @property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta)

    @property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta)

    def integrate(self, values) -> float:
        """Integral over S^{n-1} of a zonal function sampled at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def same_as(self, other: "AngularGrid") -> bool:
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.theta, other.theta)
            and np.array_equal(self.weights, other.weights)
        )


@lru_cache(maxsize=64)
def _grid_arrays(n: int, m: int):
    a = 0.5 * (n - 3)
    t, w = roots_jacobi(m, a, a)
    order = np.argsort(-t)  # ascending theta
    theta = np.arccos(t[order])
    weights = _meridian_factor(n) * w[order]
    theta.setflags(write=False)
    weights.setflags(write=False)
    return theta, weights


def angular_grid(n: int, m: int) -> AngularGrid:
    """Gauss-Jacobi rule in t = cos(theta) for the weight (1 - t^2)^{(n-3)/2}.

    Exact for polynomials in cos(theta) of degree <= 2m - 1.
    """
    if m < 1:
        raise ValueError("node count must be >= 1")
    if n < 2:
        raise ValueError("dimension must be >= 2")
    theta, weights = _grid_arrays(int(n), int(m))
    return AngularGrid(int(n), theta, weights)


def default_node_count(max_degree: int) -> int:
    return max(64, 4 * int(max_degree))


@dataclass(frozen=True, eq=False)
class ZonalFn:
    """A zonal function sampled at the nodes of an AngularGrid."""

    grid: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.m,):
            raise ValueError(f"expected {self.grid.m} samples, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: AngularGrid, fn) -> "ZonalFn":
        """Sample ``fn(cos_theta)`` at the grid nodes."""
        return cls(grid, np.asarray(fn(grid.cos), dtype=float) * np.ones(grid.m))

    def __add__(self, other):
        return ZonalFn(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ZonalFn(self.grid, self.values - _vals(other))

    def __mul__(self, c):
        return ZonalFn(self.grid, self.values * _vals(c))

    __rmul__ = __mul__

    def __neg__(self):
        return ZonalFn(self.grid, -self.values)

    def positive_part(self) -> "ZonalFn":
        return ZonalFn(self.grid, np.maximum(self.values, 0.0))

    def negative_part(self) -> "ZonalFn":
        return ZonalFn(self.grid, np.maximum(-self.values, 0.0))

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def first_moment(self) -> float:
        """Axial component of the integral of xi * f(xi); the others vanish."""
        return self.grid.integrate(self.grid.cos * self.values)


def _vals(x):
    return x.values if isinstance(x, ZonalFn) else x


@dataclass(frozen=True, eq=False)
class GegenbauerBasis:
    """Zonal basis Z_0..Z_K tabulated at the nodes of a grid.

    ``norms_sq[k]`` is ||Z_k||^2 in L^2(S^{n-1}), computed by the grid
    quadrature (exact while 2k <= 2m - 1).
    """

    grid: AngularGrid
    max_degree: int
    table: np.ndarray = field(repr=False)  # shape (K+1, m)
    norms_sq: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def order(self) -> float:
        return 0.5 * (self.grid.n - 2)

    def orthogonality_matrix(self) -> np.ndarray:
        return (self.table * self.grid.weights) @ self.table.T


@lru_cache(maxsize=64)
def _basis_cached(n: int, m: int, K: int) -> GegenbauerBasis:
    grid = angular_grid(n, m)
    t = grid.cos
    table = np.empty((K + 1, m))
    if n == 2:
        # cos(k theta) by the Chebyshev recurrence
        table[0] = 1.0
        if K >= 1:
            table[1] = t
        for k in range(1, K):
            table[k + 1] = 2.0 * t * table[k] - table[k - 1]
    else:
        nu = 0.5 * (n - 2)
        table[0] = 1.0
        if K >= 1:
            table[1] = 2.0 * nu * t
        for k in range(1, K):
            table[k + 1] = (2.0 * (k + nu) * t * table[k] - (k + 2 * nu - 1) * table[k - 1]) / (k + 1)
    norms_sq = (table**2) @ grid.weights
    table.setflags(write=False)
    norms_sq.setflags(write=False)
    return GegenbauerBasis(grid, K, table, norms_sq)


def gegenbauer_basis(grid: AngularGrid, max_degree: int) -> GegenbauerBasis:
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if max_degree > grid.m - 1:
        raise ValueError(
            f"grid with {grid.m} nodes cannot resolve degree {max_degree}; need m >= K + 1"
        )
    return _basis_cached(grid.n, grid.m, int(max_degree))


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Coefficients c_k of f = sum_k c_k Z_k, with ||Y_k||^2 = c_k^2 ||Z_k||^2."""

    basis: GegenbauerBasis
    coeffs: np.ndarray

    @property
    def component_norms_sq(self) -> np.ndarray:
        return self.coeffs**2 * self.basis.norms_sq


def zonal_expand(f: ZonalFn, max_degree: int) -> SpectralCoeffs:
    """Project a sampled zonal function onto Z_0..Z_K."""
    basis = gegenbauer_basis(f.grid, max_degree)
    coeffs = (basis.table * f.grid.weights) @ f.values / basis.norms_sq
    return SpectralCoeffs(basis, coeffs)


def zonal_synthesize(c: SpectralCoeffs) -> ZonalFn:
    return ZonalFn(c.basis.grid, c.coeffs @ c.basis.table)


def l2_norm_sq(f: ZonalFn) -> float:
    """Squared L^2(S^{n-1}) norm by the grid quadrature."""
    return f.grid.integrate(f.values**2)
