"""Deformation families of the unit ball and the inward radial push."""

from __future__ import annotations

import numpy as np

from .sphere_math import angular_grid, gegenbauer_basis, unit_sphere_area
from .star_sets import RaySet, annulus_eps, mass_profiles

__all__ = ["FAMILIES", "make_family", "perturbed_ball", "radial_from_mass", "radial_push", "ring_widths"]

FAMILIES = ("translate", "dilate", "ring", "squeeze", "random_zonal")
EPS_MAX = 0.2


def radial_from_mass(M, n: int) -> np.ndarray:
    """Radius R with (R^n - 1)/n = M, i.e. the star-shaped set with ray mass M."""
    arg = 1.0 + n * np.asarray(M, dtype=float)
    if np.any(arg <= 0.0):
        raise ValueError("mass profile too negative: radial map not invertible")
    return arg ** (1.0 / n)


def ring_widths(n: int, mass):
    """(rho_plus, rho_minus) with ((1+rho_+)^n - 1)/n = mass = (1 - (1-rho_-)^n)/n."""
    mass = np.asarray(mass, dtype=float)
    if np.any(n * mass >= 1.0):
        raise ValueError("inner shell mass exceeds the ball")
    rho_plus = (1.0 + n * mass) ** (1.0 / n) - 1.0
    rho_minus = 1.0 - (1.0 - n * mass) ** (1.0 / n)
    return rho_plus, rho_minus


def _squeeze_profile(grid, eps):
    # c normalises ||M|| = eps; ||n t^2 - 1||^2 = |S^{n-1}| (2n - 2)/(n + 2)
    n = grid.n
    shape = n * grid.cos**2 - 1.0
    c = 1.0 / np.sqrt(unit_sphere_area(n) * (2.0 * n - 2.0) / (n + 2.0))
    return c * eps * shape


def _random_profile(grid, eps, rng, degrees):
    lo, hi = degrees
    basis = gegenbauer_basis(grid, hi)
    while True:
        coef = rng.standard_normal(hi - lo + 1)
        if np.any(coef != 0.0):
            break
    coef = coef / np.sqrt(basis.norms_sq[lo:])
    M = coef @ basis.table[lo:]
    return eps * M / np.sqrt(grid.integrate(M**2))


def make_family(kind: str, n: int, eps: float, seed=None, m: int = 64, degrees=(2, 6)) -> RaySet:
    """One member of a deformation family of B^n with parameter eps.

    translate: -eps e_n + B^n; dilate: e^eps B^n; ring: inner and outer shells
    carrying M_+ = M_- = eps (2|S^{n-1}|)^{-1/2}; squeeze: star-shaped with the
    degree-2 profile M = c eps (n (xi.e_n)^2 - 1), ||M|| = eps; random_zonal:
    star-shaped with a random zonal profile of degrees ``degrees`` and
    ||M|| = eps (``seed`` required).
    """
    if kind not in FAMILIES:
        raise ValueError(f"unknown family {kind!r}; choose from {FAMILIES}")
    if not 0.0 <= eps <= EPS_MAX:
        raise ValueError(f"eps must lie in [0, {EPS_MAX}]")
    grid = angular_grid(n, m)
    if kind == "translate":
        R = -eps * grid.cos + np.sqrt(1.0 - (eps * grid.sin) ** 2)
        return RaySet.star(grid, R)
    if kind == "dilate":
        return RaySet.star(grid, np.exp(eps))
    if kind == "ring":
        mass = eps / np.sqrt(2.0 * unit_sphere_area(n))
        rp, rm = ring_widths(n, mass)
        return RaySet.from_intervals(grid, [[(0.0, 1.0 - rm), (1.0, 1.0 + rp)]] * grid.m)
    if kind == "squeeze":
        return RaySet.star(grid, radial_from_mass(_squeeze_profile(grid, eps), n))
    if seed is None:
        raise ValueError("random_zonal needs a seed")
    rng = np.random.default_rng(seed)
    M = _random_profile(grid, eps, rng, degrees)
    return RaySet.star(grid, radial_from_mass(M, n))


def radial_push(A: RaySet) -> RaySet:
    """Move A \\ B^n inward onto [1, 1 + R_+] and B^n \\ A outward onto [1 - R_-, 1].

    Ray masses M_+ and M_- are preserved exactly.  Requires the annulus
    condition e^{-eps} B subset A subset e^{eps} B for some finite eps.
    """
    if not np.isfinite(annulus_eps(A)):
        raise ValueError("radial_push needs e^{-eps} B inside A")
    prof = mass_profiles(A)
    n = A.n
    rp = (1.0 + n * prof.M_plus.values) ** (1.0 / n) - 1.0
    rm = 1.0 - np.maximum(1.0 - n * prof.M_minus.values, 0.0) ** (1.0 / n)
    rows = []
    for p, q in zip(rp, rm):
        rows.append([(0.0, 1.0 - q), (1.0, 1.0 + p)])
    return RaySet.from_intervals(A.grid, rows)


def perturbed_ball(n: int, seed: int, amplitude: float = 5e-4, m: int = 64) -> RaySet:
    """Random non-annular perturbation of B^n for exercising the reduction.

    The boundary gets a zonal profile of degrees 1..3 with size up to
    ``amplitude``; odd seeds add a thin detached shell piece at radius 1.6
    over a polar cap and seeds divisible by 3 carve a thin inner gap.
    """
    rng = np.random.default_rng(seed)
    g = angular_grid(n, m)
    t = g.cos
    amp = amplitude * rng.random()
    M = amp * (rng.standard_normal() * t + rng.standard_normal() * (n * t * t - 1.0) + rng.standard_normal() * t**3)
    rows = [[(0.0, r)] for r in radial_from_mass(M, n)]
    if seed % 2:
        width = 0.25 * amplitude * rng.random()
        cap = rng.uniform(0.2, np.pi)
        rows = [row + ([(1.6, 1.6 + width)] if th < cap else []) for row, th in zip(rows, g.theta)]
    if seed % 3 == 0:
        lo = rng.uniform(0.3, 0.7)
        gap = 0.1 * amplitude * rng.random()
        rows = [[(0.0, lo), (lo + gap, row[0][1])] + row[1:] for row in rows]
    return RaySet.from_intervals(g, rows)
