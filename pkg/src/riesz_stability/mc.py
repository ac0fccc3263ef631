"""Monte-Carlo estimates of Riesz energies of zonal sets.

A RaySet with grid nodes theta_i is read as a band set: node i owns the
polar band whose sphere measure equals its quadrature weight w_i, and every
ray in the band carries the intervals of node i.  The band set has exactly
the quadrature volume of the RaySet.

For a point x the inner integral is sampled in polar coordinates about x,
y = x + rho omega with omega uniform and rho = D U^{1/lambda}:

    int_{|y-x|<D} phi(x - y) g(y) dy = |S^{n-1}| D^lam / (lam c) E[g(Y)],

so the estimator is bounded whenever D exceeds the diameter of the support
and no near-diagonal stratification is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaincinv

from .riesz_kernel import KernelParams
from .sphere_math import unit_sphere_area
from .star_sets import RaySet

__all__ = ["MCResult", "batch_rng", "mc_energy", "mc_second_variation", "BATCH"]

BATCH = 1 << 18


@dataclass(frozen=True)
class MCResult:
    value: float
    stderr: float
    samples: int


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    """Philox stream for one batch, keyed by (seed, batch index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch,))))


class _Bands:
    """Band geometry of a RaySet grid plus a signed radial segment list."""

    def __init__(self, grid, lo, hi, sign):
        n = grid.n
        self.n = n
        self.area = unit_sphere_area(n)
        self.p = 0.5 * (n - 1)
        cum = np.concatenate([[0.0], np.cumsum(grid.weights)])
        self.cum = cum / cum[-1]
        self.lo, self.hi, self.sign = lo, hi, sign
        seg = np.where(hi > lo, (hi**n - lo**n) / n, 0.0)
        self.seg_mass = grid.weights[:, None] * seg
        self.measure = float(self.seg_mass.sum())
        self.rmax = float(np.max(np.where(hi > lo, hi, 0.0)))

    def band_of(self, cos_t):
        u = betainc(self.p, self.p, np.clip(0.5 * (1.0 - cos_t), 0.0, 1.0))
        return np.clip(np.searchsorted(self.cum, u, side="right") - 1, 0, len(self.cum) - 2)

    def value_at(self, y):
        """Signed indicator at points y (rows)."""
        r = np.linalg.norm(y, axis=1)
        cos_t = np.where(r > 0, y[:, -1] / np.where(r > 0, r, 1.0), 1.0)
        i = self.band_of(cos_t)
        inside = (self.lo[i] <= r[:, None]) & (r[:, None] < self.hi[i])
        return np.sum(inside * self.sign[i], axis=1)

    def sample(self, rng, size):
        """Points uniform on the support (with respect to Lebesgue measure)."""
        n = self.n
        flat = self.seg_mass.ravel() / self.measure
        idx = rng.choice(flat.size, size=size, p=flat)
        i, j = np.divmod(idx, self.seg_mass.shape[1])
        # polar angle uniform in sphere measure within band i
        u = self.cum[i] + (self.cum[i + 1] - self.cum[i]) * rng.random(size)
        cos_t = 1.0 - 2.0 * betaincinv(self.p, self.p, u)
        sin_t = np.sqrt(np.maximum(1.0 - cos_t**2, 0.0))
        lo, hi = self.lo[i, j], self.hi[i, j]
        r = (lo**n + (hi**n - lo**n) * rng.random(size)) ** (1.0 / n)
        if n == 2:
            side = np.where(rng.random(size) < 0.5, -1.0, 1.0)[:, None]
        else:
            side = rng.standard_normal((size, n - 1))
            side /= np.linalg.norm(side, axis=1, keepdims=True)
        x = np.empty((size, n))
        x[:, :-1] = (r * sin_t)[:, None] * side
        x[:, -1] = r * cos_t
        return x, self.sign[i, j]


def _uniform_directions(rng, size, n):
    w = rng.standard_normal((size, n))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def _run(bands: _Bands, params: KernelParams, samples: int, seed: int, reach: float) -> MCResult:
    n, lam = params.n, params.lam
    scale = bands.measure * bands.area * reach**lam / (lam * params.c)
    total = 0.0
    total_sq = 0.0
    done = 0
    b = 0
    while done < samples:
        size = min(BATCH, samples - done)
        rng = batch_rng(seed, b)
        x, sx = bands.sample(rng, size)
        rho = reach * rng.random(size) ** (1.0 / lam)
        y = x + rho[:, None] * _uniform_directions(rng, size, n)
        est = scale * sx * bands.value_at(y)
        total += float(est.sum())
        total_sq += float(np.dot(est, est))
        done += size
        b += 1
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0)
    return MCResult(mean, float(np.sqrt(var / max(done - 1, 1))), done)


def mc_energy(A: RaySet, params: KernelParams, samples: int = 10**6, seed: int = 0) -> MCResult:
    """Unbiased estimate of E_lambda(A) = int_A int_A phi_lambda(x - y) dx dy."""
    a, b = A.a, A.b
    sign = np.where(b > a, 1.0, 0.0)
    bands = _Bands(A.grid, a, b, sign)
    return _run(bands, params, samples, seed, 2.0 * bands.rmax)


def mc_second_variation(A: RaySet, params: KernelParams, samples: int = 10**6, seed: int = 0) -> MCResult:
    """Estimate of W(A) = int int f(x) f(y) phi_lambda(x - y), f = 1_B - 1_A."""
    lo, hi, sign = A.signed_segments()
    bands = _Bands(A.grid, lo, hi, np.where(hi > lo, sign, 0.0))
    if bands.measure == 0.0:
        return MCResult(0.0, 0.0, 0)
    return _run(bands, params, samples, seed, 2.0 * bands.rmax)
