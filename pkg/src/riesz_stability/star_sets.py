"""Zonal subsets of R^n described ray by ray.

A RaySet stores, for every polar-angle node of an AngularGrid, a sorted list
of disjoint radial intervals [a, b).  Integrals over the set are computed with
the grid quadrature in the angle and exactly in the radius, so the set is the
zonal region whose radial cross-sections interpolate the node data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import betainc

from .jsonio import dumps
from .sphere_math import AngularGrid, ZonalFn, angular_grid, unit_ball_volume

__all__ = [
    "MAX_INTERVALS",
    "MassProfiles",
    "RaySet",
    "SCHEMA_VERSION",
    "annulus_eps",
    "asymmetry",
    "ball_intersection_volume",
    "ball_symmdiff",
    "barycenter",
    "mass_profiles",
    "median_center",
    "scale_to_unit",
    "volume",
]

SCHEMA_VERSION = 1
MAX_INTERVALS = 8


def _canonical(intervals):
    """Sort, drop empty pieces and merge overlapping or touching intervals."""
    pieces = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("interval endpoints must be finite")
        if a < 0.0 or b < a:
            raise ValueError(f"invalid interval [{a}, {b}]")
        if b > a:
            pieces.append((a, b))
    pieces.sort()
    out = []
    for a, b in pieces:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


@dataclass(frozen=True, eq=False)
class RaySet:
    """Radial intervals per polar-angle node.

    ``ends`` has shape (m, Q, 2).  Row i holds the ``counts[i]`` real
    intervals of node i in increasing order, padded with zero-length
    intervals at the last endpoint so that vectorised clipping needs no masks.
    """

    grid: AngularGrid
    ends: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    @classmethod
    def from_intervals(cls, grid: AngularGrid, intervals) -> "RaySet":
        rows = [_canonical(iv) for iv in intervals]
        if len(rows) != grid.m:
            raise ValueError(f"expected {grid.m} interval lists, got {len(rows)}")
        counts = np.array([len(r) for r in rows], dtype=int)
        if counts.max(initial=0) > MAX_INTERVALS:
            raise ValueError(f"at most {MAX_INTERVALS} intervals per ray are supported")
        Q = max(1, int(counts.max(initial=0)))
        ends = np.zeros((grid.m, Q, 2))
        for i, r in enumerate(rows):
            if r:
                ends[i, : len(r)] = r
                ends[i, len(r) :] = r[-1][1]
        ends.setflags(write=False)
        counts.setflags(write=False)
        out = cls(grid, ends, counts)
        if not out.volume() > 0.0:
            raise ValueError("a RaySet must have positive volume")
        return out

    @classmethod
    def star(cls, grid: AngularGrid, radius) -> "RaySet":
        """Star-shaped set {r xi : r < R(xi)} from radii at the nodes."""
        R = np.broadcast_to(np.asarray(radius, dtype=float), (grid.m,))
        return cls.from_intervals(grid, [[(0.0, r)] for r in R])

    @classmethod
    def ball(cls, n: int, m: int = 64, radius: float = 1.0) -> "RaySet":
        return cls.star(angular_grid(n, m), radius)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def a(self) -> np.ndarray:
        return self.ends[..., 0]

    @property
    def b(self) -> np.ndarray:
        return self.ends[..., 1]

    def intervals(self, i: int):
        return [tuple(map(float, iv)) for iv in self.ends[i, : self.counts[i]]]

    def interval_lists(self):
        return [self.intervals(i) for i in range(self.m)]

    def is_star_shaped(self) -> bool:
        return bool(np.all(self.counts == 1) and np.all(self.a[:, 0] == 0.0))

    def radial_function(self) -> np.ndarray:
        if not self.is_star_shaped():
            raise ValueError("set is not star-shaped with respect to the origin")
        return self.b[:, 0].copy()

    def radial_measure(self, lo=0.0, hi=np.inf) -> np.ndarray:
        """Per node, int r^{n-1} dr over the part of the ray inside [lo, hi]."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.m,))[:, None]
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.m,))[:, None]
        n = self.n
        a = np.clip(self.a, lo, hi)
        b = np.clip(self.b, lo, hi)
        return np.sum(b**n - a**n, axis=1) / n

    def volume(self) -> float:
        return self.grid.integrate(self.radial_measure())

    def scaled(self, s: float) -> "RaySet":
        if not s > 0.0:
            raise ValueError("scale factor must be positive")
        ends = self.ends * s
        ends.setflags(write=False)
        return RaySet(self.grid, ends, self.counts)

    def signed_segments(self):
        """Radial segments of B \\ A (sign +1) and A \\ B (sign -1) per node.

        Returns arrays ``lo``, ``hi``, ``sign`` of shape (m, 2Q + 1); unused
        slots have zero length.
        """
        a, b = self.a, self.b
        m = self.m
        prev_b = np.concatenate([np.zeros((m, 1)), b], axis=1)
        next_a = np.concatenate([a, np.full((m, 1), np.inf)], axis=1)
        gap_lo = np.minimum(prev_b, 1.0)
        gap_hi = np.minimum(next_a, 1.0)
        out_lo = np.maximum(a, 1.0)
        out_hi = np.maximum(b, 1.0)
        lo = np.concatenate([gap_lo, out_lo], axis=1)
        hi = np.concatenate([gap_hi, out_hi], axis=1)
        sign = np.concatenate([np.ones_like(gap_lo), -np.ones_like(out_lo)], axis=1)
        return lo, hi, sign

    # serialisation

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "nodes": [float(x) for x in self.grid.theta],
            "weights": [float(x) for x in self.grid.weights],
            "intervals": [[[a, b] for a, b in self.intervals(i)] for i in range(self.m)],
        }

    def to_json(self, indent=None) -> str:
        return dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "RaySet":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported RaySet schema_version {d.get('schema_version')!r}")
        n = int(d["n"])
        theta = np.array(d["nodes"], dtype=float)
        weights = np.array(d["weights"], dtype=float)
        if theta.shape != weights.shape or theta.ndim != 1:
            raise ValueError("nodes and weights must be equal-length lists")
        std = angular_grid(n, theta.size)
        if np.array_equal(std.theta, theta) and np.array_equal(std.weights, weights):
            grid = std
        else:
            theta.setflags(write=False)
            weights.setflags(write=False)
            grid = AngularGrid(n, theta, weights)
        return cls.from_intervals(grid, d["intervals"])

    @classmethod
    def from_json(cls, text: str) -> "RaySet":
        return cls.from_dict(json.loads(text))

    def same_as(self, other: "RaySet") -> bool:
        return (
            self.grid.same_as(other.grid)
            and np.array_equal(self.counts, other.counts)
            and self.interval_lists() == other.interval_lists()
        )


def volume(A: RaySet) -> float:
    """|A| = sum_i w_i sum_intervals (b^n - a^n)/n."""
    return A.volume()


@dataclass(frozen=True, eq=False)
class MassProfiles:
    """Ray masses of A outside (M_plus) and missing inside (M_minus) the unit ball."""

    M_plus: ZonalFn
    M_minus: ZonalFn

    @property
    def n(self) -> int:
        return self.M_plus.grid.n

    @property
    def M(self) -> ZonalFn:
        return self.M_plus - self.M_minus

    @property
    def norms_sq(self):
        g = self.M_plus.grid
        return g.integrate(self.M_plus.values**2), g.integrate(self.M_minus.values**2)


def mass_profiles(A: RaySet) -> MassProfiles:
    lo, hi, sign = A.signed_segments()
    n = A.n
    piece = (hi**n - lo**n) / n
    plus = np.sum(np.where(sign < 0, piece, 0.0), axis=1)
    minus = np.sum(np.where(sign > 0, piece, 0.0), axis=1)
    return MassProfiles(ZonalFn(A.grid, plus), ZonalFn(A.grid, minus))


def scale_to_unit(A: RaySet) -> RaySet:
    """Dilate A about the origin so that |A| = |B^n|."""
    s = (unit_ball_volume(A.n) / A.volume()) ** (1.0 / A.n)
    return A if s == 1.0 else A.scaled(s)


def annulus_eps(A: RaySet) -> float:
    """Smallest eps >= 0 with e^{-eps} B subset A subset e^{eps} B (inf if none)."""
    outer = float(np.max(A.b))
    starts_at_zero = A.a[:, 0] == 0.0
    if not np.all(starts_at_zero):
        return np.inf
    inner = float(np.min(A.b[:, 0]))
    return max(0.0, np.log(outer), -np.log(inner))


def barycenter(A: RaySet) -> float:
    """Axial coordinate of the centre of mass of A."""
    n = A.n
    mom = np.sum(A.b ** (n + 1) - A.a ** (n + 1), axis=1) / (n + 1)
    return A.grid.integrate(A.grid.cos * mom) / A.volume()


def _shifted_ball_ray(grid: AngularGrid, t: float):
    """Radial interval [lo, hi] of t e_n + B^n along each node direction."""
    c, s = grid.cos, grid.sin
    disc = 1.0 - (t * s) ** 2
    root = np.sqrt(np.maximum(disc, 0.0))
    tc = t * c
    hi = np.maximum(tc + root, 0.0)
    # lower root via the product of the roots, t^2 - 1, to avoid cancellation
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(tc + root > 0.0, (t * t - 1.0) / (tc + root), 0.0)
    lo = np.maximum(lo, 0.0)
    empty = disc < 0.0
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, 0.0, hi)
    return lo, hi


def ball_intersection_volume(A: RaySet, t: float) -> float:
    """|A cap (t e_n + B^n)|, clipping each ray against the shifted sphere."""
    lo, hi = _shifted_ball_ray(A.grid, float(t))
    return A.grid.integrate(A.radial_measure(lo, hi))


def ball_symmdiff(n: int, t: float) -> float:
    """|B^n Delta (t e_n + B^n)| from the volume of the lens of two unit balls."""
    t = abs(float(t))
    vb = unit_ball_volume(n)
    if t >= 2.0:
        return 2.0 * vb
    lens = vb * betainc(0.5 * (n + 1), 0.5, 1.0 - 0.25 * t * t)
    return 2.0 * (vb - lens)


def asymmetry(A: RaySet, span: float = 2.0, scan: int = 81):
    """Fraenkel asymmetry over axial offsets: (alpha, t_opt).

    alpha = (|B|/|A|) min_t |A Delta (t e_n + B)| with
    |A Delta (t e_n + B)| = |A| + |B| - 2 |A cap (t e_n + B)|.  A coarse scan
    plus the barycentre seeds a golden-section search.
    """
    vb = unit_ball_volume(A.n)
    va = A.volume()

    def sdiff(t):
        return va + vb - 2.0 * ball_intersection_volume(A, t)

    grid_t = np.linspace(-span, span, scan)
    vals = np.array([sdiff(t) for t in grid_t])
    j = int(np.argmin(vals))
    seed = float(np.clip(barycenter(A), -span, span))
    best_t, best = float(grid_t[j]), float(vals[j])
    step = grid_t[1] - grid_t[0]
    candidates = [(best_t, best)]
    for centre in (best_t, seed):
        lo, hi = max(centre - step, -span), min(centre + step, span)
        res = minimize_scalar(sdiff, bracket=(lo, centre, hi), method="golden", tol=1e-12)
        if res.success and -span <= res.x <= span:
            candidates.append((float(res.x), float(res.fun)))
    # smallest value; ties toward smaller |t|
    best_t, best = min(candidates, key=lambda p: (round(p[1], 15), abs(p[0])))
    alpha = max(0.0, vb / va * best)
    return alpha, best_t


def _median_terms(A: RaySet, t: float, nodes: int = 24):
    """f(t), f'(t), f''(t) for f(t) = int_A |y - t e_n| dy.

    Radial integrals use Gauss-Legendre on each interval, split at the point
    of closest approach to t e_n.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    n = A.n
    c = A.grid.cos[:, None, None]
    s = A.grid.sin[:, None, None]
    split = np.clip(t * A.grid.cos, 0.0, None)[:, None]
    a, b = A.a, A.b
    pieces = [(a, np.clip(split, a, b)), (np.clip(split, a, b), b)]
    f = df = d2f = 0.0
    for lo, hi in pieces:
        half = 0.5 * (hi - lo)[..., None]
        r = 0.5 * (hi + lo)[..., None] + half * x
        ww = half * w * r ** (n - 1)
        d = np.sqrt((r * s) ** 2 + (r * c - t) ** 2)
        d = np.maximum(d, 1e-300)
        f += np.sum(ww * d, axis=(1, 2))
        df += np.sum(ww * (t - r * c) / d, axis=(1, 2))
        d2f += np.sum(ww * (r * s) ** 2 / d**3, axis=(1, 2))
    g = A.grid
    return g.integrate(f), g.integrate(df), g.integrate(d2f)


def median_center(A: RaySet, tol: float = 1e-13, max_iter: int = 100) -> float:
    """Axial point x0 with int_{x0 + A} y/|y| dy = 0.

    Minimises the convex f(t) = int_A |y - t e_n| dy by Newton steps with a
    bisection safeguard and returns x0 = -t.
    """
    t = barycenter(A)
    _, d1, _ = _median_terms(A, t)
    if d1 == 0.0:
        return -t
    # bracket the root of f'
    step = 0.1
    lo = hi = t
    if d1 > 0:
        while _median_terms(A, lo)[1] > 0:
            lo -= step
            step *= 2
    else:
        while _median_terms(A, hi)[1] < 0:
            hi += step
            step *= 2
    scale = A.volume()
    for _ in range(max_iter):
        _, d1, d2 = _median_terms(A, t)
        if abs(d1) <= tol * scale:
            return -t
        if d1 > 0:
            hi = t
        else:
            lo = t
        t_new = t - d1 / d2 if d2 > 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) < 1e-16:
            return -t_new
        t = t_new
    raise RuntimeError("median_center: iteration cap reached")
