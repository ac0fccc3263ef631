"""Reduction of a scaled, centred set to an annular, median-centred one.

Step 1 moves the part of A outside (1+R)B into the shell (1+rho, 1+r];
Step 2 fills (1-R)B and carves the shell (1-r, 1-rho]; Step 3 translates
along the axis so that int x/|x| dx = 0.  Here R = C alpha^{lam/n} and
rho = 2 alpha/|B^n|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .riesz_kernel import KernelParams
from .sphere_math import unit_ball_volume
from .star_sets import RaySet, asymmetry, median_center, scale_to_unit

__all__ = ["SurgeryReport", "axial_moment", "surgery_reduce", "translate_axial", "DEFAULT_C"]

DEFAULT_C = 10.0


def axial_moment(A: RaySet) -> float:
    """Axial component of int_A x/|x| dx (the others vanish by zonality)."""
    return A.grid.integrate(A.grid.cos * A.radial_measure())


def _clip(rows, lo, hi):
    return [[(max(a, lo), min(b, hi)) for a, b in row if min(b, hi) > max(a, lo)] for row in rows]


def _subtract(rows, lo, hi):
    out = []
    for row in rows:
        new = []
        for a, b in row:
            if b <= lo or a >= hi:
                new.append((a, b))
                continue
            if a < lo:
                new.append((a, lo))
            if b > hi:
                new.append((hi, b))
        out.append(new)
    return out


def _shell_gap(A: RaySet, lo, hi):
    """Per node, the part of the shell lo < r < hi not covered by A (in r^{n-1} dr)."""
    n = A.n
    return (hi**n - lo**n) / n - A.radial_measure(lo, hi)


def _smallest_root(g, lo, hi, what):
    """Smallest x in [lo, hi] with g(x) = 0 for nondecreasing g, g(lo) <= 0."""
    if g(lo) >= 0.0:
        return lo
    if g(hi) < 0.0:
        raise ValueError(f"{what}: shell too thin to absorb the moved mass; reduce C or alpha")
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _step_outer(A: RaySet, R: float, rho: float):
    g = A.grid
    moved = g.integrate(A.radial_measure(1.0 + R, np.inf))
    if moved == 0.0:
        return A, rho
    r = _smallest_root(lambda x: g.integrate(_shell_gap(A, 1.0 + rho, 1.0 + x)) - moved, rho, R, "step 1")
    rows = _clip(A.interval_lists(), 0.0, 1.0 + R)
    rows = [row + [(1.0 + rho, 1.0 + r)] for row in rows]
    return RaySet.from_intervals(g, rows), r


def _step_inner(A: RaySet, R: float, rho: float):
    g = A.grid
    n = A.n
    added = g.integrate((1.0 - R) ** n / n - A.radial_measure(0.0, 1.0 - R))
    if added == 0.0:
        return A, rho
    r = _smallest_root(lambda x: g.integrate(A.radial_measure(1.0 - x, 1.0 - rho)) - added, rho, R, "step 2")
    filled = RaySet.from_intervals(g, [row + [(0.0, 1.0 - R)] for row in A.interval_lists()])
    rows = _subtract(filled.interval_lists(), 1.0 - r, 1.0 - rho)
    return RaySet.from_intervals(g, rows), r


STENCIL = 2


def _local_tracks(A: RaySet):
    """Per node and endpoint, polynomial coefficients in (t - t_i), highest first.

    Each endpoint is fitted through up to STENCIL neighbours on either side
    that carry the same number of intervals; isolated endpoints are held
    constant.
    """
    m = A.m
    t = A.grid.cos
    Q = A.ends.shape[1]
    e = A.ends.reshape(m, 2 * Q)
    cnt = A.counts
    coef = np.zeros((m, 2 * Q, 2 * STENCIL + 1))
    for i in range(m):
        lo = i
        while lo > 0 and i - lo < STENCIL and cnt[lo - 1] == cnt[i]:
            lo -= 1
        hi = i
        while hi < m - 1 and hi - i < STENCIL and cnt[hi + 1] == cnt[i]:
            hi += 1
        idx = np.arange(lo, hi + 1)
        deg = idx.size - 1
        if deg == 0:
            coef[i, :, -1] = e[i]
            continue
        V = np.vander(t[idx] - t[i], deg + 1)
        coef[i, :, -(deg + 1) :] = np.linalg.solve(V, e[idx]).T
    return e, coef


def translate_axial(A: RaySet, x0: float, iterations: int = 60) -> RaySet:
    """x0 e_n + A on the same grid.

    Interval endpoints are treated as smooth functions of cos(theta) near
    each node (local polynomial fits) and the translated ray endpoints are
    found by fixed-point iteration.
    """
    if x0 == 0.0:
        return A
    grid = A.grid
    c, s = grid.cos[:, None], grid.sin[:, None]
    e, coef = _local_tracks(A)
    live = e > 0.0
    if np.any(e[live] <= abs(x0)):
        raise ValueError("translation moves the origin across an interval endpoint")
    T = e.copy()
    for _ in range(iterations):
        r = c * x0 + np.sqrt(np.maximum(T * T - (x0 * s) ** 2, 0.0))
        dt = np.clip((r * c - x0) / np.where(live, T, 1.0), -1.0, 1.0) - c
        T_next = coef[..., 0]
        for j in range(1, coef.shape[-1]):
            T_next = T_next * dt + coef[..., j]
        T_next = np.where(live, T_next, 0.0)
        done = np.max(np.abs(T_next - T)) <= 1e-16 * np.max(e)
        T = T_next
        if done:
            break
    r = np.where(live, c * x0 + np.sqrt(np.maximum(T * T - (x0 * s) ** 2, 0.0)), 0.0)
    Q = A.ends.shape[1]
    rows = [[(r[i, 2 * q], r[i, 2 * q + 1]) for q in range(A.counts[i])] for i in range(grid.m)]
    return RaySet.from_intervals(grid, rows)


def _recentre(A: RaySet):
    guess = median_center(A)
    vol = A.volume()

    def F(x):
        return axial_moment(translate_axial(A, x)) / vol

    if abs(F(0.0)) <= 1e-14:
        return A, 0.0
    d = 1e-9 + 1e-2 * abs(guess)
    for _ in range(60):
        lo, hi = guess - d, guess + d
        if F(lo) <= 0.0 <= F(hi):
            x0 = brentq(F, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
            return translate_axial(A, x0), x0
        d *= 2.0
    raise ValueError("could not bracket the axial recentring offset")


@dataclass(frozen=True)
class SurgeryReport:
    C: float
    R: float
    rho: float
    r_outer: float
    r_inner: float
    x0: float
    eps: float
    alpha_before: float
    alpha_after: float
    P1: float | None
    P2: float
    P3: bool
    P4: float
    eps_ratio: float
    median_ratio: float


def surgery_reduce(A: RaySet, params: KernelParams, C: float = DEFAULT_C, report: bool = False, deficits: bool = True):
    """(A_tilde, eps) with e^{-eps} B subset A_tilde subset e^{eps} B.

    A is scaled and translated along the axis so that its optimal ball is
    B^n before the three steps run.

    With ``report=True`` a SurgeryReport is returned as well: P1 is
    delta(A_tilde) - delta(A) (None if ``deficits`` is False), P2 is
    alpha(A_tilde) - alpha(A), P3 the containment check, P4 the axial moment
    over |A_tilde|, eps_ratio = eps / alpha^{lam/n} and median_ratio =
    |x0| |B^n| / (2 n e alpha).
    """
    params.require_stability_range()
    n = params.n
    A = scale_to_unit(A)
    vb = unit_ball_volume(n)
    alpha, t_opt = asymmetry(A)
    if t_opt != 0.0:
        # centre first: the optimal ball becomes B^n
        A = scale_to_unit(translate_axial(A, -t_opt))
        alpha, _ = asymmetry(A)
    R = C * alpha ** (params.lam / n)
    if R > 0.5:
        raise ValueError(f"alpha={alpha:.3g} too large for C={C}: R={R:.3g} > 1/2")
    rho = 2.0 * alpha / vb
    A1, r1 = _step_outer(A, R, rho)
    A2, r2 = _step_inner(A1, R, rho)
    At, x0 = _recentre(A2)
    At = scale_to_unit(At)
    eps = -np.log(1.0 - R - abs(x0))
    if not report:
        return At, eps
    # containment: every ray starts with [0, b), b >= e^{-eps}, and ends below e^{eps}
    inner_ok = bool(np.all(At.a[:, 0] == 0.0) and np.all(At.b[:, 0] >= np.exp(-eps)))
    outer_ok = bool(np.max(At.b) <= np.exp(eps))
    alpha_after, _ = asymmetry(At)
    P1 = None
    if deficits:
        from .functionals import deficit

        P1 = deficit(At, params).delta - deficit(A, params).delta
    rep = SurgeryReport(
        C=C,
        R=R,
        rho=rho,
        r_outer=r1,
        r_inner=r2,
        x0=x0,
        eps=eps,
        alpha_before=alpha,
        alpha_after=alpha_after,
        P1=P1,
        P2=alpha_after - alpha,
        P3=inner_ok and outer_ok,
        P4=axial_moment(At) / At.volume(),
        eps_ratio=eps / alpha ** (params.lam / n) if alpha > 0 else 0.0,
        median_ratio=abs(x0) * vb / (2.0 * n * np.e * alpha) if alpha > 0 else 0.0,
    )
    return At, eps, rep
