"""Riesz kernel, its normalisation, and the potential of the unit ball."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma, gammaln, hyp2f1, rgamma

from .sphere_math import unit_sphere_area

__all__ = [
    "KernelParams",
    "QuadratureError",
    "ball_energy",
    "ball_gradient_at_sphere",
    "ball_potential",
    "potential_slope_fd",
    "riesz_constant",
    "riesz_eval",
    "shell_mean",
]

# endpoints of (0, n) closer than this are rejected: quadrature conditioning
LAMBDA_MARGIN = 0.05
# absolute tolerance for Phi_lambda
POTENTIAL_TOL = 1e-9


class QuadratureError(RuntimeError):
    """An integral did not reach its requested tolerance."""


def riesz_constant(n: int, lam: float) -> float:
    """c_lambda = 2^lambda pi^{n/2} Gamma(lambda/2) / Gamma((n - lambda)/2)."""
    if not 0.0 < lam < n:
        raise ValueError(f"lambda must lie in (0, {n}), got {lam}")
    return float(
        np.exp(lam * np.log(2.0) + 0.5 * n * np.log(np.pi) + gammaln(0.5 * lam) - gammaln(0.5 * (n - lam)))
    )


@dataclass(frozen=True)
class KernelParams:
    """Dimension and exponent of phi_lambda(x) = |x|^{-(n - lambda)} / c_lambda."""

    n: int
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        if not LAMBDA_MARGIN <= self.lam <= self.n - LAMBDA_MARGIN:
            raise ValueError(
                f"lambda={self.lam} outside supported range "
                f"[{LAMBDA_MARGIN}, {self.n - LAMBDA_MARGIN}] for n={self.n}"
            )
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def c(self) -> float:
        return riesz_constant(self.n, self.lam)

    @property
    def exponent(self) -> float:
        """The decay exponent n - lambda."""
        return self.n - self.lam

    def require_stability_range(self):
        if not 1.0 < self.lam < self.n:
            raise ValueError(f"this operation needs lambda in (1, n), got lambda={self.lam}, n={self.n}")


def riesz_eval(params: KernelParams, x) -> np.ndarray:
    """phi_lambda at a point x (last axis = coordinates) or at radii |x|.

    A scalar or 1-d input of length != n is treated as radii.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim >= 1 and x.shape[-1] == params.n and not (x.ndim == 1 and params.n == 1):
        r = np.linalg.norm(x, axis=-1)
    else:
        r = np.abs(x)
    if np.any(r == 0.0):
        raise ValueError("phi_lambda has a pole at the origin")
    return r ** (-params.exponent) / params.c


def shell_mean(params: KernelParams, r, s):
    """Average of |r e_n - s eta|^{lambda-n} over eta in S^{n-1}.

    Uses the Gegenbauer generating-function identity
    mean = max^{lambda-n} 2F1(a, a - nu; n/2; (min/max)^2) with
    a = (n - lambda)/2 and nu = (n - 2)/2.  Diverges at r = s when lambda <= 1.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    n, lam = params.n, params.lam
    a = 0.5 * (n - lam)
    nu = 0.5 * (n - 2)
    hi = np.maximum(r, s)
    lo = np.minimum(r, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(hi > 0, (lo / np.where(hi > 0, hi, 1.0)) ** 2, 0.0)
        if lam <= 1.0:
            # keep z off the branch point, where the mean is infinite
            z = np.minimum(z, np.nextafter(1.0, 0.0))
        out = hi ** (lam - n) * hyp2f1(a, a - nu, 0.5 * n, z)
    return out


def _potential_direct(params: KernelParams, r: float, epsabs: float = 1e-13):
    """Phi_lambda(r) and the quadrature error estimate, by adaptive quadrature.

    The shell average is integrated over s in [0, 1] with a breakpoint at
    s = r, where it has an integrable algebraic (or logarithmic) singularity.
    """
    n, lam = params.n, params.lam
    scale = unit_sphere_area(n) / params.c
    if r == 0.0:
        return scale / lam, 0.0

    if lam < 1.0:
        # Euler transform: mean = hi^{lam-n} (1-z)^{lam-1} 2F1(c-a, c-b; c; z),
        # with 1 - z formed without cancellation so the pole is never hit
        a = 0.5 * (n - lam)
        cc = 0.5 * n
        bb = a - 0.5 * (n - 2)

        def integrand(s):
            hi, lo = max(r, s), min(r, s)
            one_minus_z = max((hi - lo) * (hi + lo) / hi**2, 2.0**-52)
            return (
                s ** (n - 1) * hi ** (lam - n) * one_minus_z ** (lam - 1)
                * hyp2f1(cc - a, cc - bb, cc, (lo / hi) ** 2)
            )

    else:

        def integrand(s):
            return s ** (n - 1) * float(shell_mean(params, r, s))

    with warnings.catch_warnings():
        # tolerance is checked explicitly below
        warnings.simplefilter("ignore")
        if r < 1.0:
            v1, e1 = quad(integrand, 0.0, r, limit=200, epsabs=epsabs, epsrel=1e-13)
            v2, e2 = quad(integrand, r, 1.0, limit=200, epsabs=epsabs, epsrel=1e-13)
            val, err = v1 + v2, e1 + e2
        else:
            val, err = quad(integrand, 0.0, 1.0, limit=200, epsabs=epsabs, epsrel=1e-13)
    val, err = scale * val, scale * err
    # below lambda = 1 the singularity at s = r is non-integrable on the
    # sphere and QUADPACK's estimates are pessimistic; accept 1e-8 there
    tol = POTENTIAL_TOL if lam >= 1.0 else 10.0 * POTENTIAL_TOL
    if not np.isfinite(val) or err > tol:
        raise QuadratureError(f"ball potential at r={r}: error estimate {err:.3g} exceeds {tol}")
    return val, err


def hyp2f1_near_one(A, B, C, s, v):
    """2F1(A, B; C; 1 - v) through the z -> 1 - z connection, s = C - A - B.

    Accurate for small v; singular when s is an integer.
    """
    g1 = np.exp(gammaln(C) - gammaln(C - B)) * gamma(s) * rgamma(C - A)
    g2 = np.exp(gammaln(C) - gammaln(A)) * gamma(-s) * rgamma(B)
    return g1 * hyp2f1(A, B, 1.0 - s, v) + v**s * g2 * hyp2f1(C - A, C - B, 1.0 + s, v)


def _outer_hyp(n: int, lam: float, r):
    """2F1(a, a - nu; n/2 + 1; r^{-2}) for r > 1."""
    a = 0.5 * (n - lam)
    A, B, C = a, a - 0.5 * (n - 2), 0.5 * n + 1.0
    z = 1.0 / (r * r)
    # C - A - B = lam; the expansion about z = 1 is far cheaper there
    if abs(lam - round(lam)) < 0.02:
        return hyp2f1(A, B, C, z)
    near = z > 0.5
    out = np.empty_like(z)
    out[~near] = hyp2f1(A, B, C, z[~near])
    rn = r[near]
    out[near] = hyp2f1_near_one(A, B, C, lam, (rn - 1.0) * (rn + 1.0) / (rn * rn))
    return out


def _potential_series(params: KernelParams, r) -> np.ndarray:
    """Phi_lambda(r) from the radial integral of the shell mean, summed termwise.

    Integrating the 2F1 shell mean against s^{n-1} gives
    |S|/(lambda c) 2F1(a, -lambda/2; n/2; r^2) inside the ball and
    |S|/(n c) r^{lambda-n} 2F1(a, a - nu; n/2 + 1; r^{-2}) outside.
    """
    n, lam = params.n, params.lam
    a = 0.5 * (n - lam)
    r = np.abs(np.asarray(r, dtype=float))
    pre = unit_sphere_area(n) / params.c
    inside = r <= 1.0
    out = np.empty_like(r)
    rin = r[inside]
    out[inside] = pre / lam * hyp2f1(a, -0.5 * lam, 0.5 * n, rin * rin)
    rout = r[~inside]
    out[~inside] = pre / n * rout ** (lam - n) * _outer_hyp(n, lam, rout)
    return out


def ball_potential(params: KernelParams, r, *, direct: bool = False):
    """Phi_lambda(r), the Riesz potential of the unit ball at distance r.

    By default the radial integral of the shell mean is summed in closed form
    (accurate to rounding).  ``direct=True`` evaluates the same integral by
    adaptive quadrature, split at s = r, and raises ``QuadratureError`` when
    the error estimate exceeds tolerance.
    """
    if direct:
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        vals = np.array([_potential_direct(params, float(x))[0] for x in rs.ravel()]).reshape(rs.shape)
        return vals if np.ndim(r) else float(vals[0])
    out = _potential_series(params, r)
    return out if np.ndim(r) else float(out)


def potential_slope_fd(params: KernelParams, h: float = 1e-4, *, direct: bool = False) -> float:
    """d Phi_lambda / dr at r = 1 by centred differences across the sphere.

    Near the sphere Phi_lambda is C^1 with one-sided terms |r - 1|^lambda and
    a jump in Phi'', so a centred difference has error terms h^{lambda-1} and
    h.  Both are removed by Richardson extrapolation over h, h/2, h/4.
    """

    def centred(step):
        up = ball_potential(params, 1.0 + step, direct=direct)
        down = ball_potential(params, 1.0 - step, direct=direct)
        return (up - down) / (2.0 * step)

    exps = [1.0]
    if abs(params.lam - 2.0) > 0.05:
        exps.append(params.lam - 1.0)
    steps = h * 0.5 ** np.arange(len(exps) + 1)
    mat = np.column_stack([np.ones_like(steps)] + [steps**p for p in exps])
    rhs = np.array([centred(st) for st in steps])
    return float(np.linalg.solve(mat, rhs)[0])


def ball_gradient_at_sphere(params: KernelParams) -> float:
    """|grad Phi_lambda| on the unit sphere; equals the multiplier beta_1."""
    params.require_stability_range()
    from .funk_hecke import beta_table

    return float(beta_table(params.n, params.lam, 1).beta[1])


def ball_energy(params: KernelParams) -> float:
    """E_lambda(B^n) = 2 (beta_0 - beta_1) |S^{n-1}| / (lambda (n + lambda)).

    For lambda <= 1 the multipliers diverge but their difference
    lambda * Phi_lambda(1) does not, so the potential is used instead.
    """
    n, lam = params.n, params.lam
    area = unit_sphere_area(n)
    if lam > 1.0:
        from .funk_hecke import beta_table

        b = beta_table(n, lam, 1).beta
        return 2.0 * (b[0] - b[1]) * area / (lam * (n + lam))
    return 2.0 * ball_potential(params, 1.0) * area / (n + lam)
