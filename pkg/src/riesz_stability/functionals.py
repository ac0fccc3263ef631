"""First and second variations, the deficit, and their spherical models.

For f = 1_B - 1_A,

    E(B) - E(A) = V(A) - W(A),  V = 2 int f Phi,  W = int int f(x) f(y) phi(x - y),

which is exact, so the deficit is never formed as a difference of energies.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.special import hyp2f1

from .funk_hecke import beta_table
from .jsonio import dumps
from .mc import MCResult, mc_energy, mc_second_variation
from .riesz_kernel import KernelParams, QuadratureError, ball_potential
from .sphere_math import ZonalFn, unit_ball_volume, unit_sphere_area, zonal_expand
from .star_sets import MassProfiles, RaySet, annulus_eps, asymmetry, ball_intersection_volume, mass_profiles, scale_to_unit
from .wquad import second_variation_quadrature

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "ConstraintReport",
    "DeficitReport",
    "VariationResult",
    "constraint_check",
    "deficit",
    "first_variation",
    "mc_energy",
    "second_variation",
    "spherical_V",
    "spherical_W",
    "spherical_W_detail",
    "toy_bound",
]

REPORT_SCHEMA_VERSION = 1
# spherical_W truncation degree
DEFAULT_K = 64
# accepted |GL20 - GL10| per unit length on outer radial segments
_RADIAL_TOL = 1e-13
_GL20 = np.polynomial.legendre.leggauss(20)
_GL10 = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class VariationResult:
    value: float
    error: float
    method: str


# first variation


def _inner_primitive(params: KernelParams, R):
    """int_0^R Phi(r) r^{n-1} dr for R <= 1."""
    n, lam = params.n, params.lam
    a = 0.5 * (n - lam)
    pre = unit_sphere_area(n) / params.c
    R = np.asarray(R, dtype=float)
    return pre / lam * R**n / n * hyp2f1(a, -0.5 * lam, 0.5 * n + 1.0, R * R)


def _gl(params, lo, hi, rule):
    x, w = rule
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    r = mid[:, None] + half[:, None] * x
    return half * np.sum(w * ball_potential(params, r) * r ** (params.n - 1), axis=1)


def _outer_integrals(params: KernelParams, lo, hi):
    """int_lo^hi Phi(r) r^{n-1} dr for 1 <= lo < hi by adaptive bisection."""
    out = np.zeros(lo.size)
    err = np.zeros(lo.size)
    owner = np.arange(lo.size)
    for _ in range(60):
        if owner.size == 0:
            return out, err
        fine = _gl(params, lo, hi, _GL20)
        diff = np.abs(fine - _gl(params, lo, hi, _GL10))
        ok = diff <= _RADIAL_TOL * np.maximum(hi - lo, 1e-3)
        np.add.at(out, owner[ok], fine[ok])
        np.add.at(err, owner[ok], diff[ok])
        mid = 0.5 * (lo + hi)
        bad = ~ok
        owner = np.concatenate([owner[bad], owner[bad]])
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
    if owner.size:
        raise QuadratureError("first variation: radial quadrature did not converge")
    return out, err


def _first_variation(A: RaySet, params: KernelParams):
    lo, hi, sign = A.signed_segments()
    keep = hi > lo
    contrib = np.zeros(lo.shape)
    errs = np.zeros(lo.shape)
    inner = keep & (hi <= 1.0)
    contrib[inner] = _inner_primitive(params, hi[inner]) - _inner_primitive(params, lo[inner])
    outer = keep & ~inner
    if np.any(outer):
        v, e = _outer_integrals(params, lo[outer], hi[outer])
        contrib[outer] = v
        errs[outer] = e
    w = A.grid.weights
    value = 2.0 * float(w @ np.sum(sign * contrib, axis=1))
    # rounding of the closed form plus the Gauss-Legendre estimate
    error = 2.0 * float(w @ np.sum(errs, axis=1)) + 1e-14 * float(w @ np.sum(np.abs(contrib), axis=1))
    return value, error


def first_variation(A: RaySet, params: KernelParams) -> float:
    """V(A) = 2 int (1_B - 1_A) Phi_lambda dx, ray by ray."""
    return _first_variation(A, params)[0]


# second variation


def second_variation(
    A: RaySet,
    params: KernelParams,
    method: str = "auto",
    samples: int = 2 * 10**6,
    seed: int = 0,
    K: int | None = None,
) -> VariationResult:
    """W(A) with an error estimate.

    ``quadrature`` needs A Delta B to avoid a neighbourhood of the origin
    (true under the annulus condition); ``auto`` falls back to ``mc``
    otherwise.  The MC error is one standard error.
    """
    if method not in ("auto", "quadrature", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method != "mc":
        lo, hi, _ = A.signed_segments()
        keep = hi > lo
        if np.all(lo[keep] > 0.0):
            r = second_variation_quadrature(A, params, K=K)
            return VariationResult(r.value, r.error, "quadrature")
        if method == "quadrature":
            raise ValueError("quadrature for W needs A Delta B away from the origin")
    r = mc_second_variation(A, params, samples=samples, seed=seed)
    return VariationResult(r.value, r.stderr, "mc")


# spherical model


def spherical_V(M: MassProfiles, params: KernelParams) -> float:
    """2 Phi|_S (|B| - |A|) + beta_1 (||M_+||^2 + ||M_-||^2)."""
    params.require_stability_range()
    phi1 = ball_potential(params, 1.0)
    b1 = beta_table(params.n, params.lam, 1).beta[1]
    plus, minus = M.norms_sq
    excess = (M.M_plus - M.M_minus).integral()
    return float(-2.0 * phi1 * excess + b1 * (plus + minus))


def spherical_W_detail(M: ZonalFn, params: KernelParams, K: int = DEFAULT_K):
    """(W(M), truncation estimate) with W(M) = sum_{k<=K} beta_k ||Y_k||^2.

    K is clamped to m - 1; the estimate is the mass of the upper half of
    the retained degrees.
    """
    params.require_stability_range()
    K = min(K, M.grid.m - 1)
    coeffs = zonal_expand(M, K)
    beta = beta_table(params.n, params.lam, K).beta
    terms = beta * coeffs.component_norms_sq
    return float(np.sum(terms)), float(abs(np.sum(terms[K // 2 + 1 :])))


def spherical_W(M: ZonalFn, params: KernelParams, K: int = DEFAULT_K) -> float:
    """W(M) = int int M(xi) M(eta) phi_lambda(xi - eta) = sum_k beta_k ||Y_k||^2."""
    return spherical_W_detail(M, params, K)[0]


@dataclass(frozen=True)
class ConstraintReport:
    mass_plus: float
    mass_minus: float
    mass_residual: float
    first_moment: float
    half_alpha_ok: bool | None

    def holds(self, tol: float = 1e-9) -> bool:
        scale = max(self.mass_plus + self.mass_minus, 1e-300)
        ok = abs(self.mass_residual) <= tol * scale and abs(self.first_moment) <= tol * scale
        return ok and self.half_alpha_ok is not False


def constraint_check(M: MassProfiles, alpha: float | None = None, tol: float = 1e-9) -> ConstraintReport:
    """Residuals of int M_+ = int M_-, int xi (M_+ - M_-) = 0 and int M_+- >= alpha/2."""
    plus = M.M_plus.integral()
    minus = M.M_minus.integral()
    moment = M.M.first_moment()
    half = None
    if alpha is not None:
        half = bool(min(plus, minus) >= 0.5 * alpha - tol * max(alpha, 1.0))
    return ConstraintReport(plus, minus, plus - minus, moment, half)


def toy_bound(M: MassProfiles, params: KernelParams, tol: float = 1e-10) -> float:
    """(beta_1 - beta_2)(||M_+||^2 + ||M_-||^2), after checking V - W exceeds it.

    Raises ValueError when M_+- is negative, the constraints fail, or the
    inequality is violated beyond ``tol``.
    """
    params.require_stability_range()
    if np.any(M.M_plus.values < 0.0) or np.any(M.M_minus.values < 0.0):
        raise ValueError("mass profiles must be nonnegative")
    report = constraint_check(M)
    if not report.holds():
        raise ValueError(f"constraints violated: {report}")
    beta = beta_table(params.n, params.lam, 2).beta
    plus, minus = M.norms_sq
    bound = float((beta[1] - beta[2]) * (plus + minus))
    gap = spherical_V(M, params) - spherical_W(M.M, params, K=M.M.grid.m - 1)
    if gap < bound - tol:
        raise ValueError(f"toy inequality violated: V - W = {gap} < {bound}")
    return bound


# deficit


@dataclass(frozen=True)
class DeficitReport:
    schema_version: int
    n: int
    lam: float
    family: str
    eps: float
    annulus_eps: float
    alpha: float
    alpha_centered: float
    t_opt: float
    V_cal: float
    W_cal: float
    delta: float
    M_plus_sq: float
    M_minus_sq: float
    V_sph: float
    W_sph: float
    toy_bound: float
    quad_error: float
    mc_error: float
    seed: int
    W_method: str

    @property
    def error(self) -> float:
        """Combined error estimate of delta."""
        return self.quad_error + self.mc_error

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent=None) -> str:
        return dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "DeficitReport":
        if d.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls(**{f.name: d[f.name] for f in fields(cls)})

    @classmethod
    def from_json(cls, text: str) -> "DeficitReport":
        return cls.from_dict(json.loads(text))


def deficit(
    A: RaySet,
    params: KernelParams,
    family: str = "custom",
    eps: float | None = None,
    method: str = "auto",
    samples: int = 2 * 10**6,
    seed: int = 0,
) -> DeficitReport:
    """Evaluate delta(A) = V - W for A scaled to |B^n| and collect diagnostics.

    ``eps`` records the family parameter; the annulus parameter of the scaled
    set is reported separately.
    """
    params.require_stability_range()
    A = scale_to_unit(A)
    n = params.n
    vol_b = unit_ball_volume(n)
    V, v_err = _first_variation(A, params)
    W = second_variation(A, params, method=method, samples=samples, seed=seed)
    alpha, t_opt = asymmetry(A)
    alpha_centered = 2.0 * (vol_b - ball_intersection_volume(A, 0.0))
    prof = mass_profiles(A)
    plus, minus = prof.norms_sq
    beta = beta_table(n, params.lam, 2).beta
    ann = annulus_eps(A)
    return DeficitReport(
        schema_version=REPORT_SCHEMA_VERSION,
        n=n,
        lam=params.lam,
        family=family,
        eps=float(ann if eps is None else eps),
        annulus_eps=float(ann),
        alpha=float(alpha),
        alpha_centered=float(alpha_centered),
        t_opt=float(t_opt),
        V_cal=V,
        W_cal=W.value,
        delta=V - W.value,
        M_plus_sq=float(plus),
        M_minus_sq=float(minus),
        V_sph=spherical_V(prof, params),
        W_sph=spherical_W(prof.M, params),
        toy_bound=float((beta[1] - beta[2]) * (plus + minus)),
        quad_error=v_err + (W.error if W.method == "quadrature" else 0.0),
        mc_error=W.error if W.method == "mc" else 0.0,
        seed=int(seed),
        W_method=W.method,
    )
