"""Funk-Hecke multipliers of the Riesz kernel on the sphere.

For a degree-k spherical harmonic Y_k,

    int_{S^{n-1}} phi_lambda(r xi - eta) Y_k(eta) deta = b_k(r) Y_k(xi),   0 <= r <= 1,

and beta_k = b_k(1).  Writing t = cos(theta) for the angle between xi and eta,
the integrals reduce to one-dimensional Jacobi-weighted integrals over t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, hyp2f1, roots_jacobi

from .riesz_kernel import KernelParams, hyp2f1_near_one, riesz_constant
from .sphere_math import (
    _meridian_factor,
    angular_grid,
    gegenbauer_basis,
    zonal_at_pole,
    zonal_eval,
)

__all__ = [
    "MultiplierTable",
    "PerturbationMultipliers",
    "beta0",
    "beta_direct",
    "beta_table",
    "bk_radial",
    "l_operator_norm",
    "perturbation_multipliers",
    "radial_multipliers",
    "toy_gap",
]

MAX_TAIL_DEGREE = 1 << 14


def _check_stability_range(n: int, lam: float):
    KernelParams(n, lam).require_stability_range()


def _slice_prefactor(n: int, lam: float) -> float:
    # |e - eta|^{lam-n} = 2^{(lam-n)/2} (1-t)^{(lam-n)/2}, and the zonal
    # measure is |S^{n-2}| (1-t^2)^{(n-3)/2} dt
    return _meridian_factor(n) * 2.0 ** (0.5 * (lam - n)) / riesz_constant(n, lam)


def _jacobi_slice_rule(n: int, lam: float, m: int):
    """Gauss-Jacobi rule for the weight (1-t)^{(lam-3)/2} (1+t)^{(n-3)/2}."""
    t, w = roots_jacobi(m, 0.5 * (lam - 3.0), 0.5 * (n - 3.0))
    return t, w * _slice_prefactor(n, lam)


def beta0(n: int, lam: float, m: int = 16) -> float:
    """beta_0 = (1/c_lambda) int_{S^{n-1}} |e_n - eta|^{lambda-n} deta.

    The integrand is constant against the Gauss-Jacobi weight, so the rule is
    exact.  The integral diverges for lambda <= 1.
    """
    KernelParams(n, lam)
    if lam <= 1.0:
        raise ValueError(f"beta_0 diverges for lambda <= 1 (got lambda={lam})")
    _, w = _jacobi_slice_rule(n, lam, m)
    val = float(w.sum())
    if not np.isfinite(val) or val <= 0.0:
        raise ArithmeticError(f"beta_0 quadrature failed for n={n}, lambda={lam}")
    return val


def beta_direct(n: int, lam: float, k: int, m: int | None = None) -> float:
    """beta_k by Gauss-Jacobi quadrature of Z_k against the kernel slice.

    Only used to cross-check the recursion in :func:`beta_table`.
    """
    _check_stability_range(n, lam)
    if k < 0:
        raise ValueError("degree must be non-negative")
    if m is None:
        m = k // 2 + 40
    t, w = _jacobi_slice_rule(n, lam, m)
    val = float(np.dot(w, zonal_eval(k, n, t))) / zonal_at_pole(k, n)
    if not np.isfinite(val):
        raise ArithmeticError(f"beta_{k} quadrature failed for n={n}, lambda={lam}")
    return val


@dataclass(frozen=True, eq=False)
class MultiplierTable:
    """beta_0..beta_K for fixed (n, lambda), with the origin of each entry."""

    n: int
    lam: float
    beta: np.ndarray
    provenance: tuple

    @property
    def K(self) -> int:
        return self.beta.size - 1

    @property
    def params(self) -> KernelParams:
        return KernelParams(self.n, self.lam)

    def radial(self, k: int, r):
        return bk_radial(self.n, self.lam, k, r)


def _recursion_ratios(n: int, lam: float, K: int) -> np.ndarray:
    k = np.arange(K, dtype=float)
    if n == 2:
        # ratio of the Fourier coefficients of (2 - 2 cos theta)^{(lam-2)/2}
        return (2 * k + 2 - lam) / (2 * k + lam)
    return (n - lam + 2 * k) / (n + lam + 2 * k - 2)


@lru_cache(maxsize=128)
def _beta_cached(n: int, lam: float, K: int) -> MultiplierTable:
    b0 = beta0(n, lam)
    beta = np.empty(K + 1)
    beta[0] = b0
    if K:
        beta[1:] = b0 * np.cumprod(_recursion_ratios(n, lam, K))
    beta.setflags(write=False)
    prov = ("quadrature",) + ("recursion",) * K
    return MultiplierTable(n, lam, beta, prov)


def beta_table(n: int, lam: float, K: int) -> MultiplierTable:
    """beta_0..beta_K: beta_0 by quadrature, the rest by the Gamma recursion."""
    _check_stability_range(n, lam)
    if K < 0:
        raise ValueError("K must be non-negative")
    return _beta_cached(int(n), float(lam), int(K))


@lru_cache(maxsize=64)
def _norm_over_pole(n: int, K: int) -> np.ndarray:
    # ||Z_k||^2 / Z_k(1), with the norms by quadrature
    basis = gegenbauer_basis(angular_grid(n, K + 2), K)
    pole = np.array([zonal_at_pole(k, n) for k in range(K + 1)])
    out = basis.norms_sq / pole
    out.setflags(write=False)
    return out


def _hyp_near_one(A, B, C, lam, v):
    """2F1(A, B; C; 1 - v) for C - A - B = lam - 1."""
    return hyp2f1_near_one(A, B, C, lam - 1.0, v)


def _series(A, B, C, lam, rho, v):
    z = rho * rho
    # the connection formula is singular when lam - 1 is an integer
    if abs(lam - round(lam)) < 0.02:
        return hyp2f1(A, B, C, z)
    # the two connection terms cancel once (A + 1) v grows
    near = (z > 0.5) & ((A + 1.0) * v <= 4.0)
    out = np.empty(np.broadcast_shapes(np.shape(A), np.shape(z)))
    Ab, Bb, Cb, zb = np.broadcast_arrays(A, B, C, z)
    vb = np.broadcast_to(v, out.shape)
    nearb = np.broadcast_to(near, out.shape)
    out[~nearb] = hyp2f1(Ab[~nearb], Bb[~nearb], Cb[~nearb], zb[~nearb])
    out[nearb] = _hyp_near_one(Ab[nearb], Bb[nearb], Cb[nearb], lam, vb[nearb])
    return out


def radial_multipliers(n: int, lam: float, K: int, rho, *, log_rho=None) -> np.ndarray:
    """b_0(rho)..b_K(rho) as an array of shape (K + 1,) + rho.shape.

    Uses the Gegenbauer expansion of (1 - 2 rho t + rho^2)^{-a}, a = (n-lam)/2,
    whose k-th coefficient is (a)_k/(nu)_k rho^k 2F1(a+k, a-nu; k+nu+1; rho^2)
    for n >= 3 and 2 (a)_k/k! rho^k 2F1(a+k, a; k+1; rho^2) for n = 2 (k >= 1).
    Close to rho = 1 the 2F1 is evaluated through its expansion about 1;
    passing ``log_rho`` keeps 1 - rho^2 accurate there.
    """
    KernelParams(n, lam)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or np.any(rho > 1.0):
        raise ValueError("rho must lie in [0, 1]")
    if log_rho is None:
        v = (1.0 - rho) * (1.0 + rho)
    else:
        v = -np.expm1(2.0 * np.asarray(log_rho, dtype=float))
    a = 0.5 * (n - lam)
    k = np.arange(K + 1, dtype=float).reshape((-1,) + (1,) * rho.ndim)
    if n == 2:
        logc = np.log(2.0) + gammaln(a + k) - gammaln(a) - gammaln(k + 1)
        logc[0] = 0.0
        series = _series(a + k, a + 0 * k, k + 1, lam, rho, v)
    else:
        nu = 0.5 * (n - 2)
        logc = gammaln(a + k) - gammaln(a) - gammaln(nu + k) + gammaln(nu)
        series = _series(a + k, a - nu + 0 * k, k + nu + 1, lam, rho, v)
    with np.errstate(divide="ignore"):
        powk = np.where(k == 0, 1.0, rho**k)
    ratio = _norm_over_pole(n, K).reshape(k.shape)
    return np.exp(logc) * powk * series * ratio / riesz_constant(n, lam)


def _bk_quadrature(n: int, lam: float, k: int, r: float) -> float:
    pref = _meridian_factor(n) / riesz_constant(n, lam)
    e = 0.5 * (n - 3.0)
    pole = zonal_at_pole(k, n)
    if r == 1.0:
        return beta_direct(n, lam, k)

    def f(t):
        return (1.0 + r * r - 2.0 * r * t) ** (0.5 * (lam - n)) * zonal_eval(k, n, t) / pole

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val, err = quad(f, -1.0, 1.0, weight="alg", wvar=(e, e), limit=500, epsabs=1e-14, epsrel=1e-12)
    if err > 1e-9 * max(1.0, abs(val)):
        raise ArithmeticError(f"b_{k}({r}) quadrature error {err:.3g}")
    return pref * val


def bk_radial(n: int, lam: float, k: int, r, method: str = "auto"):
    """Radial multiplier b_k(r) for r in [0, 1]; b_k(1) = beta_k.

    ``method`` is "closed-form" (lambda = 2 only, b_k = beta_k r^k),
    "series" (hypergeometric expansion), "quadrature" (adaptive
    Jacobi-weighted quadrature) or "auto".
    """
    _check_stability_range(n, lam)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0) or np.any(r_arr > 1.0):
        raise ValueError("r must lie in [0, 1]")
    if method == "auto":
        method = "closed-form" if lam == 2.0 else "series"
    if method == "closed-form":
        if lam != 2.0:
            raise ValueError("the closed form b_k = beta_k r^k holds only for lambda = 2")
        out = beta_table(n, lam, k).beta[k] * r_arr**k
    elif method == "series":
        out = radial_multipliers(n, lam, k, r_arr)[k]
    elif method == "quadrature":
        out = np.vectorize(lambda x: _bk_quadrature(n, lam, k, float(x)))(r_arr)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class PerturbationMultipliers:
    """mu_k = e^{(n-lam) eps} beta_k - e^{-2(n-lam) eps} b_k(e^{-2 eps}), k <= K."""

    n: int
    lam: float
    eps: float
    mu: np.ndarray
    tail_bound: float

    @property
    def K(self) -> int:
        return self.mu.size - 1

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.mu))) if self.mu.size else 0.0


def perturbation_multipliers(n: int, lam: float, eps: float, K: int = 64) -> PerturbationMultipliers:
    _check_stability_range(n, lam)
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    beta = beta_table(n, lam, K).beta
    d = n - lam
    rad = radial_multipliers(n, lam, K, np.exp(-2.0 * eps))
    mu = np.exp(d * eps) * beta - np.exp(-2.0 * d * eps) * rad
    if eps == 0.0:
        mu = np.zeros_like(mu)
    # for k > K: 0 < mu_k < e^{(n-lam) eps} beta_k <= e^{(n-lam) eps} beta_K
    tail = float(np.exp(d * eps) * beta[K]) if eps > 0.0 else 0.0
    return PerturbationMultipliers(n, lam, float(eps), mu, tail)


def l_operator_norm(n: int, lam: float, eps: float, K: int | None = None) -> float:
    """Operator norm of L_{lambda,eps} on L^2(S^{n-1}): sup_k |mu_k|.

    The tail k > K is controlled by e^{(n-lam) eps} beta_K; if that bound is
    not below the maximum over k <= K the truncation is too short.  With
    ``K=None`` the degree is doubled from 64 until the check passes.
    """
    if eps == 0.0:
        return 0.0
    grow = K is None
    K = 64 if K is None else int(K)
    while True:
        pm = perturbation_multipliers(n, lam, eps, K)
        if pm.tail_bound <= pm.sup_norm:
            return pm.sup_norm
        if not grow or 2 * K > MAX_TAIL_DEGREE:
            raise ValueError(
                f"tail bound {pm.tail_bound:.3g} exceeds max multiplier {pm.sup_norm:.3g}; increase K (K={K})"
            )
        K *= 2


def toy_gap(n: int, lam: float) -> float:
    """Spectral gap beta_1 - beta_2 of the toy model."""
    beta = beta_table(n, lam, 2).beta
    gap = float(beta[1] - beta[2])
    if not gap > 0.0:
        raise ValueError(f"non-positive gap beta_1 - beta_2 = {gap} for n={n}, lambda={lam}")
    return gap
