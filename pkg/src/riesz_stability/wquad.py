"""Quadrature for W(A) = int int f(x) f(y) phi_lambda(x - y), f = 1_B - 1_A.

With x = e^u xi, y = e^v eta and the zonal expansion of the kernel,

    W = sum_k ||Z_k||^{-2} int int g_k(u) g_k(v) H_k(|u - v|) du dv,

where g_k(u) = e^{(n+lam) u/2} int f(e^u xi) Z_k(xi) dxi and
H_k(d) = e^{(lam-n) d/2} b_k(e^{-d}).  The log-radius axis is cut into cells
of width h; g_k is replaced by its cell averages (exact for the piecewise
constant ray profiles up to the position of jumps inside a cell) and the
cell-pair integrals of H_k, which depend only on the lag, are tabulated once
per (n, lambda, h, K).  The cusp of H_k at d = 0 is integrated on a graded
mesh.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .funk_hecke import beta_table, radial_multipliers
from .riesz_kernel import KernelParams
from .sphere_math import gegenbauer_basis
from .star_sets import RaySet

__all__ = ["WQuadResult", "second_variation_quadrature"]

CELLS = 256
# h is taken from the ladder 2^{j/4} so lag tables can be reused
LADDER = 4
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GRADE_LEVELS = 30


def _kernel_H(n: int, lam: float, K: int, d: np.ndarray) -> np.ndarray:
    rho = np.exp(-d)
    if lam == 2.0:
        beta = beta_table(n, lam, K).beta
        k = np.arange(K + 1).reshape((-1,) + (1,) * d.ndim)
        b = beta.reshape(k.shape) * rho**k
    else:
        b = radial_multipliers(n, lam, K, rho, log_rho=-d)
    return b * np.exp(0.5 * (lam - n) * d)


@lru_cache(maxsize=256)
def _lag_table(n: int, lam: float, j: int, K: int, lags: int) -> np.ndarray:
    """T[k, l] = int int over two cells at lag l of H_k(|u - v|), h = 2^{j/LADDER}."""
    h = 2.0 ** (j / LADDER)
    # cells 1.. lags-1: plain Gauss-Legendre on each cell
    left = np.arange(lags) * h
    u = left[:, None] + 0.5 * h * (_GL_X + 1.0)
    w = np.broadcast_to(0.5 * h * _GL_W, u.shape)
    # cell 0: geometric grading toward the cusp at d = 0
    edges = h * 2.0 ** -np.arange(_GRADE_LEVELS, -1, -1, dtype=float)
    edges = np.concatenate([[0.0], edges])
    lo, hi = edges[:-1], edges[1:]
    u0 = lo[:, None] + 0.5 * (hi - lo)[:, None] * (_GL_X + 1.0)
    w0 = 0.5 * (hi - lo)[:, None] * _GL_W
    H = _kernel_H(n, lam, K, u[1:])  # (K+1, lags-1, 8)
    H0 = _kernel_H(n, lam, K, u0)  # (K+1, levels, 8)
    rel = u - left[:, None]
    i_right = np.empty((K + 1, lags))
    i_left = np.empty((K + 1, lags))
    i_right[:, 1:] = np.sum(H * (w[1:] * (h - rel[1:])), axis=2)
    i_left[:, 1:] = np.sum(H * (w[1:] * rel[1:]), axis=2)
    i_right[:, 0] = np.sum(H0 * (w0 * (h - u0)), axis=(1, 2))
    i_left[:, 0] = np.sum(H0 * (w0 * u0), axis=(1, 2))
    T = np.empty((K + 1, lags))
    T[:, 0] = 2.0 * i_right[:, 0]
    T[:, 1:] = i_left[:, :-1] + i_right[:, 1:]
    T.setflags(write=False)
    return T


@dataclass(frozen=True)
class WQuadResult:
    value: float
    error: float
    value_coarse: float
    tail: float
    cells: int
    K: int


def _cell_integrals(A: RaySet, c1: float, h: float, a0: int, N: int) -> np.ndarray:
    """Per node and cell, int over the cell of f(e^u) e^{c1 u} du."""
    lo, hi, sign = A.signed_segments()
    keep = hi > lo
    with np.errstate(divide="ignore"):
        xlo = np.where(keep, np.log(np.where(keep, lo, 1.0)), 0.0)
        xhi = np.where(keep, np.log(np.where(keep, hi, 1.0)), 0.0)
    bounds = (a0 + np.arange(N + 1)) * h
    clo = np.maximum(bounds[None, None, :-1], xlo[..., None])
    chi = np.minimum(bounds[None, None, 1:], xhi[..., None])
    chi = np.maximum(chi, clo)
    piece = np.exp(c1 * clo) * np.expm1(c1 * (chi - clo)) / c1
    return np.sum(sign[..., None] * piece, axis=1)


def _evaluate(A: RaySet, params: KernelParams, K: int, j: int, xmin: float, xmax: float):
    h = 2.0 ** (j / LADDER)
    a0 = int(np.floor(xmin / h))
    a1 = int(np.ceil(xmax / h))
    N = max(a1 - a0, 1)
    c1 = 0.5 * (params.n + params.lam)
    cells = _cell_integrals(A, c1, h, a0, N)  # (m, N)
    basis = gegenbauer_basis(A.grid, K)
    g = (basis.table * A.grid.weights) @ cells / h  # (K+1, N)
    # lag tables are cached for a fixed length per ladder step
    lags = CELLS + 8 if N <= CELLS + 8 else N
    T = _lag_table(params.n, params.lam, j, K, lags)[:, :N]
    L = 1 << int(np.ceil(np.log2(2 * N)))
    G = np.fft.rfft(g, n=L, axis=1)
    corr = np.fft.irfft(G * np.conj(G), n=L, axis=1)[:, :N]
    per_k = (T[:, 0] * corr[:, 0] + 2.0 * np.sum(T[:, 1:] * corr[:, 1:], axis=1)) / basis.norms_sq
    return per_k, N


def second_variation_quadrature(A: RaySet, params: KernelParams, K: int | None = None) -> WQuadResult:
    """W(A) for a set inside an annulus e^{-eps} B subset A subset e^{eps} B.

    The error estimate adds the change under doubling the cell width and the
    contribution of the upper half of the retained degrees.
    """
    params.require_stability_range()
    lo, hi, _ = A.signed_segments()
    keep = hi > lo
    if not np.any(keep):
        return WQuadResult(0.0, 0.0, 0.0, 0.0, 0, 0)
    if np.any(lo[keep] <= 0.0):
        raise ValueError("quadrature for W needs the annulus condition; use the Monte-Carlo method")
    xs = np.log(np.concatenate([lo[keep], hi[keep]]))
    xmin, xmax = min(float(xs.min()), 0.0), max(float(xs.max()), 0.0)
    span = xmax - xmin
    if K is None:
        K = A.grid.m - 1
    j = int(np.ceil(LADDER * np.log2(span / CELLS)))
    per_k, N = _evaluate(A, params, K, j, xmin, xmax)
    coarse, _ = _evaluate(A, params, K, j + LADDER, xmin, xmax)
    value = float(np.sum(per_k))
    value_coarse = float(np.sum(coarse))
    tail = float(abs(np.sum(per_k[K // 2 + 1 :]))) if K >= 2 else 0.0
    err = abs(value - value_coarse) + tail
    return WQuadResult(value, err, value_coarse, tail, N, K)
