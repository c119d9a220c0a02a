"""Pure numpy flow kernels, semantically identical to the compiled core.

Each kernel evaluates the radial velocity dr/dt = v / ((n-1) p_1) of the
expanding flow for one grid layout and reports min p_1 so the caller can
enforce mean-convexity. Kept free of the geometry module's field assembly:
this is the per-stage hot path, so only p_1 and v are formed.
"""

from __future__ import annotations

import numpy as np


def _pad_1d(f: np.ndarray, parity: float) -> np.ndarray:
    return np.concatenate([parity * f[1::-1], f, parity * f[:-3:-1]])


def axisym_rhs(r: np.ndarray, psi: np.ndarray, h: float, n: int):
    """Radial velocity on the axisymmetric grid. Returns (drdt, min_p1)."""
    g = _pad_1d(r, 1.0)
    r1 = (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * h)
    r2 = (-g[4:] + 16.0 * g[3:-1] - 30.0 * g[2:-2] + 16.0 * g[1:-3] - g[:-4]) / (
        12.0 * h * h
    )
    lam = np.sinh(r)
    lam_p = np.cosh(r)
    phi_p = r1 / lam
    v_sq = 1.0 + phi_p * phi_p
    v = np.sqrt(v_sq)
    phi_pp = r2 / lam - lam_p / (lam * lam) * r1 * r1
    kap_r = lam_p / (v * lam) - phi_pp / (lam * v * v_sq)
    kap_a = lam_p / (v * lam) - phi_p / (np.tan(psi) * v * lam)
    p1 = (kap_r + (n - 2) * kap_a) / (n - 1)
    return v / ((n - 1) * p1), float(p1.min())


def s2_rhs(r: np.ndarray, psi: np.ndarray, h_psi: float, h_theta: float):
    """Radial velocity on the 2-sphere grid (ambient n = 3).

    p_1 is the half-trace g^ij h_ij, so no eigensolve is needed here.
    """
    npsi, ntheta = r.shape
    half = ntheta // 2
    g = np.concatenate(
        [np.roll(r[1::-1], half, axis=1), r, np.roll(r[:-3:-1], half, axis=1)],
        axis=0,
    )
    r_p = (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * h_psi)
    r_pp = (-g[4:] + 16.0 * g[3:-1] - 30.0 * g[2:-2] + 16.0 * g[1:-3] - g[:-4]) / (
        12.0 * h_psi**2
    )
    up1, up2 = np.roll(r, -1, axis=1), np.roll(r, -2, axis=1)
    dn1, dn2 = np.roll(r, 1, axis=1), np.roll(r, 2, axis=1)
    r_t = (-up2 + 8.0 * up1 - 8.0 * dn1 + dn2) / (12.0 * h_theta)
    r_tt = (-up2 + 16.0 * up1 - 30.0 * r + 16.0 * dn1 - dn2) / (12.0 * h_theta**2)
    gt = np.concatenate(
        [np.roll(r_t[1::-1], half, axis=1), r_t, np.roll(r_t[:-3:-1], half, axis=1)],
        axis=0,
    )
    r_pt = (-gt[4:] + 8.0 * gt[3:-1] - 8.0 * gt[1:-3] + gt[:-4]) / (12.0 * h_psi)

    sin = np.sin(psi)[:, None]
    cos = np.cos(psi)[:, None]
    cot = cos / sin
    sin2 = sin * sin
    # covariant Hessian of r on the round sphere
    c_pp = r_pp
    c_pt = r_pt - cot * r_t
    c_tt = r_tt + sin * cos * r_p

    lam = np.sinh(r)
    lam_p = np.cosh(r)
    phi_p = r_p / lam
    phi_t = r_t / lam
    f_pp = c_pp / lam - lam_p / (lam * lam) * r_p * r_p
    f_pt = c_pt / lam - lam_p / (lam * lam) * r_p * r_t
    f_tt = c_tt / lam - lam_p / (lam * lam) * r_t * r_t

    lam2 = lam * lam
    g_pp = lam2 * (1.0 + phi_p * phi_p)
    g_pt = lam2 * phi_p * phi_t
    g_tt = lam2 * (sin2 + phi_t * phi_t)
    grad_sq = phi_p * phi_p + (phi_t * phi_t) / sin2
    v = np.sqrt(1.0 + grad_sq)

    s = lam_p / (v * lam)
    h_pp = s * g_pp - (lam / v) * f_pp
    h_pt = s * g_pt - (lam / v) * f_pt
    h_tt = s * g_tt - (lam / v) * f_tt

    det = g_pp * g_tt - g_pt * g_pt
    trace = (g_tt * h_pp - 2.0 * g_pt * h_pt + g_pp * h_tt) / det
    p1 = 0.5 * trace
    return v / (2.0 * p1), float(p1.min())
