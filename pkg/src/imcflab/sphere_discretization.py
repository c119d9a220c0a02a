"""Grids, covariant derivatives and quadrature on the round sphere.

Two grid flavors cover the star-shaped graphs we evolve:

* ``AxisymmetricGrid``: profiles f(psi) on S^{n-1} for any ambient n >= 3.
  The n-2 rotational directions are handled analytically, so fields are 1D
  arrays over the colatitude psi in (0, pi).
* ``FullSphereGrid``: genuinely 2D fields f(psi, theta) on S^2 (ambient
  n = 3) on an offset latitude-longitude lattice.

Both grids place nodes at cell midpoints so no node sits on a pole, use
4th-order centered finite differences (reflection across the poles with a
parity sign, periodic wrap in longitude), and integrate with weights fitted
to the exact moments of the sin^{n-2} colatitude density.
"""

from __future__ import annotations

from math import ceil, exp, gamma, lgamma, log, pi

import numpy as np

__all__ = [
    "sphere_measure",
    "AxisymmetricGrid",
    "FullSphereGrid",
    "build_grid",
]


def sphere_measure(m: int) -> float:
    """Total measure of the unit sphere S^m, e.g. 4*pi for S^2."""
    if m < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {m}")
    return 2.0 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def _sin_power_moments(nu: int, nmodes: int) -> np.ndarray:
    """Moments m_k = int_0^pi cos(k psi) sin^nu(psi) dpsi for k < nmodes.

    Closed form: m_k = pi cos(k pi/2) Gamma(nu+1) /
    (2^nu Gamma(1+(nu+k)/2) Gamma(1+(nu-k)/2)), zero whenever the second
    Gamma argument is a nonpositive integer (k > nu with matching parity).
    Evaluated in log space: the individual Gamma factors overflow near
    k ~ 340 while the moments themselves stay O(1).
    """
    m = np.zeros(nmodes)
    cos_quarter = (1.0, 0.0, -1.0, 0.0)
    log_num = lgamma(nu + 1) - nu * log(2.0)
    for k in range(nmodes):
        c = cos_quarter[k % 4]
        if c == 0.0:
            continue
        b = 1 + (nu - k) / 2
        if b <= 0 and b == int(b):
            continue
        a = 1 + (nu + k) / 2
        # Gamma alternates sign between consecutive negative integers
        sign = -1.0 if b < 0 and ceil(-b) % 2 else 1.0
        m[k] = c * sign * pi * exp(log_num - lgamma(a) - lgamma(b))
    return m


def _colatitude_rule(nu: int, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and weights integrating f(psi) sin^nu(psi) on (0, pi).

    The weights are fitted so every trigonometric polynomial of degree
    < npts is integrated exactly against the sin^nu density (the midpoint
    cosine basis is orthogonal, so the fit is a closed form, not a solve).
    """
    psi = (np.arange(npts) + 0.5) * pi / npts
    m = _sin_power_moments(nu, npts)
    k = np.arange(1, npts)
    w = (m[0] + 2.0 * np.cos(k[:, None] * psi[None, :]).T @ m[1:]) / npts
    return psi, w


def _pad_pole_1d(f: np.ndarray, parity: float) -> np.ndarray:
    # ghost nodes by reflection: psi_{-1-i} mirrors psi_i, sign by parity
    return np.concatenate([parity * f[1::-1], f, parity * f[:-3:-1]])


def _d1_1d(f: np.ndarray, h: float, parity: float = 1.0) -> np.ndarray:
    g = _pad_pole_1d(f, parity)
    return (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * h)


def _d2_1d(f: np.ndarray, h: float, parity: float = 1.0) -> np.ndarray:
    g = _pad_pole_1d(f, parity)
    return (-g[4:] + 16.0 * g[3:-1] - 30.0 * g[2:-2] + 16.0 * g[1:-3] - g[:-4]) / (
        12.0 * h * h
    )


class AxisymmetricGrid:
    """Colatitude midpoint grid for axisymmetric fields on S^{n-1}."""

    mode = "axisym"

    def __init__(self, n: int, resolution: int):
        if n < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {n}")
        if resolution < 8:
            raise ValueError(f"resolution must be >= 8, got {resolution}")
        self.n = int(n)
        self.resolution = int(resolution)
        self.psi, w_psi = _colatitude_rule(n - 2, resolution)
        # fold the measure of the rotational S^{n-2} factor into the weights
        self.weights = sphere_measure(n - 2) * w_psi
        self.h = pi / resolution
        self.shape = (resolution,)
        self.cot_psi = 1.0 / np.tan(self.psi)
        self.sin_psi = np.sin(self.psi)

    @property
    def node_count(self) -> int:
        return self.resolution

    def check_field(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("field contains non-finite values")
        return f

    def deriv1(self, f: np.ndarray, parity: float = 1.0) -> np.ndarray:
        """d/dpsi with pole reflection; parity=-1 for psi-covector components."""
        return _d1_1d(f, self.h, parity)

    def deriv2(self, f: np.ndarray, parity: float = 1.0) -> np.ndarray:
        return _d2_1d(f, self.h, parity)

    def covariant_gradient(self, f: np.ndarray) -> np.ndarray:
        """The single nonzero covariant component f_psi (axisymmetry kills
        the angular components)."""
        return self.deriv1(self.check_field(f))

    def gradient_norm_sq(self, f: np.ndarray) -> np.ndarray:
        """|grad f|^2 with respect to the round metric."""
        fp = self.covariant_gradient(f)
        return fp * fp

    def covariant_hessian(self, f: np.ndarray) -> np.ndarray:
        """Rows [f_;psipsi, c] with the angular block f_;ab = c * shat_ab,
        where shat is the unit metric of the rotational S^{n-2} factor
        (Christoffel term Gamma^psi_ab = -sin psi cos psi shat_ab).
        """
        f = self.check_field(f)
        fp = self.deriv1(f)
        return np.stack([self.deriv2(f), self.sin_psi * np.cos(self.psi) * fp])

    def hessian_trace(self, hess: np.ndarray) -> np.ndarray:
        """Round-metric trace of a covariant_hessian result."""
        return hess[0] + (self.n - 2) * hess[1] / self.sin_psi**2

    def laplace_beltrami(self, f: np.ndarray) -> np.ndarray:
        return self.hessian_trace(self.covariant_hessian(f))

    def integrate(self, f: np.ndarray) -> float:
        return float(self.check_field(f) @ self.weights)


class FullSphereGrid:
    """Offset latitude-longitude grid on S^2 (ambient n = 3 only).

    Fields are arrays of shape (npsi, ntheta). Longitude is periodic;
    continuation across either pole maps (psi, theta) -> (-psi, theta+pi),
    implemented as a half-turn roll of the mirrored rows. Scalars continue
    with sign +1, psi-covector components with sign -1.
    """

    mode = "s2"

    def __init__(self, n: int, resolution):
        if n != 3:
            raise ValueError(f"the full 2-sphere grid requires ambient n = 3, got {n}")
        if isinstance(resolution, int):
            resolution = (resolution, 2 * resolution)
        npsi, ntheta = resolution
        if npsi < 8 or ntheta < 8:
            raise ValueError(f"resolution must be >= 8 per direction, got {resolution}")
        if ntheta % 2:
            raise ValueError("longitude count must be even for across-pole continuation")
        self.n = 3
        self.resolution = (int(npsi), int(ntheta))
        self.npsi, self.ntheta = self.resolution
        self.psi, w_psi = _colatitude_rule(1, npsi)
        self.theta = np.arange(ntheta) * 2.0 * pi / ntheta
        self.h_psi = pi / npsi
        self.h_theta = 2.0 * pi / ntheta
        # trapezoid in the periodic direction is exact for trig polynomials
        self.weights = np.broadcast_to(
            (w_psi * self.h_theta)[:, None], (npsi, ntheta)
        ).copy()
        self.shape = (npsi, ntheta)
        self.sin_psi = np.sin(self.psi)[:, None]
        self.cot_psi = (1.0 / np.tan(self.psi))[:, None]

    @property
    def node_count(self) -> int:
        return self.npsi * self.ntheta

    def check_field(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("field contains non-finite values")
        return f

    def _pad_pole(self, f: np.ndarray, parity: float) -> np.ndarray:
        half = self.ntheta // 2
        top = parity * np.roll(f[1::-1], half, axis=1)
        bot = parity * np.roll(f[:-3:-1], half, axis=1)
        return np.concatenate([top, f, bot], axis=0)

    def dpsi(self, f: np.ndarray, parity: float = 1.0) -> np.ndarray:
        g = self._pad_pole(f, parity)
        return (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * self.h_psi)

    def dpsi2(self, f: np.ndarray, parity: float = 1.0) -> np.ndarray:
        g = self._pad_pole(f, parity)
        return (-g[4:] + 16.0 * g[3:-1] - 30.0 * g[2:-2] + 16.0 * g[1:-3] - g[:-4]) / (
            12.0 * self.h_psi**2
        )

    def dtheta(self, f: np.ndarray) -> np.ndarray:
        up1, up2 = np.roll(f, -1, axis=1), np.roll(f, -2, axis=1)
        dn1, dn2 = np.roll(f, 1, axis=1), np.roll(f, 2, axis=1)
        return (-up2 + 8.0 * up1 - 8.0 * dn1 + dn2) / (12.0 * self.h_theta)

    def dtheta2(self, f: np.ndarray) -> np.ndarray:
        up1, up2 = np.roll(f, -1, axis=1), np.roll(f, -2, axis=1)
        dn1, dn2 = np.roll(f, 1, axis=1), np.roll(f, 2, axis=1)
        return (-up2 + 16.0 * up1 - 30.0 * f + 16.0 * dn1 - dn2) / (12.0 * self.h_theta**2)

    def covariant_gradient(self, f: np.ndarray) -> np.ndarray:
        """Covector components (f_psi, f_theta), shape (2, npsi, ntheta)."""
        f = self.check_field(f)
        return np.stack([self.dpsi(f), self.dtheta(f)])

    def gradient_norm_sq(self, f: np.ndarray) -> np.ndarray:
        fp, ft = self.covariant_gradient(f)
        return fp * fp + (ft / self.sin_psi) ** 2

    def covariant_hessian(self, f: np.ndarray) -> np.ndarray:
        """Symmetric matrix components, shape (2, 2, npsi, ntheta).

        Round-sphere Christoffels: Gamma^theta_{psi theta} = cot psi,
        Gamma^psi_{theta theta} = -sin psi cos psi.
        """
        f = self.check_field(f)
        ft = self.dtheta(f)
        h_pp = self.dpsi2(f)
        h_pt = self.dpsi(ft) - self.cot_psi * ft
        h_tt = self.dtheta2(f) + self.sin_psi * np.cos(self.psi)[:, None] * self.dpsi(f)
        return np.stack(
            [np.stack([h_pp, h_pt]), np.stack([h_pt, h_tt])]
        )

    def hessian_trace(self, hess: np.ndarray) -> np.ndarray:
        return hess[0, 0] + hess[1, 1] / self.sin_psi**2

    def laplace_beltrami(self, f: np.ndarray) -> np.ndarray:
        return self.hessian_trace(self.covariant_hessian(f))

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.check_field(f) * self.weights))


def build_grid(mode: str, n: int, resolution) -> AxisymmetricGrid | FullSphereGrid:
    """Grid factory. mode 'axisym' takes an int resolution; mode 's2' takes
    an int (longitude count doubles it) or an (npsi, ntheta) pair."""
    if mode == "axisym":
        return AxisymmetricGrid(n, resolution)
    if mode == "s2":
        return FullSphereGrid(n, resolution)
    raise ValueError(f"unknown grid mode {mode!r} (expected 'axisym' or 's2')")
