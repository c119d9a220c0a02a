"""Extrinsic geometry of radial graphs in hyperbolic space.

The ambient is the warped product metric dr^2 + sinh^2(r) g_round on
(0, inf) x S^{n-1}. A star-shaped hypersurface is the graph r = r(angles).
With lam = sinh r, lam' = cosh r, phi the radial primitive with
grad phi = grad r / lam, and v = sqrt(1 + |grad phi|^2), the induced metric
and second fundamental form (outward normal) are

    g_ij = lam^2 (sigma_ij + phi_i phi_j)
    h_ij = (lam'/(v lam)) g_ij - (lam/v) phi_;ij

where sigma is the round metric and phi_;ij its covariant Hessian. The
Hessian of phi is assembled from r directly,
phi_;ij = r_;ij/lam - (lam'/lam^2) r_i r_j, so the primitive itself is
never materialized. Everything downstream (principal curvatures,
normalized curvature polynomials p_k, area density) lives here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .sphere_discretization import AxisymmetricGrid, FullSphereGrid

__all__ = [
    "MetricError",
    "RadialGraph",
    "GeometryFields",
    "compute_geometry",
    "surface_integral",
    "surface_laplacian",
    "normalized_symmetric_polynomials",
]


class MetricError(RuntimeError):
    """Induced metric not positive definite (invalid or under-resolved graph)."""


@dataclass(frozen=True)
class RadialGraph:
    """Radial function over a sphere grid; the hypersurface itself."""

    grid: AxisymmetricGrid | FullSphereGrid
    r: np.ndarray

    def __post_init__(self):
        r = self.grid.check_field(self.r)
        if np.any(r <= 0.0):
            raise ValueError("radial function must be strictly positive")
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass(frozen=True)
class GeometryFields:
    """Per-node geometric data of a radial graph.

    Metric and second fundamental form are stored mode-shaped: in axisym
    mode ``g``/``h`` have rows [psi-psi component, angular coefficient]
    where the angular block is coeff * shat_ab (unit S^{n-2} metric); in s2
    mode they are (2, 2, npsi, ntheta) matrices. ``kappa`` always carries
    all n-1 principal curvatures (axisym repeats the angular one n-2
    times), ``p`` rows are p_0 .. p_{n-1}.
    """

    graph: RadialGraph
    lam: np.ndarray
    lam_prime: np.ndarray
    grad_phi: np.ndarray
    grad_phi_sq: np.ndarray
    v: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    h: np.ndarray
    kappa: np.ndarray
    p: np.ndarray
    a_sq: np.ndarray
    area_density: np.ndarray

    @property
    def grid(self):
        return self.graph.grid

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def p1(self) -> np.ndarray:
        return self.p[1]

    @property
    def area(self) -> float:
        return self.grid.integrate(self.area_density)


def normalized_symmetric_polynomials(kappa: np.ndarray) -> np.ndarray:
    """p_k = e_k(kappa) / binom(m, k) for k = 0..m, kappa of shape (m, ...).

    Elementary symmetric polynomials by the usual one-row-at-a-time
    recurrence, so no combinatorial enumeration.
    """
    m = kappa.shape[0]
    e = np.zeros((m + 1,) + kappa.shape[1:])
    e[0] = 1.0
    for row in kappa:
        for k in range(m, 0, -1):
            e[k] += row * e[k - 1]
    binoms = np.array([comb(m, k) for k in range(m + 1)])
    return e / binoms.reshape((m + 1,) + (1,) * (e.ndim - 1))


def _geometry_axisym(graph: RadialGraph) -> GeometryFields:
    grid, r, n = graph.grid, graph.r, graph.n
    lam = np.sinh(r)
    lam_p = np.cosh(r)
    r1 = grid.deriv1(r)
    r2 = grid.deriv2(r)
    phi_p = r1 / lam
    grad_sq = phi_p * phi_p
    v = np.sqrt(1.0 + grad_sq)
    # covariant Hessian of the radial primitive, assembled from r
    phi_pp = r2 / lam - lam_p / lam**2 * r1 * r1
    phi_ang = grid.sin_psi * np.cos(grid.psi) * phi_p

    g_pp = lam**2 * v**2
    g_ang = lam**2 * grid.sin_psi**2
    shape_factor = lam_p / (v * lam)
    h_pp = shape_factor * g_pp - (lam / v) * phi_pp
    h_ang = shape_factor * g_ang - (lam / v) * phi_ang

    _require_spd(np.stack([g_pp, g_ang]), axis_names="axisym blocks")
    kap_r = h_pp / g_pp
    kap_a = h_ang / g_ang
    kappa = np.empty((n - 1,) + r.shape)
    kappa[0] = kap_r
    kappa[1:] = kap_a
    p = normalized_symmetric_polynomials(kappa)
    a_sq = kap_r**2 + (n - 2) * kap_a**2

    return GeometryFields(
        graph=graph,
        lam=lam,
        lam_prime=lam_p,
        grad_phi=phi_p,
        grad_phi_sq=grad_sq,
        v=v,
        g=np.stack([g_pp, g_ang]),
        g_inv=np.stack([1.0 / g_pp, 1.0 / g_ang]),
        h=np.stack([h_pp, h_ang]),
        kappa=kappa,
        p=p,
        a_sq=a_sq,
        area_density=lam ** (n - 1) * v,
    )


def _geometry_s2(graph: RadialGraph) -> GeometryFields:
    grid, r = graph.grid, graph.r
    lam = np.sinh(r)
    lam_p = np.cosh(r)
    sin2 = grid.sin_psi**2

    r_grad = grid.covariant_gradient(r)
    r_hess = grid.covariant_hessian(r)
    phi = r_grad / lam
    phi_hess = r_hess / lam - (lam_p / lam**2) * r_grad[:, None] * r_grad[None, :]
    grad_sq = phi[0] ** 2 + phi[1] ** 2 / sin2
    v = np.sqrt(1.0 + grad_sq)

    sigma = np.zeros_like(phi_hess)
    sigma[0, 0] = 1.0
    sigma[1, 1] = sin2
    g = lam**2 * (sigma + phi[:, None] * phi[None, :])
    h = (lam_p / (v * lam)) * g - (lam / v) * phi_hess

    a, b, c = g[0, 0], g[0, 1], g[1, 1]
    bad = ~((a > 0.0) & (a * c - b * b > 0.0) & np.isfinite(a * c))
    if np.any(bad):
        raise MetricError(
            f"induced metric not positive definite at {int(np.sum(bad))} node(s)"
        )
    det = a * c - b * b
    g_inv = np.empty_like(g)
    g_inv[0, 0] = c / det
    g_inv[0, 1] = g_inv[1, 0] = -b / det
    g_inv[1, 1] = a / det

    # shape operator spectrum via the g-orthonormal frame: with g = L L^T
    # (Cholesky), B = L^-1 h L^-T is symmetric and similar to g^-1 h
    l11 = np.sqrt(a)
    l21 = b / l11
    l22 = np.sqrt(c - l21 * l21)
    m11 = h[0, 0] / l11
    m12 = h[0, 1] / l11
    m21 = (h[0, 1] - l21 * h[0, 0] / l11) / l22
    m22 = (h[1, 1] - l21 * h[0, 1] / l11) / l22
    b11 = m11 / l11
    b22 = (m22 - m21 * l21 / l11) / l22
    b12 = 0.5 * ((m12 - m11 * l21 / l11) / l22 + m21 / l11)
    mean = 0.5 * (b11 + b22)
    radius = np.sqrt(0.25 * (b11 - b22) ** 2 + b12 * b12)
    kappa = np.stack([mean - radius, mean + radius])
    p = normalized_symmetric_polynomials(kappa)

    return GeometryFields(
        graph=graph,
        lam=lam,
        lam_prime=lam_p,
        grad_phi=phi,
        grad_phi_sq=grad_sq,
        v=v,
        g=g,
        g_inv=g_inv,
        h=h,
        kappa=kappa,
        p=p,
        a_sq=kappa[0] ** 2 + kappa[1] ** 2,
        area_density=lam**2 * v,
    )


def _require_spd(blocks: np.ndarray, axis_names: str) -> None:
    if np.any(blocks <= 0.0) or not np.all(np.isfinite(blocks)):
        raise MetricError(
            f"induced metric not positive definite "
            f"({axis_names}: {int(np.sum(~(blocks > 0)))} bad entries)"
        )


def compute_geometry(graph: RadialGraph) -> GeometryFields:
    """All extrinsic fields of the graph; raises MetricError on degenerate input."""
    if graph.grid.mode == "axisym":
        return _geometry_axisym(graph)
    return _geometry_s2(graph)


def surface_integral(fields: GeometryFields, f: np.ndarray | float) -> float:
    """Integral of f over the hypersurface against the exact area element."""
    return fields.grid.integrate(np.broadcast_to(f, fields.area_density.shape) * fields.area_density)


def surface_laplacian(fields: GeometryFields, f: np.ndarray) -> np.ndarray:
    """Laplace-Beltrami operator of the induced metric applied to f.

    Divergence form (1/sqrt det g) d_i(sqrt det g g^ij d_j f), with the
    sin^{n-2} psi factor of the round measure differentiated analytically:
    dividing a numerical flux derivative by sin^{n-2} psi near the poles
    costs accuracy there, the cot psi source term does not.
    """
    grid = fields.grid
    n = fields.n
    if grid.mode == "axisym":
        f = grid.check_field(f)
        fp = grid.deriv1(f)
        g_pp_inv = fields.g_inv[0]
        w_reg = fields.lam ** (n - 1) * fields.v
        flux = w_reg * g_pp_inv * fp
        return grid.deriv1(flux, parity=-1.0) / w_reg + (
            (n - 2) * grid.cot_psi * g_pp_inv * fp
        )
    f = grid.check_field(f)
    fp = grid.dpsi(f)
    ft = grid.dtheta(f)
    w_reg = fields.lam**2 * fields.v
    flux_p = w_reg * (fields.g_inv[0, 0] * fp + fields.g_inv[0, 1] * ft)
    flux_t = w_reg * (fields.g_inv[1, 0] * fp + fields.g_inv[1, 1] * ft)
    div = (
        grid.dpsi(flux_p, parity=-1.0)
        + grid.cot_psi * flux_p
        + grid.dtheta(flux_t)
    )
    return div / w_reg
