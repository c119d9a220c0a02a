"""Integral functionals and sharp inequalities for the evolving surfaces.

Everything here is a pure evaluator over GeometryFields or sphere fields:
the monotone quantity Q, the area-normalized curvature inequality and its
second-order variant, the sharp Sobolev inequality on the round sphere in
both gradient forms, the quasi-local mass in three dimensions, and the
large-time expansion residuals used to classify decay rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hyperbolic_geometry import GeometryFields, surface_integral
from .sphere_discretization import sphere_measure

__all__ = [
    "InequalityReport",
    "BecknerDimensionError",
    "quantity_Q",
    "willmore_deficit",
    "beckner_gap",
    "beckner_w_form",
    "af2_deficit",
    "hawking_mass",
    "AsymptoticResiduals",
    "asymptotic_residuals",
    "fit_exponential_rate",
]


class BecknerDimensionError(ValueError):
    """The sphere Sobolev inequality degenerates for ambient n = 3."""


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    deficit: float
    relative_deficit: float
    equality: bool
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_sides(cls, lhs: float, rhs: float, tol: float = 1e-8, extras=None):
        deficit = lhs - rhs
        rel = deficit / abs(rhs) if rhs != 0.0 else deficit
        return cls(
            lhs=lhs,
            rhs=rhs,
            deficit=deficit,
            relative_deficit=rel,
            equality=abs(deficit) < tol * abs(rhs),
            extras=extras or {},
        )

    def as_dict(self) -> dict:
        out = {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "relative_deficit": self.relative_deficit,
            "equality": self.equality,
        }
        out.update(self.extras)
        return out


def quantity_Q(fields: GeometryFields) -> float:
    """|Sigma|^{-(n-3)/(n-1)} * integral of (p_1^2 - 1); constant exactly on
    geodesic spheres and non-increasing along the flow."""
    n = fields.n
    area = fields.area
    integral = surface_integral(fields, fields.p1**2 - 1.0)
    return area ** (-(n - 3) / (n - 1)) * integral


def willmore_deficit(fields: GeometryFields, tol: float = 1e-8) -> InequalityReport:
    """integral p_1^2 dmu  vs  omega^{2/(n-1)} |Sigma|^{(n-3)/(n-1)} + |Sigma|.

    Zero exactly on geodesic spheres; positive otherwise for star-shaped
    mean-convex surfaces. At n = 3 the right side reduces to
    omega_2 + |Sigma| and the deficit is -2 sqrt(omega_2 |Sigma|) times the
    quasi-local mass.
    """
    n = fields.n
    area = fields.area
    lhs = surface_integral(fields, fields.p1**2)
    omega = sphere_measure(n - 1)
    rhs = omega ** (2.0 / (n - 1)) * area ** ((n - 3.0) / (n - 1)) + area
    return InequalityReport.from_sides(lhs, rhs, tol)


def _check_beckner_args(f: np.ndarray, grid, name: str) -> np.ndarray:
    if grid.n == 3:
        raise BecknerDimensionError(
            "ambient n = 3 rejected: the w-form carries a 1/(n-3) factor and "
            "the f-form collapses to the vacuous identity omega_2 >= omega_2"
        )
    f = grid.check_field(f)
    if np.any(f <= 0.0):
        raise ValueError(f"{name} must be strictly positive")
    return f


def beckner_gap(f: np.ndarray, grid, tol: float = 1e-8) -> InequalityReport:
    """Sharp sphere Sobolev inequality, power form: for positive f on
    S^{n-1}, n >= 4,

        int f^{n-3} + (n-3)/(n-1) int f^{n-5} |grad f|^2
            >= omega^{2/(n-1)} (int f^{n-1})^{(n-3)/(n-1)}

    with equality iff f is constant.
    """
    f = _check_beckner_args(f, grid, "f")
    n = grid.n
    grad_sq = grid.gradient_norm_sq(f)
    lhs = grid.integrate(f ** (n - 3)) + (n - 3.0) / (n - 1.0) * grid.integrate(
        f ** (n - 5) * grad_sq
    )
    omega = sphere_measure(n - 1)
    rhs = omega ** (2.0 / (n - 1)) * grid.integrate(f ** (n - 1)) ** ((n - 3.0) / (n - 1))
    return InequalityReport.from_sides(lhs, rhs, tol)


def beckner_w_form(w: np.ndarray, grid, tol: float = 1e-8) -> InequalityReport:
    """Same inequality in the gradient-quadratic form:

        4/((n-1)(n-3)) int |grad w|^2 + int w^2
            >= omega^{2/(n-1)} (int w^{2(n-1)/(n-3)})^{(n-3)/(n-1)}.

    Substituting w = f^{(n-3)/2} recovers beckner_gap(f) term by term.
    """
    w = _check_beckner_args(w, grid, "w")
    n = grid.n
    grad_sq = grid.gradient_norm_sq(w)
    lhs = 4.0 / ((n - 1.0) * (n - 3.0)) * grid.integrate(grad_sq) + grid.integrate(w**2)
    omega = sphere_measure(n - 1)
    rhs = omega ** (2.0 / (n - 1)) * grid.integrate(
        w ** (2.0 * (n - 1) / (n - 3))
    ) ** ((n - 3.0) / (n - 1))
    return InequalityReport.from_sides(lhs, rhs, tol)


def af2_deficit(fields: GeometryFields, tol: float = 1e-8) -> InequalityReport:
    """Second-order variant: integral of p_2 against the same right side as
    willmore_deficit. Meaningful for 2-convex data; a violated convexity
    assumption flags the report instead of raising. The extras carry
    int p_1^2 - int p_2 >= 0, the pointwise Newton-MacLaurin link between
    the two inequalities.
    """
    n = fields.n
    area = fields.area
    p2 = fields.p[2]
    lhs = surface_integral(fields, p2)
    omega = sphere_measure(n - 1)
    rhs = omega ** (2.0 / (n - 1)) * area ** ((n - 3.0) / (n - 1)) + area
    min_p1 = float(fields.p1.min())
    min_p2 = float(p2.min())
    extras = {
        "two_convex": bool(min_p1 > 0.0 and min_p2 > 0.0),
        "min_p1": min_p1,
        "min_p2": min_p2,
        "mean_sq_minus_p2_integral": surface_integral(fields, fields.p1**2 - p2),
    }
    return InequalityReport.from_sides(lhs, rhs, tol, extras)


def hawking_mass(fields: GeometryFields) -> float:
    """Quasi-local mass of a closed surface in hyperbolic 3-space:

        sqrt(|Sigma|) / (2 sqrt(omega_2)) * [1 - (1/omega_2) int (p_1^2 - 1)]

    Nonpositive on star-shaped mean-convex surfaces, zero exactly on
    geodesic spheres.
    """
    if fields.n != 3:
        raise ValueError(f"the quasi-local mass is defined for n = 3, got n = {fields.n}")
    omega = sphere_measure(2)
    area = fields.area
    integral = surface_integral(fields, fields.p1**2 - 1.0)
    return float(np.sqrt(area / omega) / 2.0 * (1.0 - integral / omega))


@dataclass(frozen=True)
class AsymptoticResiduals:
    """Deviation of the current state from the leading large-time expansion.

    r21: max |lam' - lam (1 + lam^{-2}/2)| / lam, the cosh-vs-sinh Taylor
         remainder (relative order e^{-4t/(n-1)} along the flow).
    r22: max |1/v - 1 + |grad phi|^2 / 2| (same order).
    r23: | int (p_1^2 - 1) dmu - int (lam^{n-3} + (n-3)/(n-1) lam^{n-5}
         |grad lam|^2) dvol_round |, order e^{(n-5)t/(n-1)}: decaying for
         n < 5, bounded at n = 5, growing but slower than the integral
         itself for n >= 6.
    """

    r21: float
    r22: float
    r23: float

    def as_dict(self) -> dict:
        return {"r21": self.r21, "r22": self.r22, "r23": self.r23}


def asymptotic_residuals(state) -> AsymptoticResiduals:
    fields = state.fields
    grid = fields.grid
    n = fields.n
    lam = fields.lam
    r21 = np.abs(fields.lam_prime - lam * (1.0 + 0.5 * lam**-2)) / lam
    r22 = np.abs(1.0 / fields.v - 1.0 + 0.5 * fields.grad_phi_sq)
    curvature_integral = surface_integral(fields, fields.p1**2 - 1.0)
    grad_lam_sq = grid.gradient_norm_sq(lam)
    limit_form = grid.integrate(
        lam ** (n - 3) + (n - 3.0) / (n - 1.0) * lam ** (n - 5) * grad_lam_sq
    )
    return AsymptoticResiduals(
        r21=float(r21.max()),
        r22=float(r22.max()),
        r23=abs(curvature_integral - limit_form),
    )


def fit_exponential_rate(
    t: np.ndarray,
    y: np.ndarray,
    t_min: float | None = None,
    t_max: float | None = None,
) -> float:
    """Least-squares slope of log y against t over [t_min, t_max].

    Defaults to the second half of the samples; the window matters because
    the prefactors of the decaying terms are not universal, only the rates.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t_min is None:
        t_min = t[0] + 0.5 * (t[-1] - t[0])
    if t_max is None:
        t_max = t[-1]
    sel = (t >= t_min) & (t <= t_max)
    if np.count_nonzero(sel) < 2:
        raise ValueError("fit window contains fewer than two samples")
    if np.any(y[sel] <= 0.0):
        raise ValueError("fit requires strictly positive values in the window")
    return float(np.polyfit(t[sel], np.log(y[sel]), 1)[0])
