"""Initial surfaces: geodesic spheres, harmonic perturbations, random stars.

A ShapeSpec is a small serializable description; make_shape realizes it on
a concrete grid. Perturbations are Legendre polynomials in the colatitude
(so an axisymmetric spec realizes the same surface in both grid modes) plus
optional nonzonal spherical harmonics on the 2-sphere grid. Random shapes
are rejection-sampled to be mean-convex at the target grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, pi, sqrt

import numpy as np
from scipy.special import lpmv

from .hyperbolic_geometry import MetricError, RadialGraph, compute_geometry

__all__ = [
    "ShapeSpec",
    "ShapeReport",
    "make_shape",
    "validate_shape",
    "standard_corpus",
    "random_positive_field",
    "zonal_harmonic",
]

KINDS = ("sphere", "perturbed_sphere", "random")


def zonal_harmonic(degree: int, psi: np.ndarray) -> np.ndarray:
    """Legendre polynomial P_degree(cos psi), the axisymmetric harmonic."""
    coeffs = np.zeros(degree + 1)
    coeffs[degree] = 1.0
    return np.polynomial.legendre.legval(np.cos(psi), coeffs)


def _real_harmonic(degree: int, order: int, psi: np.ndarray, theta: np.ndarray):
    """Real spherical harmonic on S^2; order 0 stays the plain Legendre
    polynomial so axisymmetric specs mean the same surface in both modes."""
    if order == 0:
        return zonal_harmonic(degree, psi)[:, None] * np.ones((1, theta.size))
    norm = sqrt(
        (2 * degree + 1) / (4 * pi) * factorial(degree - order) / factorial(degree + order)
    ) * sqrt(2.0)
    return norm * lpmv(order, degree, np.cos(psi))[:, None] * np.cos(order * theta)[None, :]


@dataclass(frozen=True)
class ShapeSpec:
    """Description of an initial surface.

    degrees entries are ints (zonal) or (degree, order) pairs (2-sphere
    grids only). For kind 'random' the harmonic content is drawn from the
    seed and eps sets the coefficient scale.
    """

    kind: str
    r0: float
    eps: float = 0.0
    degrees: tuple = ()
    seed: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.r0 <= 0.0:
            raise ValueError("base radius must be positive")
        if self.eps < 0.0:
            raise ValueError("perturbation amplitude must be nonnegative")
        if self.eps >= self.r0:
            raise ValueError(
                f"amplitude {self.eps} >= base radius {self.r0} cannot stay star-shaped"
            )
        object.__setattr__(
            self,
            "degrees",
            tuple(tuple(d) if isinstance(d, (list, tuple)) else int(d) for d in self.degrees),
        )
        if self.kind == "random" and self.seed is None:
            raise ValueError("random shapes need a seed")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "r0": self.r0,
            "eps": self.eps,
            "degrees": [list(d) if isinstance(d, tuple) else d for d in self.degrees],
            "seed": self.seed,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShapeSpec":
        known = {k: data[k] for k in ("kind", "r0", "eps", "degrees", "seed", "label") if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown shape keys: {sorted(unknown)}")
        return cls(**known)


def _perturbation(spec: ShapeSpec, grid) -> np.ndarray:
    total = np.zeros(grid.shape)
    for entry in spec.degrees:
        if isinstance(entry, tuple):
            degree, order = entry
            if grid.mode != "s2":
                if order != 0:
                    raise ValueError("nonzonal harmonics need the 2-sphere grid")
                total += zonal_harmonic(degree, grid.psi)
            else:
                total += _real_harmonic(degree, order, grid.psi, grid.theta)
        elif grid.mode == "s2":
            total += _real_harmonic(entry, 0, grid.psi, grid.theta)
        else:
            total += zonal_harmonic(entry, grid.psi)
    return spec.eps * total


def _random_radial(spec: ShapeSpec, grid, rng: np.random.Generator) -> np.ndarray:
    # decaying spectrum keeps the surface resolvable; degree <= 6
    r = np.full(grid.shape, spec.r0)
    for degree in range(1, 7):
        c = rng.uniform(-1.0, 1.0) * spec.eps / degree**2
        if grid.mode == "s2":
            r += c * _real_harmonic(degree, 0, grid.psi, grid.theta)
            order = int(rng.integers(1, degree + 1))
            c2 = rng.uniform(-1.0, 1.0) * spec.eps / degree**2
            r += c2 * _real_harmonic(degree, order, grid.psi, grid.theta)
        else:
            r += c * zonal_harmonic(degree, grid.psi)
    return r


def make_shape(spec: ShapeSpec, grid) -> RadialGraph:
    """Realize the shape description on the grid; deterministic in the seed."""
    if spec.kind == "sphere":
        return RadialGraph(grid, np.full(grid.shape, spec.r0))
    if spec.kind == "perturbed_sphere":
        return RadialGraph(grid, spec.r0 + _perturbation(spec, grid))
    rng = np.random.default_rng(spec.seed)
    for _ in range(100):
        graph = RadialGraph(grid, _random_radial(spec, grid, rng))
        report = validate_shape(graph)
        if report.mean_convex:
            return graph
    raise ValueError(f"no mean-convex draw in 100 attempts for seed {spec.seed}")


@dataclass(frozen=True)
class ShapeReport:
    star_shaped_graph: bool
    mean_convex: bool
    two_convex: bool
    min_p1: float
    min_p2: float

    def as_dict(self) -> dict:
        return {
            "star_shaped_graph": self.star_shaped_graph,
            "mean_convex": self.mean_convex,
            "two_convex": self.two_convex,
            "min_p1": self.min_p1,
            "min_p2": self.min_p2,
        }


def validate_shape(graph: RadialGraph) -> ShapeReport:
    """Admission gate for flow runs and inequality suites; reports, never
    raises (a degenerate metric shows up as star_shaped_graph = False)."""
    try:
        fields = compute_geometry(graph)
    except MetricError:
        return ShapeReport(False, False, False, float("nan"), float("nan"))
    min_p1 = float(fields.p1.min())
    min_p2 = float(fields.p[2].min())
    return ShapeReport(
        star_shaped_graph=True,
        mean_convex=min_p1 > 0.0,
        two_convex=min_p1 > 0.0 and min_p2 > 0.0,
        min_p1=min_p1,
        min_p2=min_p2,
    )


def random_positive_field(grid, seed: int, degree: int = 6, amplitude: float = 0.6):
    """Random positive trigonometric-polynomial field on the sphere, for
    exercising the Sobolev inequality away from the constant equality case.
    The coefficient budget keeps min f >= 1 - amplitude > 0."""
    if not 0.0 < amplitude < 1.0:
        raise ValueError("amplitude must sit in (0, 1) to guarantee positivity")
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, degree)
    total = np.sum(np.abs(coeffs))
    if total > 0.0:
        coeffs *= amplitude / total
    f = np.ones(grid.shape)
    for l, c in enumerate(coeffs, start=1):
        if grid.mode == "s2":
            f += c * _real_harmonic(l, 0, grid.psi, grid.theta)
        else:
            f += c * zonal_harmonic(l, grid.psi)
    return f


def standard_corpus(n: int) -> list[ShapeSpec]:
    """20 deterministic admission-worthy shapes per ambient dimension:
    3 geodesic spheres, 7 fixed harmonic perturbations, 10 seeded randoms."""
    fixed = [
        ShapeSpec("sphere", r0=0.5, label="sphere-0.5"),
        ShapeSpec("sphere", r0=1.0, label="sphere-1.0"),
        ShapeSpec("sphere", r0=2.0, label="sphere-2.0"),
        ShapeSpec("perturbed_sphere", r0=1.0, eps=0.02, degrees=(2,), label="p2-0.02"),
        ShapeSpec("perturbed_sphere", r0=1.0, eps=0.05, degrees=(2,), label="p2-0.05"),
        ShapeSpec("perturbed_sphere", r0=1.0, eps=0.05, degrees=(3,), label="p3-0.05"),
        ShapeSpec("perturbed_sphere", r0=1.0, eps=0.10, degrees=(2,), label="p2-0.10"),
        ShapeSpec("perturbed_sphere", r0=1.5, eps=0.05, degrees=(4,), label="p4-0.05"),
        ShapeSpec("perturbed_sphere", r0=1.0, eps=0.04, degrees=(2, 3), label="p23-0.04"),
        ShapeSpec("perturbed_sphere", r0=2.0, eps=0.10, degrees=(2,), label="p2-r2-0.10"),
    ]
    randoms = [
        ShapeSpec("random", r0=1.0, eps=0.08, seed=1000 + 10 * n + i, label=f"rand-{i}")
        for i in range(10)
    ]
    return fixed + randoms
