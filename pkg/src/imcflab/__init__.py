"""Numerical laboratory for inverse mean curvature flow in hyperbolic space.

Star-shaped mean-convex hypersurfaces are represented as radial graphs over
the unit sphere, evolved with speed equal to the reciprocal of the mean
curvature, and monitored through the curvature functionals whose
monotonicity yields Willmore-type inequalities.
"""

from ._kernels import BACKEND as kernel_backend
from .functionals import (
    AsymptoticResiduals,
    BecknerDimensionError,
    InequalityReport,
    af2_deficit,
    asymptotic_residuals,
    beckner_gap,
    beckner_w_form,
    fit_exponential_rate,
    hawking_mass,
    quantity_Q,
    willmore_deficit,
)
from .hyperbolic_geometry import (
    GeometryFields,
    MetricError,
    RadialGraph,
    compute_geometry,
    normalized_symmetric_polynomials,
    surface_integral,
    surface_laplacian,
)
from .imcf_flow import (
    FlowConfig,
    FlowGuardError,
    FlowRun,
    FlowState,
    MeanConvexityError,
    StepDiagnostics,
    cfl_limit,
    curvature_rate,
    evolution_residual,
    run,
    sphere_radius_exact,
    sphere_radius_ode,
    step,
)
from .shapes import (
    ShapeReport,
    ShapeSpec,
    make_shape,
    random_positive_field,
    standard_corpus,
    validate_shape,
)
from .sphere_discretization import AxisymmetricGrid, FullSphereGrid, build_grid, sphere_measure

__version__ = "0.1.0"

__all__ = [
    "AsymptoticResiduals",
    "AxisymmetricGrid",
    "BecknerDimensionError",
    "FlowConfig",
    "FlowGuardError",
    "FlowRun",
    "FlowState",
    "FullSphereGrid",
    "GeometryFields",
    "InequalityReport",
    "MeanConvexityError",
    "MetricError",
    "RadialGraph",
    "ShapeReport",
    "ShapeSpec",
    "StepDiagnostics",
    "af2_deficit",
    "asymptotic_residuals",
    "beckner_gap",
    "beckner_w_form",
    "build_grid",
    "cfl_limit",
    "compute_geometry",
    "curvature_rate",
    "evolution_residual",
    "fit_exponential_rate",
    "hawking_mass",
    "kernel_backend",
    "make_shape",
    "normalized_symmetric_polynomials",
    "quantity_Q",
    "random_positive_field",
    "run",
    "sphere_measure",
    "sphere_radius_exact",
    "sphere_radius_ode",
    "standard_corpus",
    "step",
    "surface_integral",
    "surface_laplacian",
    "validate_shape",
    "willmore_deficit",
]
