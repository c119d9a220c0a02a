"""Integral inequalities and scale-invariant quantities, pinned against
adaptive-quadrature references computed from exact symbolic derivatives."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from imcflab.functionals import (
    BecknerDimensionError,
    af2_deficit,
    asymptotic_residuals,
    beckner_gap,
    beckner_w_form,
    fit_exponential_rate,
    hawking_mass,
    quantity_Q,
    willmore_deficit,
)
from imcflab.hyperbolic_geometry import compute_geometry
from imcflab.imcf_flow import FlowState
from imcflab.shapes import ShapeSpec, make_shape, random_positive_field
from imcflab.sphere_discretization import build_grid, sphere_measure


def _fields(n, resolution, r0=1.0, eps=0.0, degrees=(), mode="axisym"):
    grid = build_grid(mode, n, resolution)
    spec = ShapeSpec("sphere" if eps == 0.0 else "perturbed_sphere", r0, eps, degrees)
    return compute_geometry(make_shape(spec, grid))


# ---------------------------------------------------------------------------
# the scale-invariant monotone quantity


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("r0", [0.3, 0.9, 1.7, 2.5])
def test_q_is_radius_independent_on_spheres(n, r0):
    fields = _fields(n, 96, r0=r0)
    omega = sphere_measure(n - 1)
    assert abs(quantity_Q(fields) - omega ** (2.0 / (n - 1))) < 1e-8


def test_q_above_sphere_value_for_perturbed_data():
    for n in (3, 4):
        fields = _fields(n, 128, eps=0.1, degrees=(2,))
        omega = sphere_measure(n - 1)
        assert quantity_Q(fields) > omega ** (2.0 / (n - 1))


# ---------------------------------------------------------------------------
# Willmore-type inequality


def test_willmore_equality_on_spheres():
    for n in (3, 4, 6):
        report = willmore_deficit(_fields(n, 96, r0=1.4))
        assert report.equality
        assert abs(report.relative_deficit) < 1e-12


def test_willmore_deficit_matches_quadrature_reference_n3():
    # frozen from oracles.AxisymReference(3, 1 + 0.1 P_2(cos psi))
    report = willmore_deficit(_fields(3, 256, eps=0.1, degrees=(2,)))
    assert_allclose(report.lhs, 30.19889385938508, rtol=1e-8)
    assert_allclose(report.rhs, 30.09336265585502, rtol=1e-8)
    assert_allclose(report.deficit, 0.10553120353005951, atol=5e-7)
    assert not report.equality


def test_willmore_deficit_matches_quadrature_reference_n4():
    report = willmore_deficit(_fields(4, 256, eps=0.1, degrees=(2,)))
    assert_allclose(report.deficit, 0.19724135973692825, atol=5e-7)


def test_willmore_holds_on_random_mean_convex_shapes():
    grid = build_grid("axisym", 3, 96)
    for seed in range(8):
        spec = ShapeSpec("random", 1.0, 0.08, seed=seed)
        report = willmore_deficit(compute_geometry(make_shape(spec, grid)))
        assert report.deficit > -1e-10


# ---------------------------------------------------------------------------
# sphere Sobolev inequality (both forms)


def test_beckner_rejects_ambient_dimension_three():
    grid = build_grid("axisym", 3, 32)
    f = np.ones(32)
    with pytest.raises(BecknerDimensionError):
        beckner_gap(f, grid)
    with pytest.raises(BecknerDimensionError):
        beckner_w_form(f, grid)


def test_beckner_rejects_nonpositive_fields():
    grid = build_grid("axisym", 5, 32)
    with pytest.raises(ValueError):
        beckner_gap(np.zeros(32), grid)
    f = np.ones(32)
    f[3] = -0.5
    with pytest.raises(ValueError):
        beckner_w_form(f, grid)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_beckner_equality_for_constants(n):
    grid = build_grid("axisym", n, 64)
    c = np.full(64, 1.37)
    assert beckner_gap(c, grid).equality
    assert beckner_w_form(c, grid).equality


def test_beckner_matches_quadrature_reference():
    # frozen from oracles.reference_beckner_sides with f = 1 + cos(psi)/10
    grid = build_grid("axisym", 5, 256)
    report = beckner_gap(1.0 + 0.1 * np.cos(grid.psi), grid)
    assert_allclose(report.lhs, 26.476858739989048, rtol=1e-9)
    assert_allclose(report.rhs, 26.476499944782258, rtol=1e-9)
    assert report.deficit > 0.0


def test_beckner_w_form_matches_quadrature_reference():
    grid = build_grid("axisym", 6, 256)
    report = beckner_w_form(1.0 + 0.2 * np.cos(grid.psi), grid)
    assert_allclose(report.lhs, 31.48859653977115, rtol=1e-9)
    assert_allclose(report.rhs, 31.486390840072993, rtol=1e-9)


@pytest.mark.parametrize("n", [4, 6])
def test_beckner_forms_agree_under_substitution(n):
    """w = f^{(n-3)/2} maps one form onto the other term by term."""
    grid = build_grid("axisym", n, 512)
    f = random_positive_field(grid, seed=3)
    power = beckner_gap(f, grid)
    quadratic = beckner_w_form(f ** (0.5 * (n - 3)), grid)
    assert_allclose(power.lhs, quadratic.lhs, rtol=1e-8)
    assert_allclose(power.rhs, quadratic.rhs, rtol=1e-8)


def test_beckner_substitution_is_algebraic_identity_at_n5():
    # the exponent (n-3)/2 equals one: both forms see the same field, and
    # the two code paths must agree to roundoff
    grid = build_grid("axisym", 5, 64)
    f = random_positive_field(grid, seed=11)
    power = beckner_gap(f, grid)
    quadratic = beckner_w_form(f, grid)
    assert_allclose(power.lhs, quadratic.lhs, rtol=1e-14)
    assert_allclose(power.rhs, quadratic.rhs, rtol=1e-14)


def test_beckner_gap_nonnegative_on_random_fields():
    for n in (4, 5, 6):
        grid = build_grid("axisym", n, 128)
        for seed in range(6):
            f = random_positive_field(grid, seed=seed)
            assert beckner_gap(f, grid).deficit > -1e-10


# ---------------------------------------------------------------------------
# second-order variant


def test_af2_equality_on_spheres():
    for n in (4, 5):
        report = af2_deficit(_fields(n, 96, r0=1.2))
        assert report.equality
        assert report.extras["two_convex"]


def test_af2_matches_quadrature_reference():
    # frozen from oracles.AxisymReference(4, 1 + 0.1 P_2(cos psi)).af2_sides
    report = af2_deficit(_fields(4, 256, eps=0.1, degrees=(2,)))
    assert_allclose(report.lhs, 53.95067130382943, rtol=1e-8)
    assert_allclose(report.deficit, 0.09850201808375658, atol=5e-7)
    assert report.extras["two_convex"]
    assert report.extras["min_p2"] > 0.0


def test_af2_flags_loss_of_two_convexity():
    # mean-convex but with p_2 < 0 near the equator
    report = af2_deficit(_fields(4, 128, eps=0.55, degrees=(2,)))
    assert not report.extras["two_convex"]
    assert report.extras["min_p1"] > 0.0
    assert report.extras["min_p2"] < 0.0


def test_af2_newton_maclaurin_extra():
    report = af2_deficit(_fields(5, 128, eps=0.2, degrees=(2, 3)))
    assert report.extras["mean_sq_minus_p2_integral"] > 0.0


# ---------------------------------------------------------------------------
# quasi-local mass (n = 3 only)


def test_hawking_mass_zero_on_spheres():
    for r0 in (0.5, 1.0, 2.0):
        assert abs(hawking_mass(_fields(3, 96, r0=r0))) < 1e-12


def test_hawking_mass_negative_off_spheres():
    assert hawking_mass(_fields(3, 128, eps=0.1, degrees=(2,))) < 0.0


def test_hawking_mass_rejects_other_dimensions():
    with pytest.raises(ValueError):
        hawking_mass(_fields(4, 32))


def test_hawking_mass_is_rescaled_willmore_deficit():
    # deficit = -2 omega_2^{3/2} m_H / sqrt(|Sigma|), an exact identity
    fields = _fields(3, 128, eps=0.12, degrees=(2, 4))
    report = willmore_deficit(fields)
    mass = hawking_mass(fields)
    omega = sphere_measure(2)
    assert_allclose(
        report.deficit,
        -2.0 * omega**1.5 * mass / math.sqrt(fields.area),
        rtol=1e-11,
    )


# ---------------------------------------------------------------------------
# large-time expansion residuals


def test_asymptotic_residuals_sphere_closed_forms():
    for n in (3, 4, 6):
        state = FlowState(0.7, make_shape(ShapeSpec("sphere", 1.1), build_grid("axisym", n, 96)))
        res = asymptotic_residuals(state)
        s, c = math.sinh(1.1), math.cosh(1.1)
        assert_allclose(res.r21, abs(c - s - 0.5 / s) / s, rtol=1e-12)
        assert res.r22 < 1e-15
        assert res.r23 < 1e-10
        assert set(res.as_dict()) == {"r21", "r22", "r23"}


def test_asymptotic_residuals_decrease_with_radius():
    grid = build_grid("axisym", 3, 96)
    small = asymptotic_residuals(FlowState(0.0, make_shape(ShapeSpec("sphere", 1.0), grid)))
    large = asymptotic_residuals(FlowState(0.0, make_shape(ShapeSpec("sphere", 3.0), grid)))
    assert large.r21 < small.r21 / 10.0


# ---------------------------------------------------------------------------
# rate fitting


def test_fit_exponential_rate_recovers_synthetic_slope():
    t = np.linspace(0.0, 5.0, 101)
    y = 3.7 * np.exp(-0.81 * t)
    assert fit_exponential_rate(t, y) == pytest.approx(-0.81, abs=1e-12)
    assert fit_exponential_rate(t, y, t_min=1.0, t_max=4.0) == pytest.approx(-0.81, abs=1e-12)


def test_fit_exponential_rate_defaults_to_second_half():
    t = np.linspace(0.0, 4.0, 81)
    y = np.exp(-t) + 0.5 * np.exp(-6.0 * t)  # fast transient dies out early
    assert fit_exponential_rate(t, y) == pytest.approx(-1.0, abs=1e-3)


def test_fit_exponential_rate_validates_window():
    t = np.linspace(0.0, 1.0, 11)
    y = np.exp(-t)
    with pytest.raises(ValueError):
        fit_exponential_rate(t, y, t_min=0.99, t_max=0.995)
    y_bad = y.copy()
    y_bad[8] = 0.0
    with pytest.raises(ValueError):
        fit_exponential_rate(t, y_bad, t_min=0.5)
