"""Initial-data catalogue: spec validation, reproducible random shapes, and
admission reports."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from imcflab.shapes import (
    ShapeSpec,
    make_shape,
    random_positive_field,
    standard_corpus,
    validate_shape,
    zonal_harmonic,
)
from imcflab.sphere_discretization import build_grid

import oracles


# ---------------------------------------------------------------------------
# spec construction and round-tripping


def test_spec_validation():
    with pytest.raises(ValueError):
        ShapeSpec("ellipsoid", 1.0)
    with pytest.raises(ValueError):
        ShapeSpec("sphere", -1.0)
    with pytest.raises(ValueError):
        ShapeSpec("perturbed_sphere", 1.0, eps=1.0, degrees=(2,))
    with pytest.raises(ValueError):
        ShapeSpec("perturbed_sphere", 1.0, eps=-0.1, degrees=(2,))
    with pytest.raises(ValueError):
        ShapeSpec("random", 1.0, eps=0.1)  # seed required


def test_spec_normalizes_degrees():
    spec = ShapeSpec("perturbed_sphere", 1.0, 0.1, degrees=[3, 2])
    assert spec.degrees == (3, 2)
    assert isinstance(spec.degrees[0], int)


def test_spec_dict_roundtrip():
    spec = ShapeSpec("perturbed_sphere", 1.5, 0.07, (2, 4), label="bump")
    again = ShapeSpec.from_dict(spec.to_dict())
    assert again == spec
    rand = ShapeSpec("random", 1.0, 0.08, seed=42)
    assert ShapeSpec.from_dict(rand.to_dict()) == rand


def test_spec_from_dict_rejects_unknown_keys():
    payload = ShapeSpec("sphere", 1.0).to_dict()
    payload["tilt"] = 0.2
    with pytest.raises(ValueError):
        ShapeSpec.from_dict(payload)


@given(
    r0=st.floats(0.3, 2.5, allow_nan=False),
    eps=st.floats(0.0, 0.25, allow_nan=False),
    degrees=st.lists(st.integers(1, 6), min_size=1, max_size=3),
)
@settings(max_examples=50, deadline=None)
def test_spec_roundtrip_property(r0, eps, degrees):
    kind = "perturbed_sphere" if eps > 0.0 else "sphere"
    spec = ShapeSpec(kind, r0, eps, tuple(degrees) if eps > 0.0 else ())
    assert ShapeSpec.from_dict(spec.to_dict()) == spec


# ---------------------------------------------------------------------------
# profile construction


def test_sphere_shape_is_constant():
    grid = build_grid("axisym", 3, 48)
    graph = make_shape(ShapeSpec("sphere", 1.3), grid)
    assert_allclose(graph.r, 1.3, rtol=0.0, atol=0.0)


def test_zonal_profile_matches_legendre_series():
    grid = build_grid("axisym", 4, 64)
    graph = make_shape(ShapeSpec("perturbed_sphere", 1.0, 0.1, (3,)), grid)
    want = oracles.legendre_profile(1.0, 0.1, 3)
    vals = np.array([float(want.subs(oracles.PSI, p)) for p in grid.psi])
    assert_allclose(graph.r, vals, rtol=1e-12)


def test_multi_degree_profile_superposes():
    grid = build_grid("axisym", 3, 48)
    combined = make_shape(ShapeSpec("perturbed_sphere", 1.0, 0.06, (2, 4)), grid)
    part2 = make_shape(ShapeSpec("perturbed_sphere", 1.0, 0.06, (2,)), grid)
    part4 = make_shape(ShapeSpec("perturbed_sphere", 1.0, 0.06, (4,)), grid)
    assert_allclose(combined.r, part2.r + part4.r - 1.0, rtol=1e-13)


def test_zonal_harmonic_is_legendre():
    psi = np.linspace(0.1, 3.0, 7)
    got = zonal_harmonic(2, psi)
    want = 0.5 * (3.0 * np.cos(psi) ** 2 - 1.0)
    assert_allclose(got, want, rtol=1e-13)


def test_full_sphere_zonal_shape_matches_axisymmetric():
    spec = ShapeSpec("perturbed_sphere", 1.0, 0.08, (2,))
    ax = make_shape(spec, build_grid("axisym", 3, 32))
    full = make_shape(spec, build_grid("s2", 3, (32, 64)))
    assert_allclose(full.r, np.broadcast_to(ax.r[:, None], (32, 64)), rtol=1e-14)


def test_full_sphere_random_shape_uses_longitude():
    spec = ShapeSpec("random", 1.0, 0.08, seed=7)
    full = make_shape(spec, build_grid("s2", 3, (24, 48)))
    assert full.r.std(axis=1).max() > 1e-4  # genuinely non-axisymmetric


# ---------------------------------------------------------------------------
# random shapes


def test_random_shapes_are_reproducible():
    grid = build_grid("axisym", 3, 64)
    a = make_shape(ShapeSpec("random", 1.0, 0.08, seed=5), grid)
    b = make_shape(ShapeSpec("random", 1.0, 0.08, seed=5), grid)
    c = make_shape(ShapeSpec("random", 1.0, 0.08, seed=6), grid)
    assert np.array_equal(a.r, b.r)
    assert not np.array_equal(a.r, c.r)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_random_shapes_are_admissible(n):
    grid = build_grid("axisym", n, 64)
    for seed in range(12):
        graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=seed), grid)
        report = validate_shape(graph)
        assert report.star_shaped_graph
        assert report.mean_convex


def test_random_amplitude_stays_bounded():
    grid = build_grid("axisym", 3, 64)
    graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=3), grid)
    assert np.abs(graph.r - 1.0).max() <= 0.08 + 1e-12


# ---------------------------------------------------------------------------
# admission reports


def test_validate_shape_on_sphere():
    grid = build_grid("axisym", 4, 48)
    report = validate_shape(make_shape(ShapeSpec("sphere", 1.0), grid))
    assert report.star_shaped_graph and report.mean_convex and report.two_convex
    assert report.min_p1 == pytest.approx(np.cosh(1.0) / np.sinh(1.0), rel=1e-10)
    payload = report.as_dict()
    assert set(payload) == {
        "star_shaped_graph",
        "mean_convex",
        "two_convex",
        "min_p1",
        "min_p2",
    }


def test_validate_shape_flags_lost_convexity():
    grid = build_grid("axisym", 3, 128)
    report = validate_shape(make_shape(ShapeSpec("perturbed_sphere", 1.0, 0.7, (2,)), grid))
    assert report.star_shaped_graph
    assert not report.mean_convex
    assert report.min_p1 < 0.0


def test_mean_convexity_threshold_matches_bisection():
    """The first zonal degree-2 amplitude that loses mean-convexity, found
    independently by symbolic bisection."""
    thresholds = {3: 0.6203257411867202, 4: 0.776353888458102}
    for n, eps_star in thresholds.items():
        grid = build_grid("axisym", n, 256)
        below = validate_shape(
            make_shape(ShapeSpec("perturbed_sphere", 1.0, eps_star - 0.01, (2,)), grid)
        )
        above = validate_shape(
            make_shape(ShapeSpec("perturbed_sphere", 1.0, eps_star + 0.01, (2,)), grid)
        )
        assert below.mean_convex
        assert not above.mean_convex


# ---------------------------------------------------------------------------
# corpus and random test fields


@pytest.mark.parametrize("n", [3, 4, 5])
def test_standard_corpus_is_admissible(n):
    corpus = standard_corpus(n)
    assert len(corpus) == 20
    assert len({spec.label for spec in corpus}) == 20
    grid = build_grid("axisym", n, 96)
    for spec in corpus:
        report = validate_shape(make_shape(spec, grid))
        assert report.mean_convex, spec.label


def test_corpus_seeds_differ_by_dimension():
    labels3 = [s.seed for s in standard_corpus(3) if s.kind == "random"]
    labels4 = [s.seed for s in standard_corpus(4) if s.kind == "random"]
    assert set(labels3).isdisjoint(labels4)


def test_random_positive_field_bounds():
    grid = build_grid("axisym", 5, 64)
    for seed in range(10):
        f = random_positive_field(grid, seed=seed, amplitude=0.6)
        assert f.min() > 0.39
        assert np.abs(f - 1.0).max() <= 0.6 + 1e-12
    again = random_positive_field(grid, seed=4, amplitude=0.6)
    assert np.array_equal(again, random_positive_field(grid, seed=4, amplitude=0.6))
