"""Backend agreement: compiled extension vs pure-numpy fallback, plus the
environment-variable override machinery."""

import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from imcflab import _kernels
from imcflab._kernels import fallback
from imcflab.hyperbolic_geometry import compute_geometry
from imcflab.imcf_flow import radial_velocity
from imcflab.shapes import ShapeSpec, make_shape
from imcflab.sphere_discretization import build_grid

HAVE_COMPILED = _kernels.BACKEND == "compiled"


def _axisym_case(n, resolution, seed):
    grid = build_grid("axisym", n, resolution)
    graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=seed), grid)
    return grid, graph


def test_a_backend_is_active():
    assert _kernels.BACKEND in ("compiled", "python")
    # the package build ships the compiled extension; if this starts failing
    # the environment lost it and every benchmark silently degrades
    assert HAVE_COMPILED


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension unavailable")
@pytest.mark.parametrize("n", [3, 4, 6])
def test_axisym_backends_agree(n):
    from imcflab._kernels import _core

    grid, graph = _axisym_case(n, 96, seed=n)
    compiled_rhs, compiled_min = _core.axisym_rhs(graph.r, grid.psi, grid.h, n)
    python_rhs, python_min = fallback.axisym_rhs(graph.r, grid.psi, grid.h, n)
    assert_allclose(compiled_rhs, python_rhs, rtol=1e-13, atol=1e-15)
    assert compiled_min == pytest.approx(python_min, rel=1e-13)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension unavailable")
def test_s2_backends_agree():
    from imcflab._kernels import _core

    grid = build_grid("s2", 3, (48, 96))
    graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=9), grid)
    compiled_rhs, compiled_min = _core.s2_rhs(graph.r, grid.psi, grid.h_psi, grid.h_theta)
    python_rhs, python_min = fallback.s2_rhs(graph.r, grid.psi, grid.h_psi, grid.h_theta)
    assert_allclose(compiled_rhs, python_rhs, rtol=1e-13, atol=1e-15)
    assert compiled_min == pytest.approx(python_min, rel=1e-13)


@pytest.mark.parametrize("mode,resolution", [("axisym", 96), ("s2", (32, 64))])
def test_kernel_velocity_matches_geometry_route(mode, resolution):
    """The fused kernels must reproduce v/((n-1) p_1) computed from the full
    geometry assembly."""
    grid = build_grid(mode, 3, resolution)
    graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=2), grid)
    fields = compute_geometry(graph)
    want = radial_velocity(fields)
    if mode == "axisym":
        got, min_p1 = _kernels.axisym_rhs(graph.r, grid.psi, grid.h, 3)
    else:
        got, min_p1 = _kernels.s2_rhs(graph.r, grid.psi, grid.h_psi, grid.h_theta)
    assert_allclose(got, want, rtol=1e-9, atol=1e-11)
    assert min_p1 == pytest.approx(float(fields.p1.min()), rel=1e-9)


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("IMCF_KERNELS", None)
    else:
        env["IMCF_KERNELS"] = env_value
    proc = subprocess.run(
        [sys.executable, "-c", "import imcflab; print(imcflab.kernel_backend)"],
        capture_output=True,
        text=True,
        env=env,
    )
    return proc


def test_env_override_selects_python_backend():
    proc = _backend_in_subprocess("python")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "python"


def test_env_override_auto_prefers_compiled():
    proc = _backend_in_subprocess("auto")
    assert proc.returncode == 0
    assert proc.stdout.strip() == _kernels.BACKEND


def test_env_override_rejects_unknown_value():
    proc = _backend_in_subprocess("bogus")
    assert proc.returncode != 0
    assert "IMCF_KERNELS" in proc.stderr


def test_python_backend_runs_the_flow():
    code = (
        "from imcflab.imcf_flow import FlowConfig, run, sphere_radius_exact\n"
        "from imcflab.shapes import ShapeSpec, make_shape\n"
        "from imcflab.sphere_discretization import build_grid\n"
        "import numpy as np\n"
        "grid = build_grid('axisym', 3, 48)\n"
        "res = run(FlowConfig(n=3, resolution=48, dt=1e-3, t_end=0.1),\n"
        "          make_shape(ShapeSpec('sphere', 1.0), grid))\n"
        "err = np.abs(res.final_state.graph.r - sphere_radius_exact(1.0, 3, 0.1)).max()\n"
        "assert res.completed and err < 1e-9, err\n"
        "print('ok')\n"
    )
    env = dict(os.environ, IMCF_KERNELS="python")
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "ok"
