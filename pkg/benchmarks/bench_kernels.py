"""Timing comparison of the compiled flow kernels against the numpy fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 200] [--flow]

Reports per-call times for the right-hand-side kernels at several grid sizes
and, with --flow, wall time of a short full run under each backend.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from imcflab import _kernels
from imcflab._kernels import fallback
from imcflab.shapes import ShapeSpec, make_shape
from imcflab.sphere_discretization import build_grid


def _time_call(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_axisym(repeats):
    print("axisym right-hand side (seconds per call, best of %d)" % repeats)
    print(f"{'N':>6} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for resolution in (64, 128, 256, 512, 1024):
        grid = build_grid("axisym", 4, resolution)
        graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=1), grid)
        args = (graph.r, grid.psi, grid.h, 4)
        t_py = _time_call(fallback.axisym_rhs, args, repeats)
        if _kernels.BACKEND == "compiled":
            from imcflab._kernels import _core

            t_c = _time_call(_core.axisym_rhs, args, repeats)
            print(f"{resolution:>6} {t_py:>12.3e} {t_c:>12.3e} {t_py / t_c:>8.1f}x")
        else:
            print(f"{resolution:>6} {t_py:>12.3e} {'n/a':>12} {'':>9}")


def bench_s2(repeats):
    print("\nfull-sphere right-hand side (seconds per call, best of %d)" % repeats)
    print(f"{'grid':>12} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for npsi in (32, 64, 128):
        grid = build_grid("s2", 3, (npsi, 2 * npsi))
        graph = make_shape(ShapeSpec("random", 1.0, 0.08, seed=1), grid)
        args = (graph.r, grid.psi, grid.h_psi, grid.h_theta)
        t_py = _time_call(fallback.s2_rhs, args, repeats)
        label = f"{npsi}x{2 * npsi}"
        if _kernels.BACKEND == "compiled":
            from imcflab._kernels import _core

            t_c = _time_call(_core.s2_rhs, args, repeats)
            print(f"{label:>12} {t_py:>12.3e} {t_c:>12.3e} {t_py / t_c:>8.1f}x")
        else:
            print(f"{label:>12} {t_py:>12.3e} {'n/a':>12} {'':>9}")


FLOW_SNIPPET = """\
import time
from imcflab import kernel_backend
from imcflab.imcf_flow import FlowConfig, run
from imcflab.shapes import ShapeSpec, make_shape
from imcflab.sphere_discretization import build_grid

grid = build_grid("axisym", 4, 256)
graph = make_shape(ShapeSpec("perturbed_sphere", 1.5, 0.05, (2,)), grid)
config = FlowConfig(n=4, resolution=256, dt=1e-3, t_end=1.0)
t0 = time.perf_counter()
result = run(config, graph)
assert result.completed
print(f"{kernel_backend:>9}: {time.perf_counter() - t0:.3f} s for {result.steps} steps")
"""


def bench_flow():
    print("\nfull run, axisym N=256, 1000 steps (subprocess per backend)")
    sys.stdout.flush()
    for backend in ("python", "auto"):
        env = dict(os.environ, IMCF_KERNELS=backend)
        subprocess.run([sys.executable, "-c", FLOW_SNIPPET], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--flow", action="store_true", help="also time a full run")
    args = parser.parse_args()

    print(f"active backend: {_kernels.BACKEND}\n")
    bench_axisym(args.repeats)
    bench_s2(args.repeats)
    if args.flow:
        bench_flow()


if __name__ == "__main__":
    main()
