"""Command-line harness: run flows, execute property suites, sweep parameter grids.

Subcommands:
  run    --config FILE [--out DIR] [overrides]   -> report.json + series.csv
  check  SUITE [--config FILE] [overrides]       -> pass/fail lines, exit 0 iff all pass
  sweep  --config FILE [--out DIR] [overrides]   -> sweep.csv

Configs are YAML; command-line flags override config values. Floats are
written with 17 significant digits so reruns with the same config and seed
produce bit-identical CSV files (timings live only in report.json). Output
files are written atomically: a failed command leaves no partial files.
IMCF_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import imcf_flow
from ._kernels import BACKEND
from .functionals import (
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
from .hyperbolic_geometry import compute_geometry
from .imcf_flow import (
    FlowConfig,
    MeanConvexityError,
    StepDiagnostics,
    sphere_radius_exact,
    step,
)
from .shapes import ShapeSpec, make_shape, random_positive_field, standard_corpus, validate_shape
from .sphere_discretization import build_grid, sphere_measure

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_FLOW = 3

SUITES = ("sphere-oracle", "willmore", "beckner", "evolution", "af2")

RUN_KEYS = {
    "n", "mode", "resolution", "dt", "t_end", "dt_policy", "cfl_safety",
    "sample_interval", "shape", "label",
}
SWEEP_KEYS = {"n", "mode", "resolution", "dt", "t_end", "radii", "amplitudes", "degrees", "label"}


class ConfigError(ValueError):
    """Unusable config file or option set."""


# ---------------------------------------------------------------------------
# small IO helpers


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_safe(obj):
    """nan/inf are not valid JSON scalars; map them to null / sentinels."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return None
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())


def _fail(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _load_config(path: str) -> tuple[str, dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} does not parse: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping, got {type(data).__name__}")
    return text, data


def _require_keys(data: dict, allowed: set, where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def _apply_overrides(cfg: dict, args, keys=("n", "mode", "resolution", "dt", "t_end")) -> dict:
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _thread_cap(ncells: int) -> int:
    raw = os.environ.get("IMCF_THREADS", "").strip()
    if raw:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ConfigError(f"IMCF_THREADS must be an integer, got {raw!r}") from exc
        if cap < 1:
            raise ConfigError("IMCF_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, ncells))


# ---------------------------------------------------------------------------
# run


def _shape_from_config(cfg: dict, seed_override: int | None) -> ShapeSpec:
    raw = cfg.get("shape")
    if not isinstance(raw, dict):
        raise ConfigError("config needs a 'shape' mapping (kind, r0, ...)")
    raw = dict(raw)
    if seed_override is not None:
        raw["seed"] = seed_override
    try:
        return ShapeSpec.from_dict(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad shape: {exc}") from exc


def cmd_run(args) -> int:
    config_text, cfg = _load_config(args.config)
    _require_keys(cfg, RUN_KEYS, "run config")
    _apply_overrides(cfg, args)
    spec = _shape_from_config(cfg, args.seed)

    try:
        flow_config = FlowConfig(
            n=int(cfg.get("n", 3)),
            mode=str(cfg.get("mode", "axisym")),
            resolution=cfg.get("resolution", 64),
            dt=float(cfg.get("dt", 1e-3)),
            t_end=float(cfg.get("t_end", 1.0)),
            dt_policy=str(cfg.get("dt_policy", "fixed")),
            cfl_safety=float(cfg.get("cfl_safety", 0.2)),
            sample_interval=cfg.get("sample_interval"),
        )
        grid = build_grid(flow_config.mode, flow_config.n, flow_config.resolution)
        graph = make_shape(spec, grid)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    admission = validate_shape(graph)
    if not admission.mean_convex:
        _fail("admission", f"initial shape rejected: {admission.as_dict()}")
        return EXIT_FLOW

    try:
        result = imcf_flow.run(flow_config, graph)
    except MeanConvexityError as exc:
        _fail("admission", str(exc))
        return EXIT_FLOW

    report = _run_report(config_text, cfg, spec, result)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "series.csv",
        list(StepDiagnostics.COLUMNS),
        [list(d.row()) for d in result.diagnostics],
    )
    _atomic_write(out_dir / "report.json", json.dumps(_json_safe(report), indent=2, sort_keys=True) + "\n")

    if not result.completed:
        _fail("guard", result.termination)
        return EXIT_FLOW
    print(f"run finished: t = {result.final_state.t:.6g}, {result.steps} steps, wrote {out_dir}/report.json")
    return EXIT_OK


def _run_report(config_text: str, cfg: dict, spec: ShapeSpec, result) -> dict:
    n = result.config.n
    times = result.series("t")
    areas = result.series("area")
    qs = result.series("q")
    umb = result.series("umbilicity")
    min_p1 = result.series("min_p1")

    area_law = np.abs(areas - areas[0] * np.exp(times)) / (areas[0] * np.exp(times))
    q_increase = float(np.max(np.diff(qs))) if qs.size > 1 else 0.0

    rates: dict[str, float] = {
        "reference_umbilicity_rate": -2.0 / (n - 1.0),
        "reference_area_rate": 1.0,
    }
    for name, series in (("umbilicity_rate", umb), ("area_rate", areas)):
        try:
            rates[name] = fit_exponential_rate(times, series)
        except ValueError:
            rates[name] = float("nan")

    final_fields = result.final_state.fields
    reports = {
        "willmore": willmore_deficit(final_fields).as_dict(),
        "af2": af2_deficit(final_fields).as_dict(),
        "asymptotic_residuals": asymptotic_residuals(result.final_state).as_dict(),
    }
    if n == 3:
        reports["hawking_mass"] = hawking_mass(final_fields)

    checks = {
        "area_law_rel_err": float(area_law.max()),
        "area_law": bool(area_law.max() < 1e-6),
        "q_monotone": bool(q_increase <= 1e-9 * max(1.0, abs(qs[0]))),
        "mean_convex_persisted": bool(min_p1.min() > 0.0),
        "willmore_holds": bool(reports["willmore"]["deficit"] >= -1e-8 * reports["willmore"]["rhs"]),
    }

    return {
        "artifact": "imcflab run report",
        "backend": BACKEND,
        "config_echo": config_text,
        "effective_config": {
            "n": result.config.n,
            "mode": result.config.mode,
            "resolution": result.config.resolution,
            "dt": result.config.dt,
            "t_end": result.config.t_end,
            "dt_policy": result.config.dt_policy,
            "cfl_safety": result.config.cfl_safety,
            "sample_interval": result.config.sample_interval,
            "shape": spec.to_dict(),
            "label": cfg.get("label", spec.label),
        },
        "termination": result.termination,
        "steps": result.steps,
        "samples": len(result.diagnostics),
        "min_cfl_limit": result.min_cfl_limit,
        "wall_time_seconds": result.wall_time,
        "initial": dict(zip(StepDiagnostics.COLUMNS, result.diagnostics[0].row())),
        "final": dict(zip(StepDiagnostics.COLUMNS, result.diagnostics[-1].row())),
        "q_initial": float(qs[0]),
        "q_final": float(qs[-1]),
        "rates": rates,
        "reports": reports,
        "checks": checks,
        "series_csv": "series.csv",
    }


# ---------------------------------------------------------------------------
# check


class _Suite:
    """Collects named pass/fail lines; exit status 0 iff all passed."""

    def __init__(self, name: str):
        self.name = name
        self.failures = 0
        self.count = 0

    def record(self, label: str, ok: bool, detail: str = "") -> None:
        self.count += 1
        self.failures += 0 if ok else 1
        tag = "PASS" if ok else "FAIL"
        print(f"{tag} {self.name}: {label}" + (f" ({detail})" if detail else ""))

    def finish(self) -> int:
        status = "all passed" if self.failures == 0 else f"{self.failures} failed"
        print(f"{self.name}: {self.count} checks, {status}")
        return EXIT_OK if self.failures == 0 else EXIT_CHECK_FAILED


def _check_dims(args, cfg: dict, default: tuple[int, ...]) -> list[int]:
    if args.n is not None:
        return [args.n]
    raw = cfg.get("n", list(default))
    if isinstance(raw, (int, float)):
        raw = [int(raw)]
    return [int(v) for v in raw]


def _suite_sphere_oracle(args, cfg: dict) -> int:
    suite = _Suite("sphere-oracle")
    resolution = int(args.resolution or cfg.get("resolution", 64))
    for n, mode in [(3, "axisym"), (3, "s2"), (4, "axisym"), (5, "axisym")]:
        grid = build_grid(mode, n, resolution)
        omega = sphere_measure(n - 1)
        for r0 in (0.7, 1.5):
            fields = compute_geometry(make_shape(ShapeSpec("sphere", r0), grid))
            coth = math.cosh(r0) / math.sinh(r0)
            area_exact = omega * math.sinh(r0) ** (n - 1)
            suite.record(
                f"n={n} {mode} r0={r0} mean curvature = coth r",
                bool(np.max(np.abs(fields.p1 - coth)) < 1e-10),
                f"max err {np.max(np.abs(fields.p1 - coth)):.2e}",
            )
            suite.record(
                f"n={n} {mode} r0={r0} area",
                abs(fields.area - area_exact) / area_exact < 1e-12,
                f"rel err {abs(fields.area - area_exact) / area_exact:.2e}",
            )
            q_err = abs(quantity_Q(fields) - omega ** (2.0 / (n - 1)))
            suite.record(f"n={n} {mode} r0={r0} Q = omega^(2/(n-1))", q_err < 1e-8, f"err {q_err:.2e}")
        # radius growth law under the flow itself
        flow_config = FlowConfig(n=n, mode=mode, resolution=resolution, dt=1e-3, t_end=0.3)
        result = imcf_flow.run(flow_config, make_shape(ShapeSpec("sphere", 1.0), grid))
        r_final = float(result.final_state.graph.r.mean())
        r_exact = sphere_radius_exact(1.0, n, 0.3)
        suite.record(
            f"n={n} {mode} sphere radius law after t=0.3",
            abs(r_final - r_exact) / r_exact < 1e-6,
            f"rel err {abs(r_final - r_exact) / r_exact:.2e}",
        )
    return suite.finish()


def _suite_willmore(args, cfg: dict) -> int:
    suite = _Suite("willmore")
    resolution = int(args.resolution or cfg.get("resolution", 64))
    for n in _check_dims(args, cfg, (3, 4, 5)):
        grid = build_grid("axisym", n, resolution)
        worst = math.inf
        for spec in standard_corpus(n):
            fields = compute_geometry(make_shape(spec, grid))
            report = willmore_deficit(fields)
            worst = min(worst, report.deficit / report.rhs)
        suite.record(
            f"n={n} corpus deficits nonnegative",
            worst >= -1e-8,
            f"worst relative deficit {worst:.3e}",
        )
        sphere = willmore_deficit(compute_geometry(make_shape(ShapeSpec("sphere", 1.0), grid)))
        suite.record(
            f"n={n} sphere saturates equality",
            abs(sphere.relative_deficit) < 1e-10,
            f"relative deficit {sphere.relative_deficit:.3e}",
        )
    return suite.finish()


def _suite_beckner(args, cfg: dict) -> int:
    dims = _check_dims(args, cfg, (4, 5, 6))
    bad = [n for n in dims if n == 3]
    if bad:
        grid = build_grid("axisym", 3, 16)
        try:
            beckner_gap(np.ones(grid.shape), grid)
        except BecknerDimensionError as exc:
            _fail("config", f"beckner suite cannot run: {exc}")
            return EXIT_CONFIG
        raise AssertionError("n = 3 must be rejected")
    suite = _Suite("beckner")
    resolution = int(args.resolution or cfg.get("resolution", 96))
    for n in dims:
        grid = build_grid("axisym", n, resolution)
        const = beckner_gap(np.full(grid.shape, 1.7), grid)
        suite.record(
            f"n={n} constant field saturates equality",
            abs(const.relative_deficit) < 1e-10,
            f"relative deficit {const.relative_deficit:.3e}",
        )
        worst = math.inf
        for seed in range(5):
            f = random_positive_field(grid, seed=seed)
            worst = min(worst, beckner_gap(f, grid).relative_deficit)
            worst = min(worst, beckner_w_form(f ** ((n - 3) / 2.0), grid).relative_deficit)
        suite.record(
            f"n={n} random positive fields, both forms",
            worst >= -1e-8,
            f"worst relative deficit {worst:.3e}",
        )
    return suite.finish()


def _suite_evolution(args, cfg: dict) -> int:
    suite = _Suite("evolution")
    resolution = int(args.resolution or cfg.get("resolution", 96))
    for n in _check_dims(args, cfg, (3, 4, 5)):
        grid = build_grid("axisym", n, resolution)
        graph = make_shape(ShapeSpec("perturbed_sphere", r0=1.5, eps=0.05, degrees=(2,)), grid)
        dt = 2.5e-4
        result = imcf_flow.run(FlowConfig(n=n, mode="axisym", resolution=resolution, dt=dt, t_end=0.5), graph)
        suite.record(f"n={n} run completed", result.completed, result.termination)
        if not result.completed:
            continue
        times = result.series("t")
        areas = result.series("area")
        rel = np.max(np.abs(areas - areas[0] * np.exp(times)) / (areas[0] * np.exp(times)))
        suite.record(f"n={n} area growth law", rel < 1e-6, f"rel err {rel:.2e}")
        qs = result.series("q")
        worst_rise = float(np.max(np.diff(qs)))
        suite.record(f"n={n} Q non-increasing", worst_rise <= 1e-9, f"max rise {worst_rise:.2e}")
        s0 = result.final_state
        s1 = step(s0, dt)
        s2 = step(s1, dt)
        residual = imcf_flow.evolution_residual(s0, s1, s2)
        suite.record(f"n={n} curvature evolution identity", residual < 1e-3, f"residual {residual:.2e}")
    return suite.finish()


def _suite_af2(args, cfg: dict) -> int:
    suite = _Suite("af2")
    resolution = int(args.resolution or cfg.get("resolution", 64))
    for n in _check_dims(args, cfg, (4, 5)):
        grid = build_grid("axisym", n, resolution)
        worst = math.inf
        skipped = 0
        for spec in standard_corpus(n):
            report = af2_deficit(compute_geometry(make_shape(spec, grid)))
            if not report.extras["two_convex"]:
                skipped += 1
                continue
            worst = min(worst, report.deficit / report.rhs)
        suite.record(
            f"n={n} 2-convex corpus deficits nonnegative",
            worst >= -1e-8,
            f"worst relative deficit {worst:.3e}, {skipped} non-2-convex skipped",
        )
        sphere = af2_deficit(compute_geometry(make_shape(ShapeSpec("sphere", 1.2), grid)))
        suite.record(
            f"n={n} sphere saturates equality",
            abs(sphere.relative_deficit) < 1e-10,
            f"relative deficit {sphere.relative_deficit:.3e}",
        )
    return suite.finish()


def cmd_check(args) -> int:
    cfg: dict = {}
    if args.config:
        _, cfg = _load_config(args.config)
    runner = {
        "sphere-oracle": _suite_sphere_oracle,
        "willmore": _suite_willmore,
        "beckner": _suite_beckner,
        "evolution": _suite_evolution,
        "af2": _suite_af2,
    }[args.suite]
    return runner(args, cfg)


# ---------------------------------------------------------------------------
# sweep

SWEEP_COLUMNS = [
    "n", "mode", "resolution", "r0", "eps", "status", "reason", "min_p1",
    "area", "willmore_deficit", "af2_deficit", "q_initial", "q_final",
    "area_law_rel_err", "umbilicity_rate",
]


def _sweep_cell(n: int, mode: str, resolution, r0: float, eps: float,
                degrees: tuple, dt: float, t_end: float) -> list:
    base = [n, mode, resolution if isinstance(resolution, int) else "x".join(map(str, resolution)),
            r0, eps]
    nan = float("nan")
    try:
        grid = build_grid(mode, n, resolution)
        if eps == 0.0:
            spec = ShapeSpec("sphere", r0)
        else:
            spec = ShapeSpec("perturbed_sphere", r0=r0, eps=eps, degrees=degrees)
        graph = make_shape(spec, grid)
        admission = validate_shape(graph)
        if not admission.mean_convex:
            return base + ["rejected", f"min p_1 = {admission.min_p1:.3e}",
                           admission.min_p1, nan, nan, nan, nan, nan, nan, nan]
        fields = compute_geometry(graph)
        wd = willmore_deficit(fields)
        af2 = af2_deficit(fields)
        row = base + ["ok", "", admission.min_p1, fields.area, wd.deficit,
                      af2.deficit if af2.extras["two_convex"] else nan, quantity_Q(fields)]
        if t_end > 0.0:
            result = imcf_flow.run(
                FlowConfig(n=n, mode=mode, resolution=resolution, dt=dt, t_end=t_end), graph
            )
            if not result.completed:
                return base + ["error", result.termination] + [admission.min_p1] + [nan] * 7
            times = result.series("t")
            areas = result.series("area")
            rel = float(np.max(np.abs(areas - areas[0] * np.exp(times)) / (areas[0] * np.exp(times))))
            try:
                u_rate = fit_exponential_rate(times, result.series("umbilicity"))
            except ValueError:
                u_rate = nan
            row += [result.series("q")[-1], rel, u_rate]
        else:
            row += [nan, nan, nan]
        return row
    except Exception as exc:  # cell failures land in the row, sweep continues
        return base + ["error", f"{type(exc).__name__}: {exc}", nan, nan, nan, nan, nan, nan, nan, nan]


def cmd_sweep(args) -> int:
    _, cfg = _load_config(args.config)
    _require_keys(cfg, SWEEP_KEYS, "sweep config")
    _apply_overrides(cfg, args, keys=("mode", "resolution", "dt", "t_end"))
    if args.n is not None:
        cfg["n"] = [args.n]

    def _listed(key, default):
        raw = cfg.get(key, default)
        if isinstance(raw, (int, float)):
            raw = [raw]
        return [float(v) for v in raw]

    raw_dims = cfg.get("n", [3])
    if isinstance(raw_dims, (int, float)):
        raw_dims = [raw_dims]
    dims = [int(v) for v in raw_dims]
    radii = _listed("radii", [1.0])
    amplitudes = _listed("amplitudes", [0.0])
    degrees = tuple(int(d) for d in cfg.get("degrees", (2,)))
    mode = str(cfg.get("mode", "axisym"))
    resolution = cfg.get("resolution", 64)
    dt = float(cfg.get("dt", 1e-3))
    t_end = float(cfg.get("t_end", 0.0))
    if t_end < 0.0:
        raise ConfigError("sweep t_end must be >= 0 (0 disables the flow stage)")

    cells = [(n, mode, resolution, r0, eps, degrees, dt, t_end)
             for n in dims for r0 in radii for eps in amplitudes]

    if cells:
        workers = _thread_cap(len(cells))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda c: _sweep_cell(*c), cells))
        else:
            rows = [_sweep_cell(*c) for c in cells]
    else:
        rows = []

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, rows)
    failed = sum(1 for row in rows if row[5] != "ok")
    print(f"sweep: {len(rows)} cells, {failed} not ok, wrote {out_dir}/sweep.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=_u64, help="override the shape seed")
    parser.add_argument("--resolution", type=int, help="override grid resolution")
    parser.add_argument("--mode", choices=("axisym", "s2"), help="override grid mode")
    parser.add_argument("--n", type=int, help="override ambient dimension")
    parser.add_argument("--t-end", type=float, dest="t_end", help="override flow end time")
    parser.add_argument("--dt", type=float, help="override time step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imcflab",
        description="inverse mean curvature flow laboratory for hypersurfaces in hyperbolic space",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evolve one configured shape and persist the report")
    run_p.add_argument("--config", required=True, help="YAML run config")
    run_p.add_argument("--out", default=".", help="output directory (report.json, series.csv)")
    _add_common_flags(run_p)

    check_p = sub.add_parser("check", help="run a named property suite")
    check_p.add_argument("suite", choices=SUITES)
    check_p.add_argument("--config", help="optional YAML config (n, resolution)")
    _add_common_flags(check_p)

    sweep_p = sub.add_parser("sweep", help="evaluate a radii x amplitudes x n grid")
    sweep_p.add_argument("--config", required=True, help="YAML sweep config")
    sweep_p.add_argument("--out", default=".", help="output directory (sweep.csv)")
    _add_common_flags(sweep_p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "check": cmd_check, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        _fail("config", str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
