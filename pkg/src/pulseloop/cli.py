"""Command-line interface.

Subcommands mirror the experiment taxonomy: ``cir`` (analytical model only),
``pbs`` (simulation only), ``compare`` (both plus agreement metrics),
``sweep`` (parameter grid), ``presets`` (list or run figure recipes), and
``bench`` (backend timing). All data lands as CSV plus a JSON manifest.

Exit codes: 0 success, 2 configuration error, 3 regime hard failure,
4 sweep assertion failure, 5 numerical error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .backend import ENV_VAR
from .bench import format_report, run_benchmark
from .cir import default_time_grid
from .errors import (
    ConfigError,
    InvalidParameterError,
    NumericalError,
    RegimeError,
    SweepAssertionError,
)
from .output import emit_csv, ensure_outdir, snapshot_csv, write_manifest
from .presets import PRESETS, get_preset
from .pbs import run_pbs
from .rng import STREAM_STEP, derive_key, init_positions  # noqa: F401  (snapshot plumbing)
from .scenario import SWEEP_ASSERTIONS, load_run_spec, run_experiment, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_ASSERTION = 4
EXIT_NUMERICAL = 5


def _read_config(path: str | None) -> str:
    if path is None:
        return ""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def _apply_overrides(args, spec):
    """Fold CLI flags into the loaded run spec."""
    pbs = spec.pbs
    if getattr(args, "seed", None) is not None:
        pbs = type(pbs)(
            n_particles=pbs.n_particles,
            dt=pbs.dt,
            duration=pbs.duration,
            seed=args.seed,
            sample_interval=pbs.sample_interval,
            backend=pbs.backend,
        )
    if getattr(args, "backend", None) is not None:
        pbs = type(pbs)(
            n_particles=pbs.n_particles,
            dt=pbs.dt,
            duration=pbs.duration,
            seed=pbs.seed,
            sample_interval=pbs.sample_interval,
            backend=args.backend,
        )
    grid_points = getattr(args, "grid_points", None) or spec.output.grid_points
    return pbs, grid_points


def _emit(outdir: str, label: str, series, manifest: dict) -> tuple[str, str]:
    ensure_outdir(outdir)
    csv_path = os.path.join(outdir, f"{label}.csv")
    manifest_path = os.path.join(outdir, f"{label}.manifest.json")
    emit_csv(csv_path, series)
    manifest = dict(manifest)
    manifest["outputs"] = {"csv": os.path.basename(csv_path)}
    manifest["series_labels"] = [s.label for s in series]
    write_manifest(manifest_path, manifest)
    return csv_path, manifest_path


def _base_manifest(command: str, spec, elapsed: float) -> dict:
    return {
        "tool": {"name": "pulseloop", "version": __version__},
        "command": command,
        "scenario": spec.scenario.as_dict(),
        "regime": spec.scenario.regime.as_dict(),
        "runtime": {"elapsed_s": elapsed},
    }


def _cmd_cir(args) -> int:
    t0 = time.perf_counter()
    spec = load_run_spec(_read_config(args.config))
    _, grid_points = _apply_overrides(args, spec)
    t_grid = default_time_grid(grid_points, spec.output.t_max)
    series, extras = run_experiment(spec.scenario, None, t_grid)
    manifest = _base_manifest("cir", spec, time.perf_counter() - t0)
    manifest["metrics"] = extras["metrics"]
    csv_path, _ = _emit(args.out, spec.output.label, series, manifest)
    print(f"wrote {csv_path} ({len(series)} series, {len(series[0])} points)")
    return EXIT_OK


def _cmd_pbs(args) -> int:
    t0 = time.perf_counter()
    spec = load_run_spec(_read_config(args.config))
    pbs_config, _ = _apply_overrides(args, spec)
    result = run_pbs(spec.scenario, pbs_config)
    manifest = _base_manifest("pbs", spec, time.perf_counter() - t0)
    manifest["pbs"] = result.stats
    label = spec.output.label + "_pbs"
    csv_path, _ = _emit(args.out, label, [result.series], manifest)
    if args.snapshot:
        # final positions, regenerated deterministically from the same run
        from .backend import get_simulate, resolve_backend
        from .pbs import build_velocity_tables, receiver_windows

        backend = resolve_backend(pbs_config.backend)
        x, y, z = init_positions(
            pbs_config.n_particles, spec.scenario.geometry.radius, pbs_config.seed
        )
        tables = build_velocity_tables(
            spec.scenario.waveform,
            spec.scenario.geometry,
            spec.scenario.fluid,
            pbs_config.n_steps,
            pbs_config.dt,
        )
        get_simulate(backend)(
            x,
            y,
            z,
            *tables,
            spec.scenario.waveform.mean_velocity,
            pbs_config.dt,
            spec.scenario.transport.molecular_diffusion,
            spec.scenario.geometry.radius,
            spec.scenario.geometry.loop_length,
            derive_key(pbs_config.seed, STREAM_STEP),
            pbs_config.sample_every,
            receiver_windows(spec.scenario.receiver, spec.scenario.geometry.loop_length),
        )
        snap_path = os.path.join(args.out, label + "_positions.csv")
        snapshot_csv(snap_path, x, y, z)
        print(f"wrote {snap_path}")
    print(f"wrote {csv_path} (backend {result.stats['backend']})")
    return EXIT_OK


def _cmd_compare(args) -> int:
    t0 = time.perf_counter()
    spec = load_run_spec(_read_config(args.config))
    pbs_config, _ = _apply_overrides(args, spec)
    series, extras = run_experiment(spec.scenario, pbs_config)
    manifest = _base_manifest("compare", spec, time.perf_counter() - t0)
    manifest["metrics"] = extras["metrics"]
    manifest["pbs"] = extras["pbs_stats"]
    csv_path, _ = _emit(args.out, spec.output.label + "_compare", series, manifest)
    m = extras["metrics"]["pbs_vs_analytical"]
    print(
        f"wrote {csv_path}; pbs vs analytical: rmse {m['rmse']:.4g}, "
        f"max {m['max_abs_error']:.4g}, peak dt {m['peak_time_delta_s']:.4g} s"
    )
    return EXIT_OK


def _run_sweep_and_emit(args, spec, scenario, param, values, assertion, label) -> int:
    t0 = time.perf_counter()
    pbs_config, grid_points = _apply_overrides(args, spec)
    use_pbs = pbs_config if getattr(args, "pbs", False) else None
    t_grid = default_time_grid(grid_points, spec.output.t_max)
    series, extras = run_sweep(
        scenario, param, values, pbs_config=use_pbs, t_grid=t_grid, assertion=assertion
    )
    manifest = _base_manifest("sweep", spec, time.perf_counter() - t0)
    manifest["sweep"] = {
        "param": param,
        "values": [float(v) for v in values],
        "cells": extras["cells"],
    }
    if "assertion" in extras:
        manifest["sweep"]["assertion"] = extras["assertion"]
    csv_path, _ = _emit(args.out, label, series, manifest)
    note = f" (assertion {assertion}: passed)" if assertion else ""
    print(f"wrote {csv_path} ({len(series)} series){note}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_run_spec(_read_config(args.config))
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: not numeric: {args.values!r}") from exc
    label = f"{spec.output.label}_sweep_{args.param.split('.')[-1]}"
    return _run_sweep_and_emit(
        args, spec, spec.scenario, args.param, values, getattr(args, "check", None), label
    )


def _cmd_presets(args) -> int:
    if args.preset is None:
        for name in sorted(PRESETS):
            print(f"{name}: {PRESETS[name].description}")
        return EXIT_OK
    recipe = get_preset(args.preset)
    # recipes reuse the default run spec for pbs/output settings
    spec = load_run_spec("[waveform]\npreset = steady\n")
    return _run_sweep_and_emit(
        args, spec, recipe.scenario, recipe.param, recipe.values, recipe.assertion, recipe.name
    )


def _cmd_bench(args) -> int:
    spec = load_run_spec(_read_config(args.config) or "[waveform]\npreset = physiological\n")
    results = run_benchmark(
        spec.scenario, n_particles=args.particles, n_steps=args.steps, seed=args.seed or 7
    )
    print(format_report(results))
    if args.out is not None:
        ensure_outdir(args.out)
        write_manifest(os.path.join(args.out, "bench.manifest.json"), {"bench": results})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulseloop",
        description=(
            "Analytical time-variant channel model and particle simulation for "
            "closed-loop transport under pulsatile flow. Backend override: "
            f"{ENV_VAR}=numba|numpy|auto."
        ),
    )
    parser.add_argument("--version", action="version", version=f"pulseloop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, pbs_flags: bool = False):
        p.add_argument("--config", help="INI scenario file (defaults apply to omitted keys)")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--grid-points", type=int, help="override output grid size")
        if pbs_flags:
            p.add_argument("--seed", type=int, help="override simulation seed")
            p.add_argument("--backend", choices=["numba", "numpy", "auto"])

    p_cir = sub.add_parser("cir", help="analytical and steady-reference series")
    add_common(p_cir)
    p_cir.set_defaults(func=_cmd_cir)

    p_pbs = sub.add_parser("pbs", help="particle simulation series")
    add_common(p_pbs, pbs_flags=True)
    p_pbs.add_argument(
        "--snapshot", action="store_true", help="also write final particle positions"
    )
    p_pbs.set_defaults(func=_cmd_pbs)

    p_cmp = sub.add_parser("compare", help="analytical + steady + simulation with metrics")
    add_common(p_cmp, pbs_flags=True)
    p_cmp.set_defaults(func=_cmd_compare)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter over a value grid")
    add_common(p_sweep, pbs_flags=True)
    p_sweep.add_argument("--param", required=True, help="e.g. waveform.frequency")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument(
        "--assert",
        dest="check",
        choices=sorted(SWEEP_ASSERTIONS),
        help="fail (exit 4) unless the named trend holds",
    )
    p_sweep.add_argument("--pbs", action="store_true", help="add simulation columns per cell")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_presets = sub.add_parser("presets", help="list figure recipes, or run one")
    add_common(p_presets, pbs_flags=True)
    p_presets.add_argument("--preset", help="recipe name to run (omit to list)")
    p_presets.add_argument("--pbs", action="store_true", help="add simulation columns per cell")
    p_presets.set_defaults(func=_cmd_presets)

    p_bench = sub.add_parser("bench", help="time the numba kernel against the NumPy fallback")
    p_bench.add_argument("--config", help="scenario for the benchmark workload")
    p_bench.add_argument("--out", default=None, help="optional directory for bench.manifest.json")
    p_bench.add_argument("--particles", type=int, default=20_000)
    p_bench.add_argument("--steps", type=int, default=2_000)
    p_bench.add_argument("--seed", type=int)
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeError as exc:
        print(f"regime failure: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except SweepAssertionError as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
