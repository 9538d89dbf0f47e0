"""Kernel benchmark: numba backend versus the pure NumPy fallback.

Runs the identical workload (same seed, same velocity tables) through each
available backend and reports wall-clock throughput plus an agreement check
on the receiver counts. The numba backend is timed after a warm-up call so
JIT compilation does not pollute the measurement.
"""

from __future__ import annotations

import time

import numpy as np

from .backend import get_simulate, has_numba
from .pbs import PbsConfig, build_velocity_tables, receiver_windows
from .rng import STREAM_STEP, derive_key, init_positions

__all__ = ["run_benchmark", "format_report"]


def run_benchmark(scenario, n_particles: int = 20_000, n_steps: int = 2_000, seed: int = 7):
    """Time both backends on a short run; returns a dict of results."""
    dt = 5e-4
    config = PbsConfig(
        n_particles=n_particles,
        dt=dt,
        duration=n_steps * dt,
        seed=seed,
        sample_interval=max(dt, (n_steps // 10) * dt),
    )
    tables = build_velocity_tables(
        scenario.waveform, scenario.geometry, scenario.fluid, config.n_steps, config.dt
    )
    rx = receiver_windows(scenario.receiver, scenario.geometry.loop_length)
    args = (
        scenario.waveform.mean_velocity,
        config.dt,
        scenario.transport.molecular_diffusion,
        scenario.geometry.radius,
        scenario.geometry.loop_length,
        derive_key(config.seed, STREAM_STEP),
        config.sample_every,
        rx,
    )
    backends = ["numpy"] + (["numba"] if has_numba() else [])
    results: dict = {
        "n_particles": n_particles,
        "n_steps": config.n_steps,
        "particle_steps": n_particles * config.n_steps,
        "backends": {},
    }
    counts_by_backend = {}
    for name in backends:
        simulate = get_simulate(name)
        if name == "numba":
            # warm-up on a tiny slice to absorb JIT compilation
            xw, yw, zw = init_positions(64, scenario.geometry.radius, config.seed)
            simulate(xw, yw, zw, tables[0], tables[1], tables[2][:2], tables[3][:2], *args[:-2],
                     1, rx)
        x, y, z = init_positions(n_particles, scenario.geometry.radius, config.seed)
        t0 = time.perf_counter()
        counts, _, _, _, _ = simulate(x, y, z, *tables, *args)
        elapsed = time.perf_counter() - t0
        counts_by_backend[name] = counts
        results["backends"][name] = {
            "elapsed_s": elapsed,
            "mps": n_particles * config.n_steps / elapsed,
        }
    if len(counts_by_backend) == 2:
        diff = np.abs(counts_by_backend["numba"] - counts_by_backend["numpy"])
        results["max_count_diff"] = int(diff.max())
        results["speedup"] = (
            results["backends"]["numpy"]["elapsed_s"]
            / results["backends"]["numba"]["elapsed_s"]
        )
    return results


def format_report(results: dict) -> str:
    lines = [
        f"workload: {results['n_particles']} particles x {results['n_steps']} steps "
        f"({results['particle_steps']:.2e} particle-steps)"
    ]
    for name, r in results["backends"].items():
        lines.append(f"  {name:>6}: {r['elapsed_s']:8.3f} s   {r['mps'] / 1e6:8.2f} M steps/s")
    if "speedup" in results:
        lines.append(
            f"numba speedup: {results['speedup']:.1f}x; "
            f"max per-sample count difference: {results['max_count_diff']}"
        )
    return "\n".join(lines)
