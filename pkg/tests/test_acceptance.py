"""Acceptance suite: one test per shipping criterion, one pass/fail line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
complete. The wall-clock budget is dominated by criterion 6 (two simulation
runs of 5e4 particles over 2e4 steps each).
"""

import math
import os
import subprocess
import sys
import textwrap
import time

import numpy as np
from scipy import integrate

from pulseloop import (
    ChannelGeometry,
    PbsConfig,
    load_scenario,
    run_pbs,
)
from pulseloop.cir import (
    ReceiverSpec,
    cir_timeseries,
    received_signal,
    steady_flow_reference,
    wrapped_pdf,
)
from pulseloop.backend import get_simulate, has_numba, resolve_backend
from pulseloop.dispersion import (
    GaussianMoments,
    TransportParams,
    effective_diffusion,
    mean_displacement,
    moments_by_quadrature,
    variance,
)
from pulseloop.pbs import (
    build_velocity_tables,
    circular_variance,
    pbs_time_grid,
    receiver_windows,
)
from pulseloop.rng import STREAM_STEP, derive_key, init_positions
from pulseloop.timeseries import compare_series
from pulseloop.waveform import (
    eval_velocity,
    make_physiological,
    make_pulsed,
    make_sinusoidal,
    make_steady,
)
from pulseloop.womersley import FluidProperties, axial_velocity_3d, shape_function

GEOM = ChannelGeometry(radius=50e-6, loop_length=1e-3)
FLUID = FluidProperties(density=1060.0, dynamic_viscosity=3e-3)
TRANSPORT = TransportParams(molecular_diffusion=5e-9)
RECEIVER = ReceiverSpec(center=0.3e-3, width=0.1e-3)

PRESETS = {
    "sinusoidal": make_sinusoidal(1e-4, 0.5, 0.5),
    "pulsed": make_pulsed(1e-4, 0.2, 0.5, 50),
    "physiological": make_physiological(2e-4),
}

_GL_N, _GL_W = np.polynomial.legendre.leggauss(64)


def _radial_mean(f, radius, panels=4):
    edges = np.linspace(0.0, radius, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi + lo) + 0.5 * (hi - lo) * _GL_N
        total += 0.5 * (hi - lo) * np.sum(f(r) * r * _GL_W)
    return (2.0 / radius**2) * total


def _report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def test_criterion_1_closed_form_matches_quadrature_oracle():
    t0 = time.perf_counter()
    times = np.logspace(-3, math.log10(20.0), 20)
    worst = 0.0
    for series in PRESETS.values():
        for t in times:
            q = moments_by_quadrature(series, GEOM, TRANSPORT, float(t))
            mu = mean_displacement(series, float(t))
            var = variance(series, GEOM, TRANSPORT, float(t))
            worst = max(
                worst,
                abs(mu - q.mean) / abs(q.mean),
                abs(var - q.variance) / q.variance,
            )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 1.0
    _report(
        1,
        ok,
        f"closed form vs quadrature, 3 presets x 20 times: max rel err "
        f"{worst:.2e} (tol 1e-9), {elapsed:.2f} s (budget 1 s)",
    )


def test_criterion_2_steady_reduction():
    series = make_steady(1e-4)
    d = TRANSPORT.molecular_diffusion
    d1 = d + (1e-4**2 * GEOM.radius**2) / (48.0 * d)
    worst = 0.0
    for t in (1e-3, 0.31, 5.0, 20.0):
        got = variance(series, GEOM, TRANSPORT, t)
        worst = max(worst, abs(got - 2.0 * d1 * t) / (2.0 * d1 * t))
    d1_eff = effective_diffusion(series, GEOM, TRANSPORT, 0.0)
    ok = worst < 1e-12 and abs(d1_eff - 5.1042e-9) < 1e-13
    _report(
        2,
        ok,
        f"constant-flow variance = 2*D1*t: max rel dev {worst:.2e} (tol 1e-12), "
        f"D1 = {d1_eff:.5e} m^2/s (expected 5.1042e-9)",
    )


def test_criterion_3_wrapped_normal_soundness():
    t0 = time.perf_counter()
    L = GEOM.loop_length
    # periodic integrand, so the trapezoid rule converges exponentially
    x = np.linspace(0.0, L, 200_001)
    norm_dev = 0.0
    for mu, sigma in [(0.2e-3, 0.03e-3), (0.9e-3, 0.1e-3), (3.1e-3, 0.5e-3)]:
        m = GaussianMoments(t=1.0, mean=mu, variance=sigma * sigma)
        norm_dev = max(norm_dev, abs(np.trapezoid(wrapped_pdf(m, L, x), x) - 1.0))
    win_dev = 0.0
    for mu, sigma in [(0.1e-3, 0.04e-3), (0.9e-3, 0.15e-3), (4.2e-3, 0.6e-3)]:
        m = GaussianMoments(t=1.0, mean=mu, variance=sigma * sigma)
        got = received_signal(m, L, RECEIVER)
        ref, _ = integrate.quad(
            lambda xx: wrapped_pdf(m, L, xx), 0.25e-3, 0.35e-3, epsabs=1e-13, limit=200
        )
        win_dev = max(win_dev, abs(got - ref))
    flat = GaussianMoments(t=1.0, mean=0.123e-3, variance=(20e-3) ** 2)
    eq_dev = abs(received_signal(flat, L, RECEIVER) - 0.1)
    elapsed = time.perf_counter() - t0
    ok = norm_dev < 1e-9 and win_dev < 1e-9 and eq_dev < 1e-6 and elapsed < 1.0
    _report(
        3,
        ok,
        f"normalization dev {norm_dev:.2e} (tol 1e-9), window vs quadrature dev "
        f"{win_dev:.2e} (tol 1e-9), equilibrium dev {eq_dev:.2e} (tol 1e-6), "
        f"{elapsed:.2f} s (budget 1 s)",
    )


def test_criterion_4_moment_derivatives():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    h = 1e-5
    worst_mean = 0.0
    worst_var = 0.0
    for series in PRESETS.values():
        t = rng.uniform(0.1, 19.9, size=50)
        fd = (mean_displacement(series, t + h) - mean_displacement(series, t - h)) / (
            2.0 * h
        )
        u = eval_velocity(series, t)
        # velocity-scale floor keeps the ratio meaningful at zero crossings
        floor = 1e-3 * series.mean_velocity
        worst_mean = max(worst_mean, np.max(np.abs(fd - u) / np.maximum(np.abs(u), floor)))
        fd_v = (
            variance(series, GEOM, TRANSPORT, t + h)
            - variance(series, GEOM, TRANSPORT, t - h)
        ) / (2.0 * h)
        d1 = effective_diffusion(series, GEOM, TRANSPORT, t)
        worst_var = max(worst_var, np.max(np.abs(fd_v - 2.0 * d1) / (2.0 * d1)))
    elapsed = time.perf_counter() - t0
    ok = worst_mean < 1e-6 and worst_var < 1e-6 and elapsed < 1.0
    _report(
        4,
        ok,
        f"d(mean)/dt vs u(t) max rel {worst_mean:.2e}, d(var)/dt vs 2*D1 max rel "
        f"{worst_var:.2e} (tol 1e-6, 50 random times per preset), "
        f"{elapsed:.2f} s (budget 1 s)",
    )


def test_criterion_5_field_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_mean = 0.0
    worst_slip = 0.0
    for series in PRESETS.values():
        for t in rng.uniform(0.0, 5.0, size=10):
            avg = _radial_mean(
                lambda r: axial_velocity_3d(series, GEOM, FLUID, r, float(t)), GEOM.radius
            )
            u = eval_velocity(series, float(t))
            worst_mean = max(worst_mean, abs(avg - u) / max(abs(u), series.mean_velocity))
            wall = axial_velocity_3d(series, GEOM, FLUID, GEOM.radius, float(t))
            worst_slip = max(worst_slip, abs(wall) / series.mean_velocity)
    omega = 2.0 * math.pi * 1.15
    worst_shape = 0.0
    for n in range(1, 13):
        mean = _radial_mean(lambda r: shape_function(GEOM, FLUID, n, omega, r), GEOM.radius)
        worst_shape = max(worst_shape, abs(mean - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_mean < 1e-9 and worst_slip < 1e-12 and worst_shape < 1e-10 and elapsed < 5.0
    _report(
        5,
        ok,
        f"cross-section mean vs u(t) max rel {worst_mean:.2e} (tol 1e-9), no-slip "
        f"{worst_slip:.2e} (tol 1e-12), shape mean dev {worst_shape:.2e} "
        f"(tol 1e-10, n=1..12), {elapsed:.2f} s (budget 5 s)",
    )


def _first_peak_delta(t, pbs_values, ana_values, half_s=0.6):
    """First-peak time difference via parabola vertices over a common window.

    Both peaks sit on flat crests where the counting noise (correlation time
    about 0.3 s) makes a raw argmax wander. Fitting each series over the same
    window, centered on the noise-free analytical argmax and wide enough to
    span a few correlation times, cancels the crest-shape bias in the
    difference and leaves only the noise response of the vertex.
    """
    half = int(round(half_s / (t[1] - t[0])))
    i = int(np.argmax(ana_values))
    lo, hi = max(i - half, 0), min(i + half + 1, t.size)
    w = t[lo:hi] - t[i]
    vertices = []
    for v in (ana_values, pbs_values):
        c = np.polyfit(w, v[lo:hi], 2)
        if c[0] < 0.0:
            vertices.append(float(np.clip(-c[1] / (2.0 * c[0]), w[0], w[-1])))
        else:
            vertices.append(float(w[int(np.argmax(v[lo:hi]))]))
    return abs(vertices[1] - vertices[0])


def _desk_scale_agreement(config_text):
    scenario = load_scenario(config_text)
    cfg = PbsConfig(
        n_particles=50_000, dt=5e-4, duration=10.0, seed=12345, sample_interval=0.01
    )
    result = run_pbs(scenario, cfg)
    analytical = cir_timeseries(scenario, pbs_time_grid(cfg))
    p_inf = scenario.p_inf
    p = np.clip(analytical.values * p_inf, 0.0, 1.0)
    se_mean = float(np.mean(np.sqrt(p * (1.0 - p) / cfg.n_particles) / p_inf))
    rmse = compare_series(result.series, analytical).rmse
    peak = _first_peak_delta(result.series.t, result.series.values, analytical.values)
    return rmse, 3.0 * se_mean, peak


def test_criterion_6_desk_scale_simulation_agreement():
    t0 = time.perf_counter()
    rmse_s, tol_s, peak_s = _desk_scale_agreement(
        "[waveform]\npreset = sinusoidal\nfrequency = 0.5\nmean_velocity = 1e-4\n"
    )
    rmse_p, tol_p, peak_p = _desk_scale_agreement(
        "[waveform]\npreset = physiological\nmean_velocity = 2e-4\n"
    )
    elapsed = time.perf_counter() - t0
    ok = (
        rmse_s < tol_s
        and rmse_p < tol_p
        and peak_s <= 0.05
        and peak_p <= 0.05
        and elapsed < 1200.0
    )
    _report(
        6,
        ok,
        f"sinusoidal rmse {rmse_s:.4f} (tol {tol_s:.4f}), peak dt {peak_s * 1e3:.0f} ms; "
        f"physiological rmse {rmse_p:.4f} (tol {tol_p:.4f}), peak dt {peak_p * 1e3:.0f} ms "
        f"(tol 50 ms); {elapsed:.0f} s",
    )


def _rmse_vs_steady(scenario, t_lo=2.0, t_hi=20.0):
    grid = np.linspace(0.01, 20.0, 2000)
    a = cir_timeseries(scenario, grid).window(t_lo, t_hi)
    s = steady_flow_reference(scenario, grid).window(t_lo, t_hi)
    return compare_series(a, s).rmse


def test_criterion_7_frequency_convergence():
    t0 = time.perf_counter()
    rmse = [
        _rmse_vs_steady(
            load_scenario(f"[waveform]\npreset = sinusoidal\nfrequency = {f}\n")
        )
        for f in (0.5, 2.0, 8.0)
    ]
    elapsed = time.perf_counter() - t0
    ok = rmse[0] > rmse[1] > rmse[2] and rmse[2] < 0.25 * rmse[0] and elapsed < 5.0
    _report(
        7,
        ok,
        f"deviation from constant-flow model at f = 0.5/2/8 Hz: "
        f"{rmse[0]:.5f} > {rmse[1]:.5f} > {rmse[2]:.5f}, ratio "
        f"{rmse[2] / rmse[0]:.3f} (tol < 0.25), {elapsed:.1f} s (budget 5 s)",
    )


def test_criterion_8_diffusion_damping():
    t0 = time.perf_counter()
    rmse = [
        _rmse_vs_steady(
            load_scenario(
                "[waveform]\npreset = physiological\nmean_velocity = 2e-4\n"
                f"[transport]\ndiffusion = {d}\n"
            )
        )
        for d in (2.5e-9, 5e-9, 10e-9)
    ]
    elapsed = time.perf_counter() - t0
    ok = rmse[0] > rmse[1] > rmse[2] and elapsed < 5.0
    _report(
        8,
        ok,
        f"pulsation signature vs D = 2.5/5/10 e-9: {rmse[0]:.5f} > {rmse[1]:.5f} > "
        f"{rmse[2]:.5f} (strictly decreasing), {elapsed:.1f} s (budget 5 s)",
    )


def _worker_outputs(threads, out_path):
    script = textwrap.dedent(
        """
        import sys
        import numpy as np
        from pulseloop import PbsConfig, load_scenario, run_pbs

        scenario = load_scenario("[waveform]\\npreset = physiological\\nmean_velocity = 2e-4\\n")
        config = PbsConfig(
            n_particles=4000, dt=1e-3, duration=0.5, seed=2024,
            sample_interval=0.05, backend="numba",
        )
        result = run_pbs(scenario, config)
        np.savez(sys.argv[1], counts=result.counts, sumcos=result.sumcos, sumsin=result.sumsin)
        """
    )
    env = dict(os.environ, NUMBA_NUM_THREADS=str(threads))
    subprocess.run(
        [sys.executable, "-c", script, str(out_path)],
        check=True,
        env=env,
        capture_output=True,
    )
    return np.load(str(out_path))


def test_criterion_9_simulation_invariant_suite(tmp_path):
    t0 = time.perf_counter()
    # conservation + containment over runs of different lengths
    scenario = load_scenario("[waveform]\npreset = physiological\nmean_velocity = 2e-4\n")
    contained = True
    conserved = True
    for duration in (0.2, 0.5):
        cfg = PbsConfig(
            n_particles=10_000, dt=1e-3, duration=duration, seed=5, sample_interval=0.1
        )
        res = run_pbs(scenario, cfg)
        conserved &= res.stats["per_sample_particle_count"] == [10_000] * cfg.n_samples
        conserved &= bool(np.all(res.counts <= 10_000))

    cfg = PbsConfig(n_particles=10_000, dt=1e-3, duration=0.3, seed=5, sample_interval=0.1)
    tables = build_velocity_tables(
        scenario.waveform, scenario.geometry, scenario.fluid, cfg.n_steps, cfg.dt
    )
    x, y, z = init_positions(cfg.n_particles, scenario.geometry.radius, cfg.seed)
    get_simulate(resolve_backend(None))(
        x,
        y,
        z,
        *tables,
        scenario.waveform.mean_velocity,
        cfg.dt,
        scenario.transport.molecular_diffusion,
        scenario.geometry.radius,
        scenario.geometry.loop_length,
        derive_key(cfg.seed, STREAM_STEP),
        cfg.sample_every,
        receiver_windows(scenario.receiver, scenario.geometry.loop_length),
    )
    contained &= bool(np.all(np.hypot(y, z) <= scenario.geometry.radius))
    contained &= bool(np.all((x >= 0.0) & (x < scenario.geometry.loop_length)))

    # worker-count independence (parallel backend only; the NumPy fallback
    # is a single serial path by construction)
    if has_numba():
        one = _worker_outputs(1, tmp_path / "w1.npz")
        four = _worker_outputs(4, tmp_path / "w4.npz")
        workers_identical = (
            np.array_equal(one["counts"], four["counts"])
            and np.array_equal(one["sumcos"], four["sumcos"])
            and np.array_equal(one["sumsin"], four["sumsin"])
        )
        worker_note = "1 vs 4 workers bit-identical"
    else:
        workers_identical = True
        worker_note = "single-worker backend only (numba not installed)"

    # pure diffusion at zero mean flow: variance grows as 2*D*t
    zero = load_scenario("[waveform]\npreset = steady\nmean_velocity = 0\n")
    cfg0 = PbsConfig(n_particles=10_000, dt=1e-3, duration=2.0, seed=31, sample_interval=1.0)
    res0 = run_pbs(zero, cfg0)
    d = zero.transport.molecular_diffusion
    L = zero.geometry.loop_length
    var_dev = 0.0
    for i, t in enumerate(pbs_time_grid(cfg0)):
        got = circular_variance(res0.sumcos[i], res0.sumsin[i], cfg0.n_particles, L)
        var_dev = max(var_dev, abs(got - 2.0 * d * t) / (2.0 * d * t))

    elapsed = time.perf_counter() - t0
    ok = (
        conserved
        and contained
        and workers_identical
        and var_dev < 0.05
        and elapsed < 120.0
    )
    _report(
        9,
        ok,
        f"conservation {'ok' if conserved else 'VIOLATED'}, containment "
        f"{'ok' if contained else 'VIOLATED'}, {worker_note}, zero-flow variance dev "
        f"{var_dev:.3f} (tol 0.05), {elapsed:.0f} s (budget 120 s)",
    )
