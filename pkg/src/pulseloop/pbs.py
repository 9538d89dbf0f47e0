"""3D particle-based Monte Carlo simulation of transport in the closed loop.

Protocol per step of size dt, for every particle independently:

1. advect axially by u(r, t) * dt, with u evaluated at the pre-step radius
   from the Womersley field (harmonic radial profiles come from a lookup
   table, see below);
2. add independent Gaussian increments N(0, 2*D*dt) along x, y, and z;
3. reflect specularly off the cylinder wall (r' = 2R - r for overshoots up
   to one radius; larger overshoots are resampled up to 10 times and then
   clamped to the wall, with warning counters);
4. wrap x into [0, L) (flow reversal can push particles below zero).

Particles are released at x = 0, uniformly over the cross-section. The
received signal counts particles inside the receiver window at a fixed
sampling cadence and normalizes by N_p and the equilibrium fraction.

Performance: the only expensive per-step quantity, the harmonic part of
u(r, t), factors into radial tables Re/-Im{ubar*M_n*Psi_n(r)} on a 4096-point
grid (linear interpolation) combined with per-step cos/sin phase factors, so
no Bessel evaluation happens in the hot loop.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .backend import get_simulate, resolve_backend
from .cir import ReceiverSpec, validate_receiver
from .errors import InvalidParameterError, RegimeError
from .rng import STREAM_STEP, derive_key, init_positions
from .timeseries import TimeSeries
from .waveform import HarmonicSeries
from .womersley import ChannelGeometry, FluidProperties, shape_function

__all__ = [
    "PbsConfig",
    "PbsResult",
    "run_pbs",
    "pbs_time_grid",
    "reflect_wall",
    "receiver_windows",
    "circular_mean_position",
    "circular_variance",
    "RADIAL_GRID_POINTS",
]

RADIAL_GRID_POINTS = 4096


@dataclass(frozen=True)
class PbsConfig:
    """Simulation controls: ensemble size, step, duration, seed, cadence.

    ``duration`` and ``sample_interval`` must be integer multiples of ``dt``
    so sampling lands exactly on step boundaries. ``backend`` is "numba",
    "numpy", or None for environment/default resolution.
    """

    n_particles: int
    dt: float
    duration: float
    seed: int
    sample_interval: float = 0.01
    backend: str | None = None

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise InvalidParameterError(f"particle count must be >= 1, got {self.n_particles!r}")
        if not math.isfinite(self.dt) or self.dt <= 0.0:
            raise InvalidParameterError(f"time step must be finite and > 0, got {self.dt!r}")
        if self.sample_interval < self.dt:
            raise InvalidParameterError(
                f"sample interval {self.sample_interval!r} must be >= dt {self.dt!r}"
            )
        if self.duration < self.sample_interval:
            raise InvalidParameterError(
                f"duration {self.duration!r} must cover one sample interval "
                f"{self.sample_interval!r}"
            )
        for name, value in (("sample_interval", self.sample_interval), ("duration", self.duration)):
            ratio = value / self.dt
            if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
                raise InvalidParameterError(
                    f"{name} ({value!r}) must be an integer multiple of dt ({self.dt!r})"
                )

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def sample_every(self) -> int:
        return int(round(self.sample_interval / self.dt))

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.sample_every


@dataclass(frozen=True)
class PbsResult:
    """Normalized received series plus raw counts, diagnostics, and stats."""

    series: TimeSeries
    counts: np.ndarray
    sumcos: np.ndarray
    sumsin: np.ndarray
    stats: dict


def pbs_time_grid(config: PbsConfig) -> np.ndarray:
    """Sample times (0, duration]: one point per sample interval."""
    return (np.arange(config.n_samples, dtype=float) + 1.0) * (
        config.sample_every * config.dt
    )


def receiver_windows(receiver: ReceiverSpec, loop_length: float):
    """Half-open interval(s) [lo, hi) on [0, L) covering the receiver window.

    Windows straddling x = 0 split in two; otherwise the second interval is
    empty (0, 0). Half-open bounds count every particle exactly once even
    when the window covers the full loop.
    """
    validate_receiver(receiver, loop_length)
    a = math.fmod(receiver.center - 0.5 * receiver.width, loop_length)
    if a < 0.0:
        a += loop_length
    b = a + receiver.width
    if b <= loop_length:
        return (a, b, 0.0, 0.0)
    return (a, loop_length, 0.0, b - loop_length)


def reflect_wall(y, z, radius: float):
    """Specular wall reflection r -> 2R - r at fixed angle, vectorized.

    Only defined for overshoots up to one radius (r <= 2R); kernels resolve
    rarer proposals by resampling the diffusive increment. Positions already
    inside are returned unchanged.
    """
    y_arr = np.asarray(y, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    r = np.hypot(y_arr, z_arr)
    if np.any(r > 2.0 * radius):
        raise InvalidParameterError(
            "reflection is specular only up to r = 2R; larger overshoots are resampled"
        )
    scale = np.where(r > radius, (2.0 * radius - r) / np.where(r > 0.0, r, 1.0), 1.0)
    out_y = y_arr * scale
    out_z = z_arr * scale
    if np.isscalar(y):
        return float(out_y), float(out_z)
    return out_y, out_z


def build_velocity_tables(
    series: HarmonicSeries,
    geom: ChannelGeometry,
    fluid: FluidProperties,
    n_steps: int,
    dt: float,
    grid_points: int = RADIAL_GRID_POINTS,
):
    """Radial harmonic tables and per-step phase factors for the kernels.

    Returns (harm_re, harm_im_neg, phase_cos, phase_sin) with
    harm_re[g, n] = Re{ubar*M_n*Psi_n(r_g)}, harm_im_neg[g, n] the negated
    imaginary part, and phase_cos/sin[k, n] = cos/sin(n*omega*k*dt + phi_n),
    so that the harmonic velocity is harm_re*cos + harm_im_neg*sin summed
    over n.
    """
    n_h = series.n_harmonics
    r_grid = np.linspace(0.0, geom.radius, grid_points)
    harm_re = np.empty((grid_points, n_h), dtype=np.float64)
    harm_im_neg = np.empty((grid_points, n_h), dtype=np.float64)
    omega = series.omega
    for n in range(1, n_h + 1):
        psi = shape_function(geom, fluid, n, omega, r_grid)
        amp = series.mean_velocity * series.amplitudes[n - 1]
        harm_re[:, n - 1] = amp * psi.real
        harm_im_neg[:, n - 1] = -amp * psi.imag
    t_k = np.arange(n_steps, dtype=np.float64) * dt
    theta = np.outer(t_k, omega * np.arange(1, n_h + 1)) + np.asarray(series.phases)
    return harm_re, harm_im_neg, np.cos(theta), np.sin(theta)


def run_pbs(scenario, config: PbsConfig) -> PbsResult:
    """Full simulation run; deterministic given (scenario, config).

    ``scenario`` provides waveform, geometry, fluid, transport, receiver,
    and an attached regime report (see ``scenario.Scenario``). Runs with a
    hard regime failure are rejected; advisories are allowed and recorded.
    """
    report = getattr(scenario, "regime", None)
    if report is not None and report.hard_fail:
        raise RegimeError(f"regime check failed: {report.verdicts}")
    geom = scenario.geometry
    transport = scenario.transport
    diffusion = transport.molecular_diffusion
    warnings: list[str] = []
    step_rms = math.sqrt(2.0 * diffusion * config.dt)
    if step_rms > geom.radius / 10.0:
        warnings.append(
            f"diffusive step rms {step_rms:.3g} m exceeds R/10; wall handling "
            "will rely on reflection/resampling more than intended"
        )

    backend = resolve_backend(config.backend)
    simulate = get_simulate(backend)
    harm_re, harm_im_neg, phase_cos, phase_sin = build_velocity_tables(
        scenario.waveform, geom, scenario.fluid, config.n_steps, config.dt
    )
    x, y, z = init_positions(config.n_particles, geom.radius, config.seed)
    step_key = derive_key(config.seed, STREAM_STEP)
    rx = receiver_windows(scenario.receiver, geom.loop_length)

    t0 = time.perf_counter()
    counts, sumcos, sumsin, n_resampled, n_clamped = simulate(
        x,
        y,
        z,
        harm_re,
        harm_im_neg,
        phase_cos,
        phase_sin,
        scenario.waveform.mean_velocity,
        config.dt,
        diffusion,
        geom.radius,
        geom.loop_length,
        step_key,
        config.sample_every,
        rx,
    )
    elapsed = time.perf_counter() - t0

    p_inf = scenario.receiver.width / geom.loop_length
    t_grid = pbs_time_grid(config)
    values = counts / (config.n_particles * p_inf)
    series = TimeSeries("pbs", t_grid, values)
    stats = {
        "seed": config.seed,
        "backend": backend,
        "n_particles": config.n_particles,
        "dt_s": config.dt,
        "duration_s": config.duration,
        "sample_interval_s": config.sample_every * config.dt,
        "n_steps": config.n_steps,
        "per_sample_particle_count": [int(x.size)] * config.n_samples,
        "warnings": {
            "messages": warnings,
            "wall_resampled": int(n_resampled),
            "wall_clamped": int(n_clamped),
        },
        "elapsed_kernel_s": elapsed,
    }
    return PbsResult(series=series, counts=counts, sumcos=sumcos, sumsin=sumsin, stats=stats)


def circular_mean_position(sumcos: float, sumsin: float, loop_length: float) -> float:
    """Mean axial position on the loop from circular moment sums, in [0, L)."""
    ang = math.atan2(sumsin, sumcos)
    return (ang / (2.0 * math.pi)) % 1.0 * loop_length


def circular_variance(
    sumcos: float, sumsin: float, n: int, loop_length: float
) -> float:
    """Axial variance estimate consistent with a wrapped normal density.

    For a wrapped normal the first circular moment has modulus
    exp(-sigma_a^2 / 2) with sigma_a = 2*pi*sigma/L, so sigma^2 follows from
    -2*ln|m1|. Useful while the density is not yet fully uniform.
    """
    r_bar = math.hypot(sumcos / n, sumsin / n)
    if r_bar <= 0.0:
        raise InvalidParameterError("circular moment vanished; variance is unidentifiable")
    sigma_a2 = -2.0 * math.log(r_bar)
    return sigma_a2 * (loop_length / (2.0 * math.pi)) ** 2
