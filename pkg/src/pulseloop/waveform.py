"""Cross-sectionally averaged pulsatile velocity waveforms.

The 1D velocity model is a truncated harmonic series around a positive
temporal mean::

    u(t) = ubar * (1 + sum_n M_n * cos(n*omega*t + phi_n)),   omega = 2*pi*f

Three presets are provided: a single-harmonic sinusoid, a Fourier fit of a
rectangular (pulsed) waveform, and a 12-harmonic fit of a physiological
arterial pulse. The series may dip below zero for waveforms whose harmonic
amplitudes sum past unity (the physiological preset does); no clamping is
applied, downstream regime reporting flags the reversal instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "HarmonicSeries",
    "make_steady",
    "make_sinusoidal",
    "make_pulsed",
    "make_physiological",
    "make_custom",
    "eval_velocity",
    "pulsed_waveform_ideal",
    "min_velocity_factor",
]

# 12-harmonic fit of a carotid-type arterial pulse at f = 1.15 Hz.
# Amplitudes are relative to the mean velocity; phases in radians, kept
# verbatim as fitted (not renormalized into (-pi, pi]).
PHYSIO_FREQUENCY_HZ = 1.15
PHYSIO_AMPLITUDES = (
    0.548, 0.684, 0.373, 0.489, 0.352, 0.166,
    0.253, 0.135, 0.195, 0.134, 0.162, 0.190,
)
PHYSIO_PHASES = (
    -0.869, -1.826, -3.009, 3.137, 1.815, 1.944,
    1.252, 0.727, 0.287, -0.504, -0.605, -1.307,
)


@dataclass(frozen=True)
class HarmonicSeries:
    """Immutable harmonic description of the averaged axial velocity.

    Attributes
    ----------
    mean_velocity : float
        Temporal mean ubar in m/s. Strictly positive for all presets;
        zero is allowed only for the explicit no-flow diagnostic case.
    frequency : float
        Fundamental frequency f in Hz (> 0).
    amplitudes : tuple of float
        Relative amplitudes M_n for n = 1..N, each >= 0 and finite.
    phases : tuple of float
        Phases phi_n in radians, same length as ``amplitudes``.
    """

    mean_velocity: float
    frequency: float
    amplitudes: tuple[float, ...] = field(default=())
    phases: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean_velocity) or self.mean_velocity < 0.0:
            raise InvalidParameterError(
                f"mean velocity must be finite and >= 0, got {self.mean_velocity!r}"
            )
        if not math.isfinite(self.frequency) or self.frequency <= 0.0:
            raise InvalidParameterError(
                f"frequency must be finite and > 0, got {self.frequency!r}"
            )
        if len(self.amplitudes) != len(self.phases):
            raise InvalidParameterError(
                f"{len(self.amplitudes)} amplitudes vs {len(self.phases)} phases"
            )
        for n, (m, p) in enumerate(zip(self.amplitudes, self.phases), start=1):
            if not math.isfinite(m) or m < 0.0:
                raise InvalidParameterError(f"amplitude M_{n} must be finite and >= 0, got {m!r}")
            if not math.isfinite(p):
                raise InvalidParameterError(f"phase phi_{n} must be finite, got {p!r}")
        object.__setattr__(self, "amplitudes", tuple(float(m) for m in self.amplitudes))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    @property
    def omega(self) -> float:
        """Fundamental angular frequency in rad/s."""
        return 2.0 * math.pi * self.frequency

    @property
    def n_harmonics(self) -> int:
        return len(self.amplitudes)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


def make_steady(mean_velocity: float, frequency: float = 1.0) -> HarmonicSeries:
    """Constant flow at ``mean_velocity``; the frequency is a placeholder."""
    return HarmonicSeries(mean_velocity, frequency)


def _require_positive(name: str, value: float) -> float:
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
    return float(value)


def make_sinusoidal(mean_velocity: float, amplitude: float, frequency: float) -> HarmonicSeries:
    """Single-harmonic waveform u(t) = ubar * (1 + A*sin(2*pi*f*t)).

    Realized as M_1 = A, phi_1 = -pi/2 so the series convention above
    reproduces the sine exactly.
    """
    _require_positive("mean velocity", mean_velocity)
    _require_positive("frequency", frequency)
    if not math.isfinite(amplitude) or amplitude < 0.0:
        raise InvalidParameterError(f"amplitude must be finite and >= 0, got {amplitude!r}")
    if amplitude == 0.0:
        return HarmonicSeries(mean_velocity, frequency)
    return HarmonicSeries(mean_velocity, frequency, (float(amplitude),), (-math.pi / 2.0,))


def pulsed_coefficients(duty: float, n: int) -> tuple[float, float]:
    """Fourier cosine/sine coefficients (A_n, B_n) of the unit-mean rectangle."""
    arg = math.pi * n * duty
    a_n = math.sin(2.0 * arg) / arg
    b_n = (1.0 - math.cos(2.0 * arg)) / arg
    return a_n, b_n


def make_pulsed(
    mean_velocity: float,
    duty: float,
    frequency: float,
    n_harmonics: int = 50,
) -> HarmonicSeries:
    """Truncated Fourier fit of a rectangular waveform with duty cycle ``duty``.

    The ideal waveform is ubar/duty during the first ``duty`` fraction of each
    period and zero otherwise, so its temporal mean is exactly ``ubar``. Each
    harmonic is converted to amplitude/phase form via
    M_n = sqrt(A_n^2 + B_n^2), phi_n = atan2(-B_n, A_n).
    """
    _require_positive("mean velocity", mean_velocity)
    _require_positive("frequency", frequency)
    if not 0.0 < duty < 1.0:
        raise InvalidParameterError(f"duty cycle must lie in (0, 1), got {duty!r}")
    if n_harmonics < 1:
        raise InvalidParameterError(f"harmonic count must be >= 1, got {n_harmonics!r}")
    amps = []
    phases = []
    for n in range(1, n_harmonics + 1):
        a_n, b_n = pulsed_coefficients(duty, n)
        amps.append(math.hypot(a_n, b_n))
        phases.append(math.atan2(-b_n, a_n))
    return HarmonicSeries(mean_velocity, frequency, tuple(amps), tuple(phases))


def make_physiological(mean_velocity: float) -> HarmonicSeries:
    """12-harmonic arterial waveform at f = 1.15 Hz, scaled to ``mean_velocity``."""
    _require_positive("mean velocity", mean_velocity)
    return HarmonicSeries(mean_velocity, PHYSIO_FREQUENCY_HZ, PHYSIO_AMPLITUDES, PHYSIO_PHASES)


def make_custom(
    mean_velocity: float,
    frequency: float,
    harmonics: list[tuple[float, float]],
) -> HarmonicSeries:
    """Series from explicit (M_n, phi_n) pairs; entry k is harmonic n = k + 1."""
    _require_positive("frequency", frequency)
    amps = tuple(m for m, _ in harmonics)
    phases = tuple(p for _, p in harmonics)
    return HarmonicSeries(mean_velocity, frequency, amps, phases)


def eval_velocity(series: HarmonicSeries, t):
    """Averaged axial velocity u(t) in m/s; ``t`` may be a scalar or array."""
    t_arr = np.asarray(t, dtype=float)
    total = np.ones_like(t_arr)
    omega = series.omega
    for n, (m_n, phi_n) in enumerate(zip(series.amplitudes, series.phases), start=1):
        total = total + m_n * np.cos(n * omega * t_arr + phi_n)
    out = series.mean_velocity * total
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def pulsed_waveform_ideal(mean_velocity: float, duty: float, frequency: float, t):
    """Exact rectangular waveform the pulsed preset approximates."""
    frac = np.mod(np.asarray(t, dtype=float) * frequency, 1.0)
    out = np.where(frac < duty, mean_velocity / duty, 0.0)
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def min_velocity_factor(series: HarmonicSeries, samples: int = 4096) -> float:
    """Minimum of 1 + sum_n M_n cos(...) over one period on a fine grid.

    Negative values mean the waveform reverses direction at some point in
    the cycle. Steady series trivially return 1.
    """
    if series.n_harmonics == 0:
        return 1.0
    t = np.linspace(0.0, series.period, samples, endpoint=False)
    factor = np.ones_like(t)
    for n, (m_n, phi_n) in enumerate(zip(series.amplitudes, series.phases), start=1):
        factor += m_n * np.cos(n * series.omega * t + phi_n)
    return float(factor.min())
