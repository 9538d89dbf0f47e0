"""Effective 1D transport coefficients and closed-form displacement moments.

After cross-sectional averaging, axial transport reduces to a 1D
advection-diffusion process with time-variant effective diffusivity::

    D1(t) = D + (R^2 / (48 D)) * u(t)^2

and a Gaussian axial density whose moments are the running integrals::

    mu(t)      = integral_0^t u(s) ds
    sigma2(t)  = 2 * integral_0^t D1(s) ds

For the harmonic velocity series both integrals have closed forms: the mean
integrates term by term, and the variance expands u(t)^2 into self terms
(Q_n), linear terms (S_n), and cross terms (P_mn) of elementary sine
antiderivatives. ``moments_by_quadrature`` evaluates the defining integrals
directly with adaptive composite Gauss-Legendre panels and serves as the
independent oracle for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalError
from .waveform import HarmonicSeries, eval_velocity
from .womersley import ChannelGeometry

__all__ = [
    "TransportParams",
    "GaussianMoments",
    "effective_diffusion",
    "mean_displacement",
    "variance",
    "closed_form_moments",
    "moments_by_quadrature",
]

# Keep raw phases n*omega*t below this many turns before reducing mod 2*pi;
# below the limit the direct evaluation is accurate to ~1e-9 rad already.
PHASE_WRAP_TURNS = 1.0e4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TransportParams:
    """Molecular diffusion coefficient D in m^2/s."""

    molecular_diffusion: float

    def __post_init__(self) -> None:
        d = self.molecular_diffusion
        if not math.isfinite(d) or d <= 0.0:
            raise InvalidParameterError(f"diffusion coefficient must be finite and > 0, got {d!r}")


@dataclass(frozen=True)
class GaussianMoments:
    """Axial mean and variance of the dispersing pulse at time t."""

    t: float
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise InvalidParameterError(f"variance must be >= 0, got {self.variance!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def effective_diffusion(
    series: HarmonicSeries,
    geom: ChannelGeometry,
    transport: TransportParams,
    t,
):
    """Time-variant effective diffusivity D1(t) in m^2/s (scalar or array)."""
    d = transport.molecular_diffusion
    u = eval_velocity(series, t)
    return d + (geom.radius**2 / (48.0 * d)) * np.square(u)


def _sin_at(k_omega: float, t: np.ndarray, phi: float) -> np.ndarray:
    """sin(k_omega * t + phi) with phase reduction for very large arguments."""
    arg = k_omega * t
    limit = 2.0 * math.pi * PHASE_WRAP_TURNS
    arg = np.where(np.abs(arg) > limit, np.mod(arg, 2.0 * math.pi), arg)
    return np.sin(arg + phi)


def mean_displacement(series: HarmonicSeries, t):
    """Closed-form mu(t) in m; ``t`` may be a scalar or array, t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise InvalidParameterError("time must be >= 0")
    omega = series.omega
    acc = np.array(t_arr, dtype=float)
    for n, (m_n, phi_n) in enumerate(zip(series.amplitudes, series.phases), start=1):
        if m_n == 0.0:
            continue
        acc = acc + (m_n / (n * omega)) * (_sin_at(n * omega, t_arr, phi_n) - math.sin(phi_n))
    out = series.mean_velocity * acc
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def variance(
    series: HarmonicSeries,
    geom: ChannelGeometry,
    transport: TransportParams,
    t,
):
    """Closed-form sigma^2(t) in m^2, including all harmonic cross terms."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise InvalidParameterError("time must be >= 0")
    d = transport.molecular_diffusion
    omega = series.omega
    amps = series.amplitudes
    phases = series.phases

    bracket = np.array(t_arr, dtype=float)
    for n, (m_n, phi_n) in enumerate(zip(amps, phases), start=1):
        if m_n == 0.0:
            continue
        s_n = (_sin_at(n * omega, t_arr, phi_n) - math.sin(phi_n)) / (n * omega)
        q_n = 0.5 * t_arr + (
            _sin_at(2.0 * n * omega, t_arr, 2.0 * phi_n) - math.sin(2.0 * phi_n)
        ) / (4.0 * n * omega)
        bracket = bracket + 2.0 * m_n * s_n + m_n * m_n * q_n
    for m in range(1, len(amps) + 1):
        if amps[m - 1] == 0.0:
            continue
        for n in range(m + 1, len(amps) + 1):
            if amps[n - 1] == 0.0:
                continue
            dphi = phases[n - 1] - phases[m - 1]
            sphi = phases[n - 1] + phases[m - 1]
            p_mn = 0.5 * (
                (_sin_at((n - m) * omega, t_arr, dphi) - math.sin(dphi)) / ((n - m) * omega)
                + (_sin_at((n + m) * omega, t_arr, sphi) - math.sin(sphi)) / ((n + m) * omega)
            )
            bracket = bracket + 2.0 * amps[m - 1] * amps[n - 1] * p_mn

    out = 2.0 * d * t_arr + (geom.radius**2 * series.mean_velocity**2 / (24.0 * d)) * bracket
    return float(out) if np.isscalar(t) or out.ndim == 0 else out


def closed_form_moments(
    series: HarmonicSeries,
    geom: ChannelGeometry,
    transport: TransportParams,
    t: float,
) -> GaussianMoments:
    return GaussianMoments(
        t=float(t),
        mean=mean_displacement(series, t),
        variance=variance(series, geom, transport, t),
    )


def _gl_panels(f, a: float, b: float, n_panels: int) -> float:
    """Composite 16-point Gauss-Legendre integral of vectorized ``f`` on [a, b]."""
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    nodes = mid + half * _GL_NODES[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return float(half * np.sum(vals @ _GL_WEIGHTS))


def moments_by_quadrature(
    series: HarmonicSeries,
    geom: ChannelGeometry,
    transport: TransportParams,
    t: float,
    rel_tol: float = 1e-14,
    max_refinements: int = 10,
) -> GaussianMoments:
    """Moments from direct quadrature of the defining integrals (oracle path).

    Composite Gauss-Legendre with at least one panel per wavelength of the
    fastest integrand component (2*N*f for the squared velocity), doubled
    until two successive refinements agree within ``rel_tol`` times the
    integrand scale times t.
    """
    if t < 0.0:
        raise InvalidParameterError("time must be >= 0")
    if t == 0.0:
        return GaussianMoments(t=0.0, mean=0.0, variance=0.0)
    d = transport.molecular_diffusion
    shear = geom.radius**2 / (48.0 * d)

    def d1(s: np.ndarray) -> np.ndarray:
        return d + shear * np.square(eval_velocity(series, s))

    def u(s: np.ndarray) -> np.ndarray:
        return np.asarray(eval_velocity(series, s), dtype=float)

    n_h = series.n_harmonics
    u_peak = series.mean_velocity * (1.0 + sum(series.amplitudes))
    scale_mean = max(u_peak, 1e-300)
    scale_var = 2.0 * (d + shear * u_peak**2)
    f_max = 2.0 * max(n_h, 1) * series.frequency
    n_panels = max(4, math.ceil(f_max * t))

    mean_prev = _gl_panels(u, 0.0, t, n_panels)
    var_prev = 2.0 * _gl_panels(d1, 0.0, t, n_panels)
    for _ in range(max_refinements):
        n_panels *= 2
        mean_new = _gl_panels(u, 0.0, t, n_panels)
        var_new = 2.0 * _gl_panels(d1, 0.0, t, n_panels)
        d_mean = abs(mean_new - mean_prev)
        d_var = abs(var_new - var_prev)
        if d_mean <= rel_tol * scale_mean * t and d_var <= rel_tol * scale_var * t:
            return GaussianMoments(t=float(t), mean=mean_new, variance=var_new)
        mean_prev, var_prev = mean_new, var_new
    raise NumericalError(
        "moment quadrature did not converge: "
        f"mean delta {d_mean:.3e} (tol {rel_tol * scale_mean * t:.3e}), "
        f"variance delta {d_var:.3e} (tol {rel_tol * scale_var * t:.3e}) "
        f"at {n_panels} panels"
    )
