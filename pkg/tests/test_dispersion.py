"""Closed-form displacement moments against direct quadrature and identities."""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pulseloop import InvalidParameterError
from pulseloop.dispersion import (
    GaussianMoments,
    TransportParams,
    closed_form_moments,
    effective_diffusion,
    mean_displacement,
    moments_by_quadrature,
    variance,
)
from pulseloop.waveform import eval_velocity, make_custom, make_sinusoidal, make_steady
from pulseloop.womersley import ChannelGeometry

# quadrature oracle outputs, frozen: (preset, t, mean, variance)
FROZEN_MOMENTS = [
    ("sinusoidal", 0.013, 1.313271384125931e-06, 1.3276400709164547e-10),
    ("sinusoidal", 0.49, 6.441557655183426e-05, 5.078815073612789e-09),
    ("sinusoidal", 3.7, 0.00037656060147130306, 3.78984651453421e-08),
    ("sinusoidal", 20.0, 0.002, 2.046875e-07),
    ("pulsed", 0.013, 5.125045514275258e-06, 1.7371706348989463e-10),
    ("pulsed", 0.49, 0.0001990460844316033, 6.95712440820125e-09),
    ("pulsed", 3.7, 0.00039898658235364316, 4.111943067458861e-08),
    ("pulsed", 20.0, 0.0020000000000000005, 2.2062235533308514e-07),
    ("physiological", 0.013, 2.0364002145717665e-06, 1.3668240368345618e-10),
    ("physiological", 0.49, 0.00011603410328551121, 5.9696678200829955e-09),
    ("physiological", 3.7, 0.0007790795625238707, 4.30281520149347e-08),
    ("physiological", 20.0, 0.004000000000000006, 2.291535750000001e-07),
]


def test_transport_params_validation():
    with pytest.raises(InvalidParameterError):
        TransportParams(0.0)
    with pytest.raises(InvalidParameterError):
        TransportParams(-5e-9)
    with pytest.raises(InvalidParameterError):
        GaussianMoments(t=1.0, mean=0.0, variance=-1e-12)


def test_effective_diffusion_values(geometry, transport):
    steady = make_steady(1e-4)
    d1 = effective_diffusion(steady, geometry, transport, 0.0)
    # D + R^2 u^2 / (48 D) with the default parameters
    assert d1 == pytest.approx(5.104166666666667e-09, rel=1e-14)
    zero = effective_diffusion(make_steady(0.0), geometry, transport, 0.0)
    assert zero == transport.molecular_diffusion


@pytest.mark.parametrize("name,t,mean_ref,var_ref", FROZEN_MOMENTS)
def test_closed_form_matches_frozen_oracle(
    geometry, transport, preset_waveforms, name, t, mean_ref, var_ref
):
    series = preset_waveforms[name]
    assert mean_displacement(series, t) == pytest.approx(mean_ref, rel=1e-11)
    assert variance(series, geometry, transport, t) == pytest.approx(var_ref, rel=1e-11)


def test_closed_form_matches_live_quadrature(geometry, transport, preset_waveforms):
    times = np.logspace(-3, math.log10(20.0), 8)
    for series in preset_waveforms.values():
        for t in times:
            q = moments_by_quadrature(series, geometry, transport, float(t))
            c = closed_form_moments(series, geometry, transport, float(t))
            assert c.mean == pytest.approx(q.mean, rel=1e-12)
            assert c.variance == pytest.approx(q.variance, rel=1e-12)


def test_steady_reduction_is_exact(geometry, transport):
    # no harmonics: sigma^2(t) = 2*(D + ubar^2 R^2/(48 D))*t identically
    series = make_steady(1e-4)
    d1 = 5e-9 + (1e-4**2 * geometry.radius**2) / (48.0 * 5e-9)
    for t in (1e-3, 0.7, 5.0, 20.0):
        assert variance(series, geometry, transport, t) == pytest.approx(
            2.0 * d1 * t, rel=1e-12
        )
        assert mean_displacement(series, t) == pytest.approx(1e-4 * t, rel=1e-14)


def test_moments_at_zero_and_negative_time(geometry, transport, preset_waveforms):
    series = preset_waveforms["sinusoidal"]
    assert mean_displacement(series, 0.0) == 0.0
    assert variance(series, geometry, transport, 0.0) == 0.0
    q0 = moments_by_quadrature(series, geometry, transport, 0.0)
    assert q0.mean == 0.0 and q0.variance == 0.0
    with pytest.raises(InvalidParameterError):
        mean_displacement(series, -1.0)
    with pytest.raises(InvalidParameterError):
        variance(series, geometry, transport, -0.5)
    with pytest.raises(InvalidParameterError):
        moments_by_quadrature(series, geometry, transport, -0.1)


def test_derivatives_match_integrands(geometry, transport, preset_waveforms, rng):
    # d(mu)/dt = u(t) and d(sigma^2)/dt = 2*D1(t) by construction; central
    # differences with h small against the period but far from cancellation
    h = 1e-5
    for series in preset_waveforms.values():
        for t in rng.uniform(0.2, 18.0, size=10):
            fd_mean = (
                mean_displacement(series, t + h) - mean_displacement(series, t - h)
            ) / (2 * h)
            u = eval_velocity(series, float(t))
            assert fd_mean == pytest.approx(u, abs=2e-6 * series.mean_velocity)
            fd_var = (
                variance(series, geometry, transport, t + h)
                - variance(series, geometry, transport, t - h)
            ) / (2 * h)
            d1 = effective_diffusion(series, geometry, transport, float(t))
            assert fd_var == pytest.approx(2.0 * d1, rel=1e-5)


def test_variance_periodic_increment(geometry, transport, preset_waveforms):
    # over one full cycle the bracket grows by its time-average rate:
    # sigma^2(t+T) - sigma^2(t) = 2*(D + shear*ubar^2*(1 + sum M_n^2/2))*T
    for series in preset_waveforms.values():
        shear = geometry.radius**2 / (48.0 * transport.molecular_diffusion)
        msq = 1.0 + 0.5 * sum(m * m for m in series.amplitudes)
        rate = 2.0 * (transport.molecular_diffusion + shear * series.mean_velocity**2 * msq)
        T = series.period
        for t in (0.0, 0.37, 4.0):
            dv = variance(series, geometry, transport, t + T) - variance(
                series, geometry, transport, t
            )
            assert dv == pytest.approx(rate * T, rel=1e-10)


def test_mean_periodic_increment(preset_waveforms):
    for series in preset_waveforms.values():
        T = series.period
        for t in (0.0, 1.234):
            dm = mean_displacement(series, t + T) - mean_displacement(series, t)
            assert dm == pytest.approx(series.mean_velocity * T, rel=1e-10)


def test_vectorized_times_match_scalars(geometry, transport, preset_waveforms):
    series = preset_waveforms["physiological"]
    t = np.array([0.01, 0.5, 2.0, 19.0])
    means = mean_displacement(series, t)
    variances = variance(series, geometry, transport, t)
    for i, ti in enumerate(t):
        assert means[i] == mean_displacement(series, float(ti))
        assert variances[i] == variance(series, geometry, transport, float(ti))


@settings(
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
@given(
    ubar=st.floats(min_value=1e-5, max_value=5e-4),
    m1=st.floats(min_value=0.0, max_value=1.2),
    m2=st.floats(min_value=0.0, max_value=0.8),
    phi1=st.floats(min_value=-math.pi, max_value=math.pi),
    phi2=st.floats(min_value=-math.pi, max_value=math.pi),
    f=st.floats(min_value=0.1, max_value=8.0),
    t=st.floats(min_value=1e-3, max_value=20.0),
)
def test_variance_positive_growing_and_oracle_checked(
    geometry, transport, ubar, m1, m2, phi1, phi2, f, t
):
    series = make_custom(ubar, f, [(m1, phi1), (m2, phi2)])
    v1 = variance(series, geometry, transport, t)
    v2 = variance(series, geometry, transport, t * 1.5)
    assert 0.0 < v1 < v2
    q = moments_by_quadrature(series, geometry, transport, t)
    assert v1 == pytest.approx(q.variance, rel=1e-9)
    assert mean_displacement(series, t) == pytest.approx(
        q.mean, rel=1e-9, abs=1e-9 * ubar * t
    )


def test_large_time_phase_reduction(geometry, transport):
    # far beyond the phase-wrap threshold the sine arguments are reduced
    # mod 2*pi; the linear-in-t parts must still dominate exactly
    series = make_sinusoidal(1e-4, 0.5, 8.0)
    t = 1e7
    assert mean_displacement(series, t) == pytest.approx(1e-4 * t, rel=1e-9)
    shear = geometry.radius**2 / (48.0 * transport.molecular_diffusion)
    rate = 2.0 * (transport.molecular_diffusion + shear * 1e-8 * (1.0 + 0.125))
    assert variance(series, geometry, transport, t) == pytest.approx(rate * t, rel=1e-9)
