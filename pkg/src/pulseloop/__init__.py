"""Time-variant dispersion channel model for closed-loop pulsatile flow.

The package has two halves that are meant to agree with each other:

* an analytical model (``dispersion``, ``cir``) giving closed-form moments of
  the axial marginal and the wrapped-normal impulse response of a loop
  channel, and
* a particle-based simulation (``pbs``) integrating the same transport
  problem in 3D with a counter-based RNG so runs are reproducible across
  backends and worker counts.

``scenario`` ties both to a small INI config format, ``cli`` exposes them as
the ``pulseloop`` command.
"""

from .bench import format_report, run_benchmark
from .backend import available_backends, has_numba, resolve_backend
from .cir import (
    ReceiverSpec,
    cir_timeseries,
    default_time_grid,
    received_signal,
    steady_flow_reference,
    validate_receiver,
    wrapped_pdf,
)
from .dispersion import (
    GaussianMoments,
    TransportParams,
    closed_form_moments,
    effective_diffusion,
    mean_displacement,
    moments_by_quadrature,
    variance,
)
from .errors import (
    BesselRangeError,
    ConfigError,
    DegenerateDistributionError,
    InvalidParameterError,
    NumericalError,
    PulseloopError,
    RegimeError,
    SweepAssertionError,
)
from .pbs import (
    PbsConfig,
    PbsResult,
    circular_mean_position,
    circular_variance,
    pbs_time_grid,
    run_pbs,
)
from .presets import PRESETS, get_preset
from .scenario import (
    Scenario,
    load_run_spec,
    load_scenario,
    make_scenario,
    run_experiment,
    run_sweep,
)
from .timeseries import ComparisonMetrics, TimeSeries, compare_series
from .waveform import (
    HarmonicSeries,
    eval_velocity,
    make_custom,
    make_physiological,
    make_pulsed,
    make_sinusoidal,
    make_steady,
    pulsed_waveform_ideal,
)
from .womersley import (
    ChannelGeometry,
    FluidProperties,
    RegimeReport,
    axial_velocity_3d,
    regime_check,
    shape_function,
    womersley_number,
)

__version__ = "0.1.0"

__all__ = [
    "BesselRangeError",
    "ChannelGeometry",
    "ComparisonMetrics",
    "ConfigError",
    "DegenerateDistributionError",
    "FluidProperties",
    "GaussianMoments",
    "HarmonicSeries",
    "InvalidParameterError",
    "NumericalError",
    "PRESETS",
    "PbsConfig",
    "PbsResult",
    "PulseloopError",
    "ReceiverSpec",
    "RegimeError",
    "RegimeReport",
    "Scenario",
    "SweepAssertionError",
    "TimeSeries",
    "TransportParams",
    "available_backends",
    "axial_velocity_3d",
    "cir_timeseries",
    "circular_mean_position",
    "circular_variance",
    "closed_form_moments",
    "compare_series",
    "default_time_grid",
    "effective_diffusion",
    "eval_velocity",
    "format_report",
    "get_preset",
    "has_numba",
    "load_run_spec",
    "load_scenario",
    "make_custom",
    "make_physiological",
    "make_pulsed",
    "make_scenario",
    "make_sinusoidal",
    "make_steady",
    "mean_displacement",
    "moments_by_quadrature",
    "pbs_time_grid",
    "pulsed_waveform_ideal",
    "received_signal",
    "regime_check",
    "resolve_backend",
    "run_benchmark",
    "run_experiment",
    "run_pbs",
    "run_sweep",
    "shape_function",
    "steady_flow_reference",
    "validate_receiver",
    "variance",
    "wrapped_pdf",
    "womersley_number",
]
