"""Scenario configuration, experiment orchestration, and parameter sweeps.

Config files are INI-style key/value sections::

    [geometry]   radius, loop_length            (m)
    [fluid]      density (kg/m^3), dynamic_viscosity (Pa*s)
    [transport]  diffusion                       (m^2/s)
    [waveform]   preset (required), mean_velocity, frequency, amplitude,
                 duty, n_harmonics, harmonics ("M1:phi1, M2:phi2, ...")
    [receiver]   center, width                   (m)
    [pbs]        particles, dt, duration, seed, sample_interval, backend
    [output]     grid_points, t_max, label

Every key except the waveform preset has a default (a small desk-scale
channel: R = 50 um, L = 1 mm, D = 5e-9 m^2/s, blood-like fluid, receiver of
0.1 mm at 0.3 mm). Unknown sections or keys are errors, as are invariant
violations; both report the offending key path.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

import numpy as np

from .cir import (
    DEFAULT_GRID_POINTS,
    DEFAULT_T_MAX,
    ReceiverSpec,
    cir_timeseries,
    default_time_grid,
    steady_flow_reference,
    validate_receiver,
)
from .dispersion import TransportParams
from .errors import ConfigError, InvalidParameterError, RegimeError, SweepAssertionError
from .pbs import PbsConfig, pbs_time_grid, run_pbs
from .timeseries import TimeSeries, compare_series
from .waveform import (
    HarmonicSeries,
    make_custom,
    make_physiological,
    make_pulsed,
    make_sinusoidal,
    make_steady,
)
from .womersley import ChannelGeometry, FluidProperties, RegimeReport, regime_check

__all__ = [
    "Scenario",
    "RunSpec",
    "OutputSpec",
    "make_scenario",
    "load_scenario",
    "load_run_spec",
    "run_experiment",
    "run_sweep",
    "SWEEP_ASSERTIONS",
    "DEFAULTS",
]

DEFAULTS = {
    "geometry": {"radius": 50e-6, "loop_length": 1e-3},
    "fluid": {"density": 1060.0, "dynamic_viscosity": 3e-3},
    "transport": {"diffusion": 5e-9},
    "waveform": {
        "mean_velocity": 1e-4,
        "frequency": 0.5,
        "amplitude": 0.5,
        "duty": 0.2,
        "n_harmonics": 50,
    },
    "receiver": {"center": 0.3e-3, "width": 0.1e-3},
    "pbs": {
        "particles": 50_000,
        "dt": 5e-4,
        "duration": 10.0,
        "seed": 12345,
        "sample_interval": 0.01,
    },
    "output": {"grid_points": DEFAULT_GRID_POINTS, "t_max": DEFAULT_T_MAX, "label": "scenario"},
}

_ALLOWED_KEYS = {
    "geometry": {"radius", "loop_length"},
    "fluid": {"density", "dynamic_viscosity"},
    "transport": {"diffusion"},
    "waveform": {
        "preset",
        "mean_velocity",
        "frequency",
        "amplitude",
        "duty",
        "n_harmonics",
        "harmonics",
    },
    "receiver": {"center", "width"},
    "pbs": {"particles", "dt", "duration", "seed", "sample_interval", "backend"},
    "output": {"grid_points", "t_max", "label"},
}

_WAVEFORM_KEYS_BY_PRESET = {
    "sinusoidal": {"preset", "mean_velocity", "frequency", "amplitude"},
    "pulsed": {"preset", "mean_velocity", "frequency", "duty", "n_harmonics"},
    "physiological": {"preset", "mean_velocity"},
    "steady": {"preset", "mean_velocity", "frequency"},
    "custom": {"preset", "mean_velocity", "frequency", "harmonics"},
}


@dataclass(frozen=True)
class Scenario:
    """Complete experiment description with its regime report attached."""

    geometry: ChannelGeometry
    fluid: FluidProperties
    transport: TransportParams
    waveform: HarmonicSeries
    receiver: ReceiverSpec
    label: str
    regime: RegimeReport

    @property
    def p_inf(self) -> float:
        """Equilibrium receiver fraction width/L used for normalization."""
        return self.receiver.width / self.geometry.loop_length

    def with_waveform(self, waveform: HarmonicSeries) -> "Scenario":
        return make_scenario(
            self.geometry, self.fluid, self.transport, waveform, self.receiver, self.label
        )

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "geometry": {
                "radius_m": self.geometry.radius,
                "loop_length_m": self.geometry.loop_length,
            },
            "fluid": {
                "density_kg_m3": self.fluid.density,
                "dynamic_viscosity_pa_s": self.fluid.dynamic_viscosity,
                "kinematic_viscosity_m2_s": self.fluid.kinematic_viscosity,
            },
            "transport": {"diffusion_m2_s": self.transport.molecular_diffusion},
            "waveform": {
                "mean_velocity_m_s": self.waveform.mean_velocity,
                "frequency_hz": self.waveform.frequency,
                "amplitudes": list(self.waveform.amplitudes),
                "phases_rad": list(self.waveform.phases),
            },
            "receiver": {"center_m": self.receiver.center, "width_m": self.receiver.width},
            "regime": self.regime.as_dict(),
        }


@dataclass(frozen=True)
class OutputSpec:
    grid_points: int
    t_max: float
    label: str


@dataclass(frozen=True)
class RunSpec:
    """Everything a CLI subcommand needs from one config file."""

    scenario: Scenario
    pbs: PbsConfig
    output: OutputSpec


def make_scenario(
    geometry: ChannelGeometry,
    fluid: FluidProperties,
    transport: TransportParams,
    waveform: HarmonicSeries,
    receiver: ReceiverSpec,
    label: str = "scenario",
) -> Scenario:
    """Assemble and validate a scenario; hard regime failures are rejected."""
    validate_receiver(receiver, geometry.loop_length)
    report = regime_check(waveform, geometry, fluid, transport.molecular_diffusion)
    if report.hard_fail:
        failed = [k for k, v in report.verdicts.items() if v == "fail"]
        raise RegimeError(f"dispersive-regime condition(s) failed: {', '.join(failed)}")
    return Scenario(geometry, fluid, transport, waveform, receiver, label, report)


def _parse(config_text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for section in parser.sections():
        if section not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _ALLOWED_KEYS[section]:
                raise ConfigError(f"unknown key: {section}.{key}")
    return parser


def _get_float(parser, section: str, key: str, default: float) -> float:
    raw = parser.get(section, key, fallback=None) if parser.has_section(section) else None
    if raw is None:
        return float(default)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: not a number: {raw!r}") from exc


def _get_int(parser, section: str, key: str, default: int) -> int:
    raw = parser.get(section, key, fallback=None) if parser.has_section(section) else None
    if raw is None:
        return int(default)
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: not an integer: {raw!r}") from exc


def _parse_harmonics(raw: str) -> list[tuple[float, float]]:
    pairs = []
    for i, item in enumerate(raw.split(","), start=1):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise ConfigError(
                f"waveform.harmonics entry {i}: expected 'M:phi', got {item!r}"
            )
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"waveform.harmonics entry {i}: not numeric: {item!r}") from exc
    if not pairs:
        raise ConfigError("waveform.harmonics: no harmonic pairs given")
    return pairs


def _build_waveform(parser) -> HarmonicSeries:
    if not parser.has_section("waveform") or not parser.has_option("waveform", "preset"):
        raise ConfigError(
            "waveform.preset is required (no default waveform is assumed); "
            "choose sinusoidal, pulsed, physiological, steady, or custom"
        )
    preset = parser.get("waveform", "preset").strip().lower()
    if preset not in _WAVEFORM_KEYS_BY_PRESET:
        raise ConfigError(
            f"waveform.preset: unknown preset {preset!r}; "
            "choose sinusoidal, pulsed, physiological, steady, or custom"
        )
    allowed = _WAVEFORM_KEYS_BY_PRESET[preset]
    for key in parser["waveform"]:
        if key not in allowed:
            if preset == "physiological" and key == "frequency":
                raise ConfigError(
                    "waveform.frequency: the physiological preset has a fixed "
                    "fundamental of 1.15 Hz; remove the key"
                )
            raise ConfigError(f"waveform.{key} does not apply to preset {preset!r}")
    d = DEFAULTS["waveform"]
    ubar = _get_float(parser, "waveform", "mean_velocity", d["mean_velocity"])
    try:
        if preset == "sinusoidal":
            return make_sinusoidal(
                ubar,
                _get_float(parser, "waveform", "amplitude", d["amplitude"]),
                _get_float(parser, "waveform", "frequency", d["frequency"]),
            )
        if preset == "pulsed":
            return make_pulsed(
                ubar,
                _get_float(parser, "waveform", "duty", d["duty"]),
                _get_float(parser, "waveform", "frequency", d["frequency"]),
                _get_int(parser, "waveform", "n_harmonics", d["n_harmonics"]),
            )
        if preset == "physiological":
            return make_physiological(ubar)
        if preset == "steady":
            return make_steady(ubar, _get_float(parser, "waveform", "frequency", 1.0))
        raw = parser.get("waveform", "harmonics", fallback=None)
        if raw is None:
            raise ConfigError("waveform.harmonics is required for the custom preset")
        return make_custom(
            ubar,
            _get_float(parser, "waveform", "frequency", d["frequency"]),
            _parse_harmonics(raw),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"waveform: {exc}") from exc


def load_run_spec(config_text: str) -> RunSpec:
    """Parse config text into (scenario, pbs config, output spec)."""
    parser = _parse(config_text)
    try:
        geometry = ChannelGeometry(
            _get_float(parser, "geometry", "radius", DEFAULTS["geometry"]["radius"]),
            _get_float(parser, "geometry", "loop_length", DEFAULTS["geometry"]["loop_length"]),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"geometry: {exc}") from exc
    try:
        fluid = FluidProperties(
            _get_float(parser, "fluid", "density", DEFAULTS["fluid"]["density"]),
            _get_float(
                parser, "fluid", "dynamic_viscosity", DEFAULTS["fluid"]["dynamic_viscosity"]
            ),
        )
        transport = TransportParams(
            _get_float(parser, "transport", "diffusion", DEFAULTS["transport"]["diffusion"])
        )
        receiver = ReceiverSpec(
            _get_float(parser, "receiver", "center", DEFAULTS["receiver"]["center"]),
            _get_float(parser, "receiver", "width", DEFAULTS["receiver"]["width"]),
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    waveform = _build_waveform(parser)
    label = (
        parser.get("output", "label", fallback=DEFAULTS["output"]["label"])
        if parser.has_section("output")
        else DEFAULTS["output"]["label"]
    )
    try:
        scenario = make_scenario(geometry, fluid, transport, waveform, receiver, label)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc

    dp = DEFAULTS["pbs"]
    backend = parser.get("pbs", "backend", fallback=None) if parser.has_section("pbs") else None
    try:
        pbs = PbsConfig(
            n_particles=_get_int(parser, "pbs", "particles", dp["particles"]),
            dt=_get_float(parser, "pbs", "dt", dp["dt"]),
            duration=_get_float(parser, "pbs", "duration", dp["duration"]),
            seed=_get_int(parser, "pbs", "seed", dp["seed"]),
            sample_interval=_get_float(parser, "pbs", "sample_interval", dp["sample_interval"]),
            backend=backend,
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"pbs: {exc}") from exc
    do = DEFAULTS["output"]
    grid_points = _get_int(parser, "output", "grid_points", do["grid_points"])
    t_max = _get_float(parser, "output", "t_max", do["t_max"])
    if grid_points < 1:
        raise ConfigError(f"output.grid_points must be >= 1, got {grid_points}")
    if t_max <= 0.0 or not math.isfinite(t_max):
        raise ConfigError(f"output.t_max must be finite and > 0, got {t_max}")
    return RunSpec(scenario=scenario, pbs=pbs, output=OutputSpec(grid_points, t_max, label))


def load_scenario(config_text: str) -> Scenario:
    """Scenario part of :func:`load_run_spec`."""
    return load_run_spec(config_text).scenario


def run_experiment(scenario: Scenario, pbs_config=None, t_grid=None):
    """Analytical and steady series, plus the simulation when configured.

    With a PBS config the shared grid is the simulation's sampling grid;
    otherwise ``t_grid`` (default: 2000 points over (0, 20] s). Returns
    (series list, extras dict with metrics and any pbs stats).
    """
    if pbs_config is not None:
        t_grid = pbs_time_grid(pbs_config)
    elif t_grid is None:
        t_grid = default_time_grid()
    analytical = cir_timeseries(scenario, t_grid)
    steady = steady_flow_reference(scenario, t_grid)
    series = [analytical, steady]
    extras: dict = {
        "metrics": {
            "analytical_vs_steady": compare_series(analytical, steady).as_dict(),
        }
    }
    if pbs_config is not None:
        result = run_pbs(scenario, pbs_config)
        series.append(result.series)
        extras["pbs_stats"] = result.stats
        extras["metrics"]["pbs_vs_analytical"] = compare_series(
            result.series, analytical
        ).as_dict()
    return series, extras


# sweepable parameter paths -> (short label, apply function)
def _with_geometry(scenario: Scenario, **kw) -> Scenario:
    geom = ChannelGeometry(
        radius=kw.get("radius", scenario.geometry.radius),
        loop_length=kw.get("loop_length", scenario.geometry.loop_length),
    )
    return make_scenario(
        geom, scenario.fluid, scenario.transport, scenario.waveform,
        scenario.receiver, scenario.label,
    )


def _set_param(scenario: Scenario, path: str, value: float) -> Scenario:
    wf = scenario.waveform
    if path == "waveform.frequency":
        new_wf = HarmonicSeries(wf.mean_velocity, value, wf.amplitudes, wf.phases)
        return scenario.with_waveform(new_wf)
    if path == "waveform.mean_velocity":
        new_wf = HarmonicSeries(value, wf.frequency, wf.amplitudes, wf.phases)
        return scenario.with_waveform(new_wf)
    if path == "transport.diffusion":
        return make_scenario(
            scenario.geometry, scenario.fluid, TransportParams(value), wf,
            scenario.receiver, scenario.label,
        )
    if path in ("receiver.center", "receiver.width"):
        field = path.split(".", 1)[1]
        rx = ReceiverSpec(
            center=value if field == "center" else scenario.receiver.center,
            width=value if field == "width" else scenario.receiver.width,
        )
        return make_scenario(
            scenario.geometry, scenario.fluid, scenario.transport, wf, rx, scenario.label
        )
    if path == "geometry.radius":
        return _with_geometry(scenario, radius=value)
    if path == "geometry.loop_length":
        return _with_geometry(scenario, loop_length=value)
    if path == "fluid.density":
        fluid = FluidProperties(value, scenario.fluid.dynamic_viscosity)
    elif path == "fluid.dynamic_viscosity":
        fluid = FluidProperties(scenario.fluid.density, value)
    else:
        raise ConfigError(f"unknown sweep parameter {path!r}")
    return make_scenario(
        scenario.geometry, fluid, scenario.transport, wf, scenario.receiver, scenario.label
    )


_SHORT_PARAM = {
    "waveform.frequency": "f",
    "waveform.mean_velocity": "ubar",
    "transport.diffusion": "D",
    "receiver.center": "xrx",
    "receiver.width": "wrx",
}

# assertion window start: early transient carries most of the pulsation
# signature, trends are asserted on the settled part of the horizon
ASSERT_T_MIN = 2.0


def _rmse_vs_steady(cells) -> list[float]:
    out = []
    for cell in cells:
        analytical = cell["series"][0].window(ASSERT_T_MIN, np.inf)
        steady = cell["series"][1].window(ASSERT_T_MIN, np.inf)
        out.append(compare_series(analytical, steady).rmse)
    return out


def _assert_decreasing(name: str, values, metric: list[float]) -> None:
    for i in range(1, len(metric)):
        if not metric[i] < metric[i - 1]:
            raise SweepAssertionError(
                f"{name}: expected strictly decreasing trend, but metric at "
                f"{values[i]:g} ({metric[i]:.6g}) is not below metric at "
                f"{values[i - 1]:g} ({metric[i - 1]:.6g})"
            )


def _check_f_convergence(cells, values) -> dict:
    rmse = _rmse_vs_steady(cells)
    _assert_decreasing("f-convergence", values, rmse)
    return {"rmse_vs_steady": rmse}


def _check_damping(name):
    def check(cells, values) -> dict:
        rmse = _rmse_vs_steady(cells)
        _assert_decreasing(name, values, rmse)
        return {"rmse_vs_steady": rmse}

    return check


def _check_peak_sharpening(cells, values) -> dict:
    peaks_t = [cell["series"][0].peak_time for cell in cells]
    peaks_v = [float(np.max(cell["series"][0].values)) for cell in cells]
    for i in range(1, len(values)):
        if not peaks_v[i] > peaks_v[i - 1]:
            raise SweepAssertionError(
                f"peak-sharpening: first-peak amplitude at {values[i]:g} "
                f"({peaks_v[i]:.6g}) is not above amplitude at {values[i - 1]:g} "
                f"({peaks_v[i - 1]:.6g})"
            )
        if not peaks_t[i] < peaks_t[i - 1]:
            raise SweepAssertionError(
                f"peak-sharpening: first-peak time at {values[i]:g} "
                f"({peaks_t[i]:.6g} s) is not before peak time at {values[i - 1]:g} "
                f"({peaks_t[i - 1]:.6g} s)"
            )
    return {"peak_times_s": peaks_t, "peak_values": peaks_v}


SWEEP_ASSERTIONS = {
    "f-convergence": _check_f_convergence,
    "peak-sharpening": _check_peak_sharpening,
    "diffusion-damping": _check_damping("diffusion-damping"),
    "xrx-damping": _check_damping("xrx-damping"),
}


def run_sweep(
    scenario: Scenario,
    param: str,
    values,
    pbs_config=None,
    t_grid=None,
    assertion: str | None = None,
):
    """One experiment per parameter value on a shared grid.

    Returns (series list for CSV, extras dict). Series labels carry the cell
    value, e.g. "analytical f=2". The optional trend assertion (see
    ``SWEEP_ASSERTIONS``) raises ``SweepAssertionError`` when violated.
    """
    if assertion is not None and assertion not in SWEEP_ASSERTIONS:
        raise ConfigError(
            f"unknown assertion {assertion!r}; available: {sorted(SWEEP_ASSERTIONS)}"
        )
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ConfigError("sweep needs at least two values")
    short = _SHORT_PARAM.get(param, param.split(".")[-1])
    cells = []
    all_series = []
    extras: dict = {"cells": {}}
    for value in values:
        cell_scenario = _set_param(scenario, param, value)
        series, cell_extras = run_experiment(cell_scenario, pbs_config, t_grid)
        tag = f"{short}={value:g}"
        cells.append({"value": value, "series": series})
        all_series.extend(s.relabel(f"{s.label} {tag}") for s in series)
        extras["cells"][tag] = cell_extras
    if assertion is not None:
        extras["assertion"] = {
            "name": assertion,
            **SWEEP_ASSERTIONS[assertion](cells, values),
            "passed": True,
        }
    return all_series, extras
