"""Named figure-reproduction recipes: predefined sweeps over the defaults.

Each recipe fixes a base scenario and sweeps one parameter, optionally with
a trend assertion. Recipes emit analytical and steady-reference curves; the
simulation columns are opt-in (``--pbs``) because each simulated cell takes
minutes at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cir import ReceiverSpec
from .dispersion import TransportParams
from .errors import ConfigError
from .scenario import DEFAULTS, Scenario, make_scenario
from .waveform import make_physiological, make_pulsed, make_sinusoidal
from .womersley import ChannelGeometry, FluidProperties

__all__ = ["PresetRecipe", "PRESETS", "get_preset"]


@dataclass(frozen=True)
class PresetRecipe:
    name: str
    description: str
    scenario: Scenario
    param: str
    values: tuple[float, ...]
    assertion: str | None


def _base(
    waveform, label: str, receiver_center: float | None = None, diffusion: float | None = None
) -> Scenario:
    g = DEFAULTS["geometry"]
    f = DEFAULTS["fluid"]
    return make_scenario(
        ChannelGeometry(g["radius"], g["loop_length"]),
        FluidProperties(f["density"], f["dynamic_viscosity"]),
        TransportParams(diffusion if diffusion is not None else DEFAULTS["transport"]["diffusion"]),
        waveform,
        ReceiverSpec(
            receiver_center if receiver_center is not None else DEFAULTS["receiver"]["center"],
            DEFAULTS["receiver"]["width"],
        ),
        label,
    )


def _build_presets() -> dict[str, PresetRecipe]:
    f_values = (0.5, 1.0, 2.0, 4.0, 8.0)
    sine = make_sinusoidal(1e-4, 0.5, 0.5)
    pulse = make_pulsed(1e-4, 0.2, 0.5, 50)
    physio = make_physiological(2e-4)
    recipes = [
        PresetRecipe(
            "fig_sine_f",
            "sinusoidal waveform, frequency sweep: convergence to steady flow",
            _base(sine, "fig_sine_f"),
            "waveform.frequency",
            f_values,
            "f-convergence",
        ),
        PresetRecipe(
            "fig_pulse_f",
            "pulsed waveform, frequency sweep: convergence to steady flow",
            _base(pulse, "fig_pulse_f"),
            "waveform.frequency",
            f_values,
            "f-convergence",
        ),
        PresetRecipe(
            "fig_sine_ubar",
            "sinusoidal waveform, mean-velocity sweep: earlier, sharper peaks",
            _base(sine, "fig_sine_ubar"),
            "waveform.mean_velocity",
            (0.5e-4, 1e-4, 2e-4),
            "peak-sharpening",
        ),
        PresetRecipe(
            "fig_pulse_ubar",
            "pulsed waveform, mean-velocity sweep: earlier, sharper peaks",
            _base(pulse, "fig_pulse_ubar"),
            "waveform.mean_velocity",
            (0.5e-4, 1e-4, 2e-4),
            "peak-sharpening",
        ),
        PresetRecipe(
            "fig_pbs_xrx",
            "physiological waveform, receiver-position sweep at ubar = 2e-4 m/s",
            _base(physio, "fig_pbs_xrx"),
            "receiver.center",
            (0.1e-3, 0.3e-3, 0.5e-3),
            "xrx-damping",
        ),
        PresetRecipe(
            "fig_pbs_ubar",
            "physiological waveform, mean-velocity sweep at x_Rx = 0.3 mm",
            _base(physio, "fig_pbs_ubar"),
            "waveform.mean_velocity",
            (1e-4, 2e-4, 4e-4),
            "peak-sharpening",
        ),
        PresetRecipe(
            "fig_pbs_D",
            "physiological waveform, diffusion sweep: pulsation damping",
            _base(physio, "fig_pbs_D"),
            "transport.diffusion",
            (2.5e-9, 5e-9, 10e-9),
            "diffusion-damping",
        ),
    ]
    return {r.name: r for r in recipes}


PRESETS = _build_presets()


def get_preset(name: str) -> PresetRecipe:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[name]
