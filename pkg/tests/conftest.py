import numpy as np
import pytest

from pulseloop import (
    ChannelGeometry,
    FluidProperties,
    TransportParams,
    make_physiological,
    make_pulsed,
    make_sinusoidal,
)


@pytest.fixture
def geometry():
    return ChannelGeometry(radius=50e-6, loop_length=1e-3)


@pytest.fixture
def fluid():
    return FluidProperties(density=1060.0, dynamic_viscosity=3e-3)


@pytest.fixture
def transport():
    return TransportParams(molecular_diffusion=5e-9)


@pytest.fixture
def preset_waveforms():
    """The three reference waveforms used across the oracle tests."""
    return {
        "sinusoidal": make_sinusoidal(1e-4, 0.5, 0.5),
        "pulsed": make_pulsed(1e-4, 0.2, 0.5, 50),
        "physiological": make_physiological(2e-4),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
