"""Counter-based random numbers for reproducible, order-independent sampling.

Every random draw is a pure function of (stream key, counter): the counter
is hashed through the splitmix64 finalizer. Particle i, step k owns the
fixed counter range [(k*N_p + i)*STRIDE, ...), so trajectories do not depend
on scheduling, worker count, or evaluation order. The numba kernel
re-implements ``draw_u64`` bit-identically on scalars.

Per particle-step the counter sub-slots are:

    0, 1        Box-Muller pair -> (axial increment, y increment)
    2, 3        Box-Muller pair -> (z increment, discarded)
    2+2a, 3+2a  pair for wall-rejection resample attempt a = 1..10

which gives STRIDE = 24 slots.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "STRIDE",
    "derive_key",
    "draw_u64",
    "uniform_open",
    "uniform_halfopen",
    "normal_pair_from_bits",
    "init_positions",
]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
# distinct stream tags: particle initialization vs per-step dynamics
STREAM_INIT = np.uint64(0x1F123BB5159A55E5)
STREAM_STEP = np.uint64(0xD6E8FEB86659FD93)

STRIDE = 24
TWO_NEG53 = 2.0**-53


def mix64(z):
    """splitmix64 finalizer on uint64 scalars or arrays (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = np.uint64(z) if np.isscalar(z) else np.asarray(z, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * MIX_1
        z = (z ^ (z >> np.uint64(27))) * MIX_2
        return z ^ (z >> np.uint64(31))


def derive_key(seed: int, stream: np.uint64) -> np.uint64:
    """Stream key from a user seed; distinct streams never share counters."""
    with np.errstate(over="ignore"):
        return np.uint64(mix64(np.uint64(seed % (1 << 64)) ^ stream))


def draw_u64(key: np.uint64, ctr):
    """64 uniform bits at counter position(s) ``ctr``."""
    with np.errstate(over="ignore"):
        ctr = np.asarray(ctr, dtype=np.uint64)
        return mix64(key + (ctr + np.uint64(1)) * GOLDEN)


def uniform_open(bits):
    """Map bits to (0, 1]: safe as the log argument in Box-Muller."""
    return (np.asarray(bits >> np.uint64(11), dtype=np.float64) + 1.0) * TWO_NEG53


def uniform_halfopen(bits):
    """Map bits to [0, 1)."""
    return np.asarray(bits >> np.uint64(11), dtype=np.float64) * TWO_NEG53


def normal_pair_from_bits(bits1, bits2):
    """Standard normal pair via Box-Muller from two 64-bit words."""
    u1 = uniform_open(bits1)
    u2 = uniform_halfopen(bits2)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * math.pi) * u2
    return r * np.cos(ang), r * np.sin(ang)


def init_positions(n_particles: int, radius: float, seed: int):
    """Release positions: x = 0, (y, z) uniform over the disc of radius R.

    Uses the dedicated init stream with counters (2i, 2i+1) for particle i,
    drawing the disc point as r = R*sqrt(U), angle = 2*pi*V.
    """
    key = derive_key(seed, STREAM_INIT)
    idx = np.arange(n_particles, dtype=np.uint64)
    u_r = uniform_halfopen(draw_u64(key, idx * np.uint64(2)))
    u_th = uniform_halfopen(draw_u64(key, idx * np.uint64(2) + np.uint64(1)))
    r = radius * np.sqrt(u_r)
    theta = (2.0 * math.pi) * u_th
    x = np.zeros(n_particles, dtype=np.float64)
    return x, r * np.cos(theta), r * np.sin(theta)
