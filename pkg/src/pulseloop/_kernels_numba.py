"""Numba particle-update kernel (default backend when numba is installed).

Particle-outer layout: trajectories are advanced independently in parallel
over fixed blocks of particles. Every per-sample reduction (receiver counts,
circular moment sums) is accumulated into a per-block row and combined
serially afterwards, so results are bit-identical for any worker count.

Random draws re-implement ``rng.draw_u64`` scalar-wise; constants must stay
in sync with that module.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .rng import GOLDEN, MIX_1, MIX_2, STRIDE

__all__ = ["simulate", "BLOCK"]

BLOCK = 1024

_U1 = np.uint64(1)
_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_STRIDE_U = np.uint64(STRIDE)
_TWO_NEG53 = 2.0**-53
_TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _draw(key, ctr):
    z = key + (ctr + _U1) * GOLDEN
    z = (z ^ (z >> _U30)) * MIX_1
    z = (z ^ (z >> _U27)) * MIX_2
    return z ^ (z >> _U31)


@njit(cache=True, inline="always")
def _u_open(bits):
    # (0, 1]: safe log argument
    return (float(bits >> _U11) + 1.0) * _TWO_NEG53


@njit(cache=True, inline="always")
def _u_half(bits):
    # [0, 1)
    return float(bits >> _U11) * _TWO_NEG53


@njit(cache=True, parallel=True)
def _simulate(
    x,
    y,
    z,
    harm_re,
    harm_im_neg,
    phase_cos,
    phase_sin,
    ubar,
    dt,
    diffusion,
    radius,
    loop_length,
    step_key,
    sample_every,
    lo1,
    hi1,
    lo2,
    hi2,
    block_counts,
    block_sc,
    block_ss,
    block_warn,
):
    n_p = x.shape[0]
    n_steps = phase_cos.shape[0]
    n_harm = phase_cos.shape[1]
    n_grid = harm_re.shape[0]
    n_blocks = block_counts.shape[0]
    inv_dr = (n_grid - 1) / radius
    s_diff = math.sqrt(2.0 * diffusion * dt)
    two_r = 2.0 * radius
    ang_scale = _TWO_PI / loop_length

    for b in prange(n_blocks):
        i_lo = b * BLOCK
        i_hi = min(n_p, i_lo + BLOCK)
        for i in range(i_lo, i_hi):
            xi = x[i]
            yi = y[i]
            zi = z[i]
            for k in range(n_steps):
                r = math.sqrt(yi * yi + zi * zi)
                u = 2.0 * ubar * (1.0 - (r / radius) ** 2)
                if n_harm > 0:
                    pos = r * inv_dr
                    i0 = int(pos)
                    if i0 > n_grid - 2:
                        i0 = n_grid - 2
                    frac = pos - i0
                    for n in range(n_harm):
                        a0 = harm_re[i0, n]
                        a1 = harm_re[i0 + 1, n]
                        c0 = harm_im_neg[i0, n]
                        c1 = harm_im_neg[i0 + 1, n]
                        u += (a0 + frac * (a1 - a0)) * phase_cos[k, n] + (
                            c0 + frac * (c1 - c0)
                        ) * phase_sin[k, n]

                base = (np.uint64(k) * np.uint64(n_p) + np.uint64(i)) * _STRIDE_U
                u1 = _u_open(_draw(step_key, base))
                u2 = _u_half(_draw(step_key, base + _U1))
                rad = math.sqrt(-2.0 * math.log(u1))
                g_ax = rad * math.cos(_TWO_PI * u2)
                g_y = rad * math.sin(_TWO_PI * u2)
                u3 = _u_open(_draw(step_key, base + np.uint64(2)))
                u4 = _u_half(_draw(step_key, base + np.uint64(3)))
                g_z = math.sqrt(-2.0 * math.log(u3)) * math.cos(_TWO_PI * u4)

                xi += u * dt + s_diff * g_ax
                xi = xi % loop_length
                if xi == loop_length:
                    xi = 0.0

                yn = yi + s_diff * g_y
                zn = zi + s_diff * g_z
                rn = math.sqrt(yn * yn + zn * zn)
                if rn > radius:
                    if rn <= two_r:
                        sc = (two_r - rn) / rn
                        yn *= sc
                        zn *= sc
                    else:
                        done = False
                        yt = yn
                        zt = zn
                        for attempt in range(1, 11):
                            ua = _u_open(_draw(step_key, base + np.uint64(2 + 2 * attempt)))
                            ub = _u_half(_draw(step_key, base + np.uint64(3 + 2 * attempt)))
                            rad2 = math.sqrt(-2.0 * math.log(ua))
                            yt = yi + s_diff * rad2 * math.cos(_TWO_PI * ub)
                            zt = zi + s_diff * rad2 * math.sin(_TWO_PI * ub)
                            rt = math.sqrt(yt * yt + zt * zt)
                            if rt <= radius:
                                yn = yt
                                zn = zt
                                done = True
                            elif rt <= two_r:
                                sc = (two_r - rt) / rt
                                yn = yt * sc
                                zn = zt * sc
                                done = True
                            if done:
                                block_warn[b, 0] += 1
                                break
                        if not done:
                            rl = math.sqrt(yt * yt + zt * zt)
                            yn = yt * (radius / rl)
                            zn = zt * (radius / rl)
                            block_warn[b, 1] += 1
                yi = yn
                zi = zn

                kk = k + 1
                if kk % sample_every == 0:
                    s_i = kk // sample_every - 1
                    if (lo1 <= xi < hi1) or (lo2 <= xi < hi2):
                        block_counts[b, s_i] += 1
                    ang = ang_scale * xi
                    block_sc[b, s_i] += math.cos(ang)
                    block_ss[b, s_i] += math.sin(ang)
            x[i] = xi
            y[i] = yi
            z[i] = zi


def simulate(
    x,
    y,
    z,
    harm_re,
    harm_im_neg,
    phase_cos,
    phase_sin,
    ubar: float,
    dt: float,
    diffusion: float,
    radius: float,
    loop_length: float,
    step_key,
    sample_every: int,
    rx_windows,
):
    """Same contract as ``_kernels_numpy.simulate``; see that docstring."""
    n_steps = phase_cos.shape[0]
    n_samples = n_steps // sample_every
    n_blocks = max(1, -(-x.size // BLOCK))
    block_counts = np.zeros((n_blocks, n_samples), dtype=np.int64)
    block_sc = np.zeros((n_blocks, n_samples), dtype=np.float64)
    block_ss = np.zeros((n_blocks, n_samples), dtype=np.float64)
    block_warn = np.zeros((n_blocks, 2), dtype=np.int64)
    lo1, hi1, lo2, hi2 = rx_windows
    _simulate(
        x,
        y,
        z,
        harm_re,
        harm_im_neg,
        phase_cos,
        phase_sin,
        float(ubar),
        float(dt),
        float(diffusion),
        float(radius),
        float(loop_length),
        np.uint64(step_key),
        int(sample_every),
        float(lo1),
        float(hi1),
        float(lo2),
        float(hi2),
        block_counts,
        block_sc,
        block_ss,
        block_warn,
    )
    # serial, order-fixed combination keeps results thread-count independent
    counts = block_counts.sum(axis=0)
    sumcos = block_sc.sum(axis=0)
    sumsin = block_ss.sum(axis=0)
    return counts, sumcos, sumsin, int(block_warn[:, 0].sum()), int(block_warn[:, 1].sum())
