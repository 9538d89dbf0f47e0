"""Vectorized NumPy particle-update kernel (fallback backend).

Step-outer layout: one Python-level loop over time steps, all particles
advanced per step with array operations. Semantics match the numba kernel
draw for draw; trajectories agree up to transcendental rounding.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import STRIDE, draw_u64, normal_pair_from_bits, uniform_halfopen, uniform_open

__all__ = ["simulate"]


def _normal_single(key, ctr_a, ctr_b):
    """First element of the Box-Muller pair at (ctr_a, ctr_b)."""
    u1 = uniform_open(draw_u64(key, ctr_a))
    u2 = uniform_halfopen(draw_u64(key, ctr_b))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos((2.0 * math.pi) * u2)


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
    """Advance the ensemble over all steps of the phase tables, sampling as it goes.

    Parameters mirror the numba kernel: ``harm_re``/``harm_im_neg`` are the
    (grid, harmonic) radial tables of Re/-Im of ubar*M_n*Psi_n, and
    ``phase_cos``/``phase_sin`` are the (step, harmonic) factors
    cos/sin(n*omega*t_k + phi_n). ``rx_windows`` is (lo1, hi1, lo2, hi2) of
    half-open receiver intervals on [0, L); the second may be empty.

    Returns (counts, sumcos, sumsin, n_resampled, n_clamped): per-sample
    receiver counts and circular moment sums of 2*pi*x/L, plus wall-handling
    warning tallies. Positions are updated in place.
    """
    n_p = x.size
    n_steps = phase_cos.shape[0]
    n_harm = phase_cos.shape[1]
    n_grid = harm_re.shape[0]
    n_samples = n_steps // sample_every
    lo1, hi1, lo2, hi2 = rx_windows

    inv_dr = (n_grid - 1) / radius
    s_diff = math.sqrt(2.0 * diffusion * dt)
    two_r = 2.0 * radius
    ang_scale = 2.0 * math.pi / loop_length

    counts = np.zeros(n_samples, dtype=np.int64)
    sumcos = np.zeros(n_samples, dtype=np.float64)
    sumsin = np.zeros(n_samples, dtype=np.float64)
    n_resampled = 0
    n_clamped = 0

    # the loop rebinds y/z to fresh arrays; copied back to the caller at the end
    y_inout, z_inout = y, z
    idx = np.arange(n_p, dtype=np.uint64)
    u64 = np.uint64
    for k in range(n_steps):
        r = np.hypot(y, z)
        u = 2.0 * ubar * (1.0 - (r / radius) ** 2)
        if n_harm:
            w_k = harm_re @ phase_cos[k] + harm_im_neg @ phase_sin[k]
            pos = r * inv_dr
            i0 = np.minimum(pos.astype(np.int64), n_grid - 2)
            frac = pos - i0
            lo = w_k[i0]
            u = u + lo + frac * (w_k[i0 + 1] - lo)

        with np.errstate(over="ignore"):
            base = (u64(k) * u64(n_p) + idx) * u64(STRIDE)
        g_ax, g_y = normal_pair_from_bits(
            draw_u64(step_key, base), draw_u64(step_key, base + u64(1))
        )
        g_z = _normal_single(step_key, base + u64(2), base + u64(3))

        x += u * dt + s_diff * g_ax
        x %= loop_length
        x[x == loop_length] = 0.0

        y_new = y + s_diff * g_y
        z_new = z + s_diff * g_z
        rn = np.hypot(y_new, z_new)
        outside = rn > radius
        if outside.any():
            refl = outside & (rn <= two_r)
            scale = (two_r - rn[refl]) / rn[refl]
            y_new[refl] *= scale
            z_new[refl] *= scale
            bad = np.flatnonzero(rn > two_r)
            y_last = y_new[bad]
            z_last = z_new[bad]
            for attempt in range(1, 11):
                if bad.size == 0:
                    break
                ga, gb = normal_pair_from_bits(
                    draw_u64(step_key, base[bad] + u64(2 + 2 * attempt)),
                    draw_u64(step_key, base[bad] + u64(3 + 2 * attempt)),
                )
                y_try = y[bad] + s_diff * ga
                z_try = z[bad] + s_diff * gb
                rt = np.hypot(y_try, z_try)
                need_refl = (rt > radius) & (rt <= two_r)
                sc = np.ones_like(rt)
                sc[need_refl] = (two_r - rt[need_refl]) / rt[need_refl]
                take = rt <= two_r
                sel = bad[take]
                y_new[sel] = (y_try * sc)[take]
                z_new[sel] = (z_try * sc)[take]
                n_resampled += int(take.sum())
                bad = bad[~take]
                y_last = y_try[~take]
                z_last = z_try[~take]
            if bad.size:
                rl = np.hypot(y_last, z_last)
                y_new[bad] = y_last * (radius / rl)
                z_new[bad] = z_last * (radius / rl)
                n_clamped += int(bad.size)
        y = y_new
        z = z_new

        if (k + 1) % sample_every == 0:
            s_i = (k + 1) // sample_every - 1
            in_rx = (x >= lo1) & (x < hi1)
            if hi2 > lo2:
                in_rx |= (x >= lo2) & (x < hi2)
            counts[s_i] = np.count_nonzero(in_rx)
            ang = ang_scale * x
            sumcos[s_i] = np.cos(ang).sum()
            sumsin[s_i] = np.sin(ang).sum()

    y_inout[:] = y
    z_inout[:] = z
    return counts, sumcos, sumsin, n_resampled, n_clamped
