"""NumPy implementation of the stepping kernel.

State layout: alpha[j, f] with j the z index and f a flattened
(detuning-class, orientation) family; each family carries a controlled-
gradient sign multiplier, a static detuning offset and a source weight.

The field has no time derivative in the light-speed frame, so every
Runge-Kutta stage re-solves it as a cumulative trapezoid along z from the
entry-face boundary value; the stage's own alpha feeds that sweep.
"""
from __future__ import annotations

import numpy as np


def field_sweep(alpha, f_bound, z, fam_weight, density):
    """E(z) = f_bound + i*density * cumtrapz_z( sum_f w_f alpha )."""
    h = z[1] - z[0]
    P = alpha @ fam_weight
    E = np.empty(z.size, dtype=np.complex128)
    E[0] = f_bound
    np.cumsum((P[1:] + P[:-1]) * (0.5j * density * h), out=E[1:])
    E[1:] += f_bound
    return E


def advance_segment(
    alpha,
    sign,
    coupling,
    density,
    decay,
    gradient,
    z,
    fam_sign,
    fam_offset,
    fam_weight,
    f_half,
    dt,
    n_steps,
    snap_stride,
    bound_in,
    bound_out,
    alpha_norm,
    snap_E,
    snap_P,
):
    """Advance `alpha` in place over n_steps of classical RK4.

    Records, at each step's start time: the boundary fields, the
    z-integrated weighted polarization norm, and (every snap_stride steps)
    E(z) and the source-summed polarization.
    """
    n_z = z.size
    h = z[1] - z[0]
    coef = -(decay + 1j * (sign * gradient * np.outer(z, fam_sign)
                           + fam_offset[None, :]))
    ig = 1j * coupling
    inh = 0.5j * density * h
    wz = np.full(n_z, h)
    wz[0] = wz[-1] = 0.5 * h

    E = np.empty(n_z, dtype=np.complex128)
    i_snap = 0

    def stage(a, f):
        P = a @ fam_weight
        E[0] = f
        np.cumsum((P[1:] + P[:-1]) * inh, out=E[1:])
        E[1:] += f
        return coef * a + ig * E[:, None], P

    for k in range(n_steps):
        f0 = f_half[2 * k]
        fh = f_half[2 * k + 1]
        f1 = f_half[2 * k + 2]

        k1, P1 = stage(alpha, f0)
        bound_in[k] = f0
        bound_out[k] = E[-1]
        alpha_norm[k] = float(
            wz @ ((np.abs(alpha) ** 2) @ fam_weight)
        )
        if snap_stride and k % snap_stride == 0:
            snap_E[i_snap, :] = E
            snap_P[i_snap, :] = P1
            i_snap += 1

        k2, _ = stage(alpha + (0.5 * dt) * k1, fh)
        k3, _ = stage(alpha + (0.5 * dt) * k2, fh)
        k4, _ = stage(alpha + dt * k3, f1)
        alpha += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)

    return i_snap
