# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel; mirrors _pykernel.advance_segment."""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex dcomplex


cdef inline void _stage(
    dcomplex[:, ::1] a,
    dcomplex[:, ::1] coef,
    dcomplex[:, ::1] kout,
    dcomplex[::1] P,
    dcomplex[::1] E,
    double[::1] fam_weight,
    dcomplex f_bound,
    dcomplex inh,
    dcomplex ig,
    Py_ssize_t n_z,
    Py_ssize_t n_fam,
) noexcept nogil:
    cdef Py_ssize_t j, f
    cdef dcomplex acc
    for j in range(n_z):
        acc = 0
        for f in range(n_fam):
            acc = acc + fam_weight[f] * a[j, f]
        P[j] = acc
    E[0] = f_bound
    for j in range(1, n_z):
        E[j] = E[j - 1] + inh * (P[j] + P[j - 1])
    for j in range(n_z):
        acc = ig * E[j]
        for f in range(n_fam):
            kout[j, f] = coef[j, f] * a[j, f] + acc


def advance_segment(
    cnp.ndarray[dcomplex, ndim=2] alpha_arr,
    double sign,
    double coupling,
    double density,
    double decay,
    double gradient,
    cnp.ndarray[double, ndim=1] z_arr,
    cnp.ndarray[double, ndim=1] fam_sign_arr,
    cnp.ndarray[double, ndim=1] fam_offset_arr,
    cnp.ndarray[double, ndim=1] fam_weight_arr,
    cnp.ndarray[dcomplex, ndim=1] f_half_arr,
    double dt,
    Py_ssize_t n_steps,
    Py_ssize_t snap_stride,
    cnp.ndarray[dcomplex, ndim=1] bound_in_arr,
    cnp.ndarray[dcomplex, ndim=1] bound_out_arr,
    cnp.ndarray[double, ndim=1] alpha_norm_arr,
    snap_E_arr,
    snap_P_arr,
):
    cdef dcomplex[:, ::1] alpha = alpha_arr
    cdef double[::1] z = z_arr
    cdef double[::1] fam_sign = fam_sign_arr
    cdef double[::1] fam_offset = fam_offset_arr
    cdef double[::1] fam_weight = fam_weight_arr
    cdef dcomplex[::1] f_half = f_half_arr
    cdef dcomplex[::1] bound_in = bound_in_arr
    cdef dcomplex[::1] bound_out = bound_out_arr
    cdef double[::1] alpha_norm = alpha_norm_arr

    cdef Py_ssize_t n_z = z.shape[0]
    cdef Py_ssize_t n_fam = fam_sign.shape[0]
    cdef double h = z[1] - z[0]
    cdef dcomplex ig = 1j * coupling
    cdef dcomplex inh = 0.5j * density * h

    cdef dcomplex[:, ::1] coef = np.empty((n_z, n_fam), dtype=np.complex128)
    cdef dcomplex[:, ::1] k1 = np.empty((n_z, n_fam), dtype=np.complex128)
    cdef dcomplex[:, ::1] kst = np.empty((n_z, n_fam), dtype=np.complex128)
    cdef dcomplex[:, ::1] acc = np.empty((n_z, n_fam), dtype=np.complex128)
    cdef dcomplex[:, ::1] a_stage = np.empty((n_z, n_fam), dtype=np.complex128)
    cdef dcomplex[::1] P = np.empty(n_z, dtype=np.complex128)
    cdef dcomplex[::1] E = np.empty(n_z, dtype=np.complex128)

    cdef dcomplex[:, ::1] snap_E
    cdef dcomplex[:, ::1] snap_P
    cdef bint do_snap = snap_stride > 0
    if do_snap:
        snap_E = snap_E_arr
        snap_P = snap_P_arr

    cdef Py_ssize_t j, f, k, i_snap = 0
    cdef double wnorm, wedge
    cdef dcomplex f0, fh, f1

    for j in range(n_z):
        for f in range(n_fam):
            coef[j, f] = -(decay + 1j * (sign * gradient * z[j] * fam_sign[f]
                                         + fam_offset[f]))

    for k in range(n_steps):
        f0 = f_half[2 * k]
        fh = f_half[2 * k + 1]
        f1 = f_half[2 * k + 2]

        _stage(alpha, coef, k1, P, E, fam_weight, f0, inh, ig, n_z, n_fam)
        bound_in[k] = f0
        bound_out[k] = E[n_z - 1]
        wnorm = 0.0
        for j in range(n_z):
            wedge = h if 0 < j < n_z - 1 else 0.5 * h
            for f in range(n_fam):
                wnorm += wedge * fam_weight[f] * (
                    alpha[j, f].real * alpha[j, f].real
                    + alpha[j, f].imag * alpha[j, f].imag
                )
        alpha_norm[k] = wnorm
        if do_snap and k % snap_stride == 0:
            for j in range(n_z):
                snap_E[i_snap, j] = E[j]
                snap_P[i_snap, j] = P[j]
            i_snap += 1

        for j in range(n_z):
            for f in range(n_fam):
                acc[j, f] = k1[j, f]
                a_stage[j, f] = alpha[j, f] + 0.5 * dt * k1[j, f]
        _stage(a_stage, coef, kst, P, E, fam_weight, fh, inh, ig, n_z, n_fam)
        for j in range(n_z):
            for f in range(n_fam):
                acc[j, f] = acc[j, f] + 2.0 * kst[j, f]
                a_stage[j, f] = alpha[j, f] + 0.5 * dt * kst[j, f]
        _stage(a_stage, coef, kst, P, E, fam_weight, fh, inh, ig, n_z, n_fam)
        for j in range(n_z):
            for f in range(n_fam):
                acc[j, f] = acc[j, f] + 2.0 * kst[j, f]
                a_stage[j, f] = alpha[j, f] + dt * kst[j, f]
        _stage(a_stage, coef, kst, P, E, fam_weight, f1, inh, ig, n_z, n_fam)
        for j in range(n_z):
            for f in range(n_fam):
                alpha[j, f] = alpha[j, f] + (dt / 6.0) * (acc[j, f] + kst[j, f])

    return i_snap
