# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the truncated theta lattice sum."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, floor, M_PI

cnp.import_array()


def lattice_sum(double[:, ::1] V, double[::1] q_re, double[::1] q_im,
                double[:, ::1] w_re, double[:, ::1] w_im, double[::1] offset):
    """Sum ``exp(Q_m + 2 pi i V_m . W_k + offset_k)`` over m for every k.

    ``Q_m = pi i V_m^T tau V_m`` is passed split into real and imaginary parts.
    The rows of ``V`` are integer vectors shifted by a common vector, so the
    factor ``exp(2 pi i V_m . W_k)`` is a product of per-coordinate values
    that are tabulated once for each k.
    """
    cdef Py_ssize_t M = V.shape[0]
    cdef Py_ssize_t g = V.shape[1]
    cdef Py_ssize_t K = w_re.shape[0]
    cdef Py_ssize_t k, m, i, j, span = 0
    cdef double v, ar, ai, mag
    cdef double complex s, t

    out = np.empty(K, dtype=np.complex128)
    cdef double complex[::1] res = out
    if M == 0:
        out[:] = 0
        return out

    # integer offsets of every lattice point inside the per-coordinate tables
    vmin_arr = np.empty(g)
    cdef double[::1] vmin = vmin_arr
    for i in range(g):
        vmin[i] = V[0, i]
        for m in range(1, M):
            if V[m, i] < vmin[i]:
                vmin[i] = V[m, i]
    idx_arr = np.empty((M, g), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] idx = idx_arr
    for m in range(M):
        for i in range(g):
            idx[m, i] = <Py_ssize_t>floor(V[m, i] - vmin[i] + 0.5)
            if idx[m, i] + 1 > span:
                span = idx[m, i] + 1

    # exp(Q_m), dropping terms below the double range
    qe_arr = np.empty(M, dtype=np.complex128)
    cdef double complex[::1] qe = qe_arr
    for m in range(M):
        if q_re[m] < -745.0:
            qe[m] = 0
        else:
            mag = exp(q_re[m])
            qe[m] = mag * cos(q_im[m]) + 1j * mag * sin(q_im[m])

    tab_arr = np.empty((g, span), dtype=np.complex128)
    cdef double complex[:, ::1] tab = tab_arr
    for k in range(K):
        for i in range(g):
            for j in range(span):
                v = vmin[i] + j
                ar = -2.0 * M_PI * v * w_im[k, i]
                ai = 2.0 * M_PI * v * w_re[k, i]
                mag = exp(ar)
                tab[i, j] = mag * cos(ai) + 1j * mag * sin(ai)
        s = 0
        for m in range(M):
            t = qe[m]
            for i in range(g):
                t = t * tab[i, idx[m, i]]
            s = s + t
        mag = exp(offset[k])
        res[k] = s * mag
    return out
