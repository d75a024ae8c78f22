# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, sin, fabs

cnp.import_array()

SE = 0
IMQ = 1


def stein_gram_pairs(int family,
                     const double[:, ::1] bb,
                     const double[:, ::1] q,
                     const double[:, ::1] r,
                     const double[:, ::1] p,
                     const double[:, ::1] z,
                     double trace):
    cdef Py_ssize_t n = bb.shape[0]
    cdef Py_ssize_t i, j
    cdef double sc_dd, sc_dg, cs_dd, sq, k, k3, h
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] H = out
    with nogil:
        for i in range(n):
            for j in range(i, n):
                sc_dd = (q[i, i] + q[j, j]) - (q[i, j] + q[j, i])
                sc_dg = (r[i, i] + r[j, j]) - (r[i, j] + r[j, i])
                cs_dd = (p[i, i] + p[j, j]) - (p[i, j] + p[j, i])
                sq = (z[i, i] + z[j, j]) - (z[i, j] + z[j, i])
                if sq < 0.0:
                    sq = 0.0
                if family == 0:
                    k = exp(-0.5 * sq)
                    h = k * ((((bb[i, j] - sc_dd) - sc_dg) + trace) - cs_dd)
                else:
                    k = 1.0 / sqrt(sq + 1.0)
                    k3 = k * k * k
                    h = k * bb[i, j] + k3 * ((trace - sc_dd) - sc_dg) - 3.0 * (k3 * k * k) * cs_dd
                H[i, j] = h
                H[j, i] = h
    return out


def em_sine_accept(increments, double x0, double dt, double coef, double eps):
    cdef const double[:, ::1] inc = np.ascontiguousarray(increments, dtype=np.float64)
    cdef Py_ssize_t steps = inc.shape[0]
    cdef Py_ssize_t batch = inc.shape[1]
    cdef Py_ssize_t b, k, j, n_acc = 0
    paths_arr = np.empty((steps + 1, batch), dtype=np.float64)
    cdef double[:, ::1] paths = paths_arr
    cdef double[::1] x
    cdef double[::1] xn
    with nogil:
        for b in range(batch):
            paths[0, b] = x0
        # step-outer / path-inner so the compiler can vectorise sin()
        for k in range(steps):
            x = paths[k]
            xn = paths[k + 1]
            for b in range(batch):
                xn[b] = x[b] + coef * sin(x[b]) * dt + inc[k, b]
        for b in range(batch):
            if fabs(paths[steps, b]) < eps:
                n_acc += 1
    out_arr = np.empty((n_acc, steps + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        j = 0
        for b in range(batch):
            if fabs(paths[steps, b]) < eps:
                for k in range(steps + 1):
                    out[j, k] = paths[k, b]
                j += 1
    return out_arr
