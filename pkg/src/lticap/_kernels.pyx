# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Each loop runs without the GIL so sweep points evaluated on worker threads
actually overlap.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, expm1

cnp.import_array()

cdef double LOG2E = 1.4426950408889634
cdef double TINY = 1e-300


cdef inline double _g(double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    if x < TINY:
        return x * (1.0 - log(x)) * LOG2E
    return (log1p(x) + x * log1p(1.0 / x)) * LOG2E


def g_array(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _g(xv[i])
    return out.reshape(np.shape(x))


def butterworth_sq(omega, double cutoff, double h0sq, bint conventional):
    cdef const double[::1] w = np.ascontiguousarray(omega, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double u
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            u = w[i] / cutoff
            u = u * u
            u = u * u
            u = u * u
            if conventional:
                ov[i] = h0sq / (1.0 + u)
            else:
                ov[i] = h0sq / ((1.0 + u) * (1.0 + u))
    return out.reshape(np.shape(omega))


def stage_noise(h2, double n_t, double n_t1):
    cdef const double[::1] hv = np.ascontiguousarray(h2, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = hv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            if hv[i] <= 1.0:
                ov[i] = (1.0 - hv[i]) * n_t
            else:
                ov[i] = (hv[i] - 1.0) * n_t1
    return out.reshape(np.shape(h2))


def cascade_accumulate(h2_stages, sn_stages):
    cdef const double[:, ::1] hs = np.ascontiguousarray(np.atleast_2d(h2_stages), dtype=np.float64)
    cdef const double[:, ::1] ss = np.ascontiguousarray(np.atleast_2d(sn_stages), dtype=np.float64)
    cdef Py_ssize_t m = hs.shape[0], n = hs.shape[1], i, k
    h2 = np.ones(n, dtype=np.float64)
    sn = np.zeros(n, dtype=np.float64)
    cdef double[::1] hv = h2
    cdef double[::1] sv = sn
    with nogil:
        for k in range(m):
            for i in range(n):
                sv[i] = hs[k, i] * sv[i] + ss[k, i]
                hv[i] = hv[i] * hs[k, i]
    return h2, sn


def hsw_alloc(h2, sn, double beta, double gain_floor):
    cdef const double[::1] hv = np.ascontiguousarray(h2, dtype=np.float64).ravel()
    cdef const double[::1] sv = np.ascontiguousarray(sn, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = hv.shape[0]
    cdef double y, e
    nbar = np.zeros(n, dtype=np.float64)
    integrand = np.zeros(n, dtype=np.float64)
    cdef double[::1] nv = nbar
    cdef double[::1] iv = integrand
    with nogil:
        for i in range(n):
            if hv[i] <= gain_floor:
                continue
            e = expm1(beta / hv[i])
            y = 1.0 / e
            if y > sv[i]:
                nv[i] = (y - sv[i]) / hv[i]
                iv[i] = _g(y) - _g(sv[i])
    return nbar, integrand


def hsw_threshold(h2, sn, double beta, double gain_floor):
    cdef const double[::1] hv = np.ascontiguousarray(h2, dtype=np.float64).ravel()
    cdef const double[::1] sv = np.ascontiguousarray(sn, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = hv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            if hv[i] <= gain_floor:
                ov[i] = -1.0 - sv[i]
            else:
                ov[i] = 1.0 / expm1(beta / hv[i]) - sv[i]
    return out


cdef inline double _floor(double h2, double sn, int scheme) noexcept nogil:
    if scheme == 1:
        return (2.0 * sn + 1.0) / 4.0 / h2
    return (sn + 1.0) / h2


def classical_alloc(h2, sn, double beta, int scheme, double gain_floor):
    cdef const double[::1] hv = np.ascontiguousarray(h2, dtype=np.float64).ravel()
    cdef const double[::1] sv = np.ascontiguousarray(sn, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = hv.shape[0]
    cdef double level = beta / 2.0 if scheme == 1 else beta
    cdef double nb
    nbar = np.zeros(n, dtype=np.float64)
    integrand = np.zeros(n, dtype=np.float64)
    cdef double[::1] nv = nbar
    cdef double[::1] iv = integrand
    with nogil:
        for i in range(n):
            if hv[i] <= gain_floor:
                continue
            nb = level - _floor(hv[i], sv[i], scheme)
            if nb <= 0.0:
                continue
            nv[i] = nb
            if scheme == 1:
                iv[i] = 0.5 * log1p(nb * hv[i] / ((2.0 * sv[i] + 1.0) / 4.0)) * LOG2E
            else:
                iv[i] = log1p(nb * hv[i] / (sv[i] + 1.0)) * LOG2E
    return nbar, integrand


def classical_threshold(h2, sn, double beta, int scheme, double gain_floor):
    cdef const double[::1] hv = np.ascontiguousarray(h2, dtype=np.float64).ravel()
    cdef const double[::1] sv = np.ascontiguousarray(sn, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = hv.shape[0]
    cdef double level = beta / 2.0 if scheme == 1 else beta
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            if hv[i] <= gain_floor:
                ov[i] = -1.0
            else:
                ov[i] = level - _floor(hv[i], sv[i], scheme)
    return out
