# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch mean kernels.

Same contract and same branch structure as ``_kernels_py``: contiguous
1-D float64 inputs of equal length, a fresh output array. Loops run
without the GIL so callers may partition work across threads.
"""

import numpy as np

from libc.math cimport exp, expm1, log, log1p, cbrt, fabs

cdef double TAYLOR_SWITCH = 1e-6
cdef double ENDPOINT = 1e-15
cdef double DEFORMATION_SWITCH = 1e-12


cdef inline double _log_ratio(double a, double b) noexcept nogil:
    cdef double q = a / b
    if 0.5 <= q <= 2.0:
        return log1p((a - b) / b)
    return log(a) - log(b)


cdef inline double _geo(double a, double b, double v) noexcept nogil:
    if a == b or v == 0.0:
        return a
    if v == 1.0:
        return b
    return a * exp(-v * _log_ratio(a, b))


cdef inline double _log_mean(double a, double b) noexcept nogil:
    cdef double x
    if a == b:
        return a
    x = _log_ratio(a, b)
    if fabs(x) < TAYLOR_SWITCH:
        return b * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)))
    return (a - b) / x


cdef inline double _wlm(double a, double b, double v) noexcept nogil:
    cdef double x, w, w2, w3, c2, c3
    if a == b or v < ENDPOINT:
        return a
    if v > 1.0 - ENDPOINT:
        return b
    x = _log_ratio(a, b)
    w = 1.0 - v
    if fabs(x) < TAYLOR_SWITCH:
        w2 = w * w
        w3 = w2 * w
        c2 = (v * w2 + w * (1.0 + w + w2)) / 6.0
        c3 = (v * w3 + w * (1.0 + w + w2 + w3)) / 24.0
        return b * (1.0 + x * (w + x * (c2 + x * c3)))
    return b * ((w / v) * exp(w * x) * expm1(v * x) + (v / w) * expm1(w * x)) / x


def log_ratio(double[::1] a, double[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _log_ratio(a[i], b[i])
    return out


def weighted_arithmetic(double[::1] a, double[::1] b, double[::1] v):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = a[i] if a[i] == b[i] else (1.0 - v[i]) * a[i] + v[i] * b[i]
    return out


def weighted_geometric(double[::1] a, double[::1] b, double[::1] v):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _geo(a[i], b[i], v[i])
    return out


def weighted_harmonic(double[::1] a, double[::1] b, double[::1] v):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = a[i] if a[i] == b[i] else 1.0 / ((1.0 - v[i]) / a[i] + v[i] / b[i])
    return out


def log_mean(double[::1] a, double[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _log_mean(a[i], b[i])
    return out


def weighted_log_mean(double[::1] a, double[::1] b, double[::1] v):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _wlm(a[i], b[i], v[i])
    return out


def heinz(double[::1] a, double[::1] b, double[::1] v):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double x
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            if a[i] == b[i]:
                o[i] = a[i]
            else:
                x = _log_ratio(a[i], b[i])
                o[i] = 0.5 * (a[i] * exp(-v[i] * x) + a[i] * exp((v[i] - 1.0) * x))
    return out


def power_mean_third(double[::1] a, double[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double m
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            if a[i] == b[i]:
                o[i] = a[i]
            else:
                m = 0.5 * (cbrt(a[i]) + cbrt(b[i]))
                o[i] = m * m * m
    return out


def identric(double[::1] a, double[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double x, x2, q
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            if a[i] == b[i]:
                o[i] = a[i]
                continue
            x = _log_ratio(a[i], b[i])
            if fabs(x) < TAYLOR_SWITCH:
                x2 = x * x
                q = x * 0.5 + x2 / 12.0 - x2 * x2 / 720.0
            else:
                q = x / -expm1(-x) - 1.0
            o[i] = b[i] * exp(q)
    return out


def contraharmonic(double[::1] a, double[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double m, x, y
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            m = a[i] if a[i] > b[i] else b[i]
            x = a[i] / m
            y = b[i] / m
            o[i] = m * (x * x + y * y) / (x + y)
    return out


def r_log(double[::1] x, double[::1] r):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double lx
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            lx = log(x[i])
            if fabs(r[i]) < DEFORMATION_SWITCH:
                o[i] = lx
            else:
                o[i] = expm1(r[i] * lx) / r[i]
    return out
