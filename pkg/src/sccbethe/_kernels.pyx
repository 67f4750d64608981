# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs, INFINITY

cnp.import_array()


cdef inline void _inverses(double p, double d, double *im, double *ip) noexcept nogil:
    if p > 0:
        im[0] = -1.0 / d
        ip[0] = 1.0 / (2.0 + d)
    else:
        im[0] = 1.0 / (2.0 - d)
        ip[0] = 1.0 / d


def pole_inverses(const double[::1] poles, const double[::1] offsets):
    cdef Py_ssize_t n = offsets.shape[0], i
    out_m = np.empty(n)
    out_p = np.empty(n)
    cdef double[::1] om = out_m, op = out_p
    cdef double im, ip
    for i in range(n):
        _inverses(poles[i], offsets[i], &im, &ip)
        om[i] = im
        op[i] = ip
    return out_m, out_p


def richardson_residual(const double[::1] poles, const double[::1] offsets, double g, double d0, double d1):
    cdef Py_ssize_t n = offsets.shape[0], a, b
    out = np.empty(n)
    cdef double[::1] res = out
    cdef double im, ip, s
    with nogil:
        for a in range(n):
            _inverses(poles[a], offsets[a], &im, &ip)
            s = 0.0
            for b in range(n):
                if b != a:
                    s += 1.0 / ((poles[a] - poles[b]) + (offsets[a] - offsets[b]))
            res[a] = 1.0 + 4.0 * g * (d0 * im - d1 * ip) - 4.0 * g * s
    return out


def richardson_system(const double[::1] poles, const double[::1] offsets, double g, double d0, double d1):
    cdef Py_ssize_t n = offsets.shape[0], a, b
    out_r = np.empty(n)
    out_j = np.empty((n, n))
    cdef double[::1] res = out_r
    cdef double[:, ::1] jac = out_j
    cdef double im, ip, s, s2, inv
    with nogil:
        for a in range(n):
            _inverses(poles[a], offsets[a], &im, &ip)
            s = 0.0
            s2 = 0.0
            for b in range(n):
                if b != a:
                    inv = 1.0 / ((poles[a] - poles[b]) + (offsets[a] - offsets[b]))
                    s += inv
                    s2 += inv * inv
                    jac[a, b] = -4.0 * g * inv * inv
            res[a] = 1.0 + 4.0 * g * (d0 * im - d1 * ip) - 4.0 * g * s
            jac[a, a] = 4.0 * g * (d0 * im * im + d1 * ip * ip + s2)
    return out_r, out_j


def log_potential(const double[::1] poles, const double[::1] offsets, double g, double d0, double d1):
    cdef Py_ssize_t n = offsets.shape[0], a, b
    cdef double total = 0.0, dm, dp
    with nogil:
        for a in range(n):
            if poles[a] > 0:
                dm = fabs(offsets[a])
                dp = fabs(2.0 + offsets[a])
            else:
                dm = fabs(2.0 - offsets[a])
                dp = fabs(offsets[a])
            total += d0 * log(dm) + d1 * log(dp) - (poles[a] + offsets[a]) / (4.0 * g)
            for b in range(a + 1, n):
                total += log(fabs((poles[a] - poles[b]) + (offsets[a] - offsets[b])))
    return total


def ansatz_log_coefficients(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i, j
    coef_arr = np.zeros(n + 1)
    cdef double[::1] coef = coef_arr
    cdef double log_scale = 0.0, peak = 1.0, ai, bi
    coef[0] = 1.0
    with nogil:
        for i in range(n):
            ai = a[i]
            bi = b[i]
            # in-place update from the top so coef[j-1] is still the old value
            coef[i + 1] = -bi * coef[i]
            j = i
            while j > 0:
                coef[j] = ai * coef[j] - bi * coef[j - 1]
                j -= 1
            coef[0] = ai * coef[0]
            peak = 0.0
            for j in range(i + 2):
                if fabs(coef[j]) > peak:
                    peak = fabs(coef[j])
            if peak == 0.0:
                break
            log_scale += log(peak)
            for j in range(i + 2):
                coef[j] /= peak
    if peak == 0.0 and n > 0:
        return np.zeros(n + 1), np.full(n + 1, -np.inf)
    logs = np.empty(n + 1)
    signs = np.empty(n + 1)
    cdef double[::1] lv = logs, sv = signs
    for j in range(n + 1):
        if coef[j] == 0.0:
            lv[j] = -INFINITY
            sv[j] = 0.0
        else:
            lv[j] = log(fabs(coef[j])) + log_scale
            sv[j] = 1.0 if coef[j] > 0 else -1.0
    return signs, logs
