# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled node-sum kernels; same signatures and results as ``_fallback``."""

from libc.math cimport exp, fabs, pow, M_PI
from scipy.special.cython_special cimport hyp1f1

import numpy as np


cdef inline double _ipow(double a, int k) noexcept nogil:
    cdef double r = 1.0
    while k:
        if k & 1:
            r *= a
        a *= a
        k >>= 1
    return r


cdef inline double _pow(double a, double e, int k) noexcept nogil:
    # k > 0 marks an integer exponent
    return _ipow(a, k) if k > 0 else pow(a, e)


cdef int _int_exponent(double e):
    return <int>e if e == <int>e and 0 < e <= 64 else 0


def power_sums(u, w, double c, double mu, double q, double pc, int order):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef double a, aq, ap, wi
    cdef double SF = 0.0, Sfu = 0.0, Sfp = 0.0
    cdef double inv_q = 1.0 / q, inv_pc = 1.0 / pc
    cdef int kq = _int_exponent(q), kp = _int_exponent(pc)
    with nogil:
        for i in range(n):
            a = fabs(c * uv[i])
            if a == 0.0:
                continue
            aq = _pow(a, q, kq)
            ap = _pow(a, pc, kp)
            wi = wv[i]
            SF += wi * (mu * inv_q * aq + inv_pc * ap)
            Sfu += wi * (mu * aq + ap)
            if order >= 2:
                Sfp += wi * (mu * (q - 1.0) * aq + (pc - 1.0) * ap)
    return SF, Sfu, Sfp


def exp_sums(u, w, double c, double mu, double p, int order):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef double t, z, ap, e, wi
    cdef double b = 0.5 * p
    cdef double alpha0 = 4.0 * M_PI
    cdef int kp = _int_exponent(p)
    cdef double SF = 0.0, Sfu = 0.0, Sfp = 0.0
    for i in range(n):
        t = c * uv[i]
        if t == 0.0:
            continue
        z = alpha0 * t * t
        ap = _pow(fabs(t), p, kp)
        e = exp(z)
        wi = wv[i]
        SF += wi * (mu / p * ap * hyp1f1(b, b + 1.0, z))
        Sfu += wi * (mu * ap * e)
        if order >= 2:
            Sfp += wi * (mu * ap * e * (p - 1.0 + 2.0 * z))
    return SF, Sfu, Sfp


def dirichlet_sum(u, coef):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t i, n = cv.shape[0]
    cdef double d, s = 0.0
    with nogil:
        for i in range(n):
            d = uv[i + 1] - uv[i]
            s += cv[i] * d * d
    return s
