# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, INFINITY

cnp.import_array()

DEF GOLDEN = 0.6180339887498949
DEF CDF_CAP = 1.0 - 1e-15


cdef inline double _ratio(int code, double r, double k) noexcept nogil:
    if code == 0:
        return 1.0 / (k + 1.0)
    if code == 1:
        return 1.0
    if code == 2:
        return (k + r) / (k + 1.0)
    return (k + 1.0) / (k + 2.0)


cdef inline double _log_norm(int code, double r, double t) noexcept nogil:
    if code == 0:
        return t
    if code == 1:
        return -log1p(-t)
    if code == 2:
        return -r * log1p(-t)
    if t < 1e-5:
        return log1p(t / 2.0 + t * t / 3.0 + t * t * t / 4.0)
    return log(-log1p(-t) / t)


cdef inline double _lin(int code, double r, double t, const double[::1] ks,
                        const double[::1] log_b, const double[::1] coef, double offset) noexcept nogil:
    cdef Py_ssize_t j, m = ks.shape[0]
    cdef double lt, ln = _log_norm(code, r, t), acc = 0.0, e
    if t > 0:
        lt = log(t)
    else:
        lt = -INFINITY
    for j in range(m):
        if ks[j] == 0:
            e = log_b[j] - ln
        elif t > 0:
            e = log_b[j] + ks[j] * lt - ln
        else:
            continue
        acc += coef[j] * exp(e)
    return acc + offset


def invert_psd(int code, double r, const double[::1] thetas, const double[::1] u, const double[::1] f0):
    cdef Py_ssize_t i, n = thetas.shape[0]
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef double prob, cdf, th
    cdef cnp.int64_t k
    with nogil:
        for i in range(n):
            prob = f0[i]
            cdf = prob
            th = thetas[i]
            k = 0
            while u[i] > cdf and cdf <= CDF_CAP:
                prob *= _ratio(code, r, <double>k) * th
                cdf += prob
                k += 1
            o[i] = k
    return out


def lin_grad(int code, double r, const double[::1] thetas, const double[::1] ks,
             const double[::1] log_b, const double[::1] coef, double offset):
    cdef Py_ssize_t i, n = thetas.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _lin(code, r, thetas[i], ks, log_b, coef, offset)
    return out


def golden_max_lin(int code, double r, const double[::1] a_in, const double[::1] b_in,
                   const double[::1] ks, const double[::1] log_b, const double[::1] coef,
                   double offset, int iters):
    cdef Py_ssize_t i, n = a_in.shape[0]
    cdef int it
    cdef double a, b, c, d, fc, fd, fa, fb, x, fx
    xs = np.empty(n)
    fs = np.empty(n)
    cdef double[::1] xo = xs
    cdef double[::1] fo = fs
    with nogil:
        for i in range(n):
            a = a_in[i]
            b = b_in[i]
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            fc = _lin(code, r, c, ks, log_b, coef, offset)
            fd = _lin(code, r, d, ks, log_b, coef, offset)
            for it in range(iters):
                if fc < fd:
                    a = c
                    c = d
                    fc = fd
                    d = a + GOLDEN * (b - a)
                    fd = _lin(code, r, d, ks, log_b, coef, offset)
                else:
                    b = d
                    d = c
                    fd = fc
                    c = b - GOLDEN * (b - a)
                    fc = _lin(code, r, c, ks, log_b, coef, offset)
            if fc >= fd:
                x = c
                fx = fc
            else:
                x = d
                fx = fd
            fa = _lin(code, r, a_in[i], ks, log_b, coef, offset)
            fb = _lin(code, r, b_in[i], ks, log_b, coef, offset)
            if fa > fx:
                x = a_in[i]
                fx = fa
            if fb > fx:
                x = b_in[i]
                fx = fb
            xo[i] = x
            fo[i] = fx
    return xs, fs
