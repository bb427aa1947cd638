# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels; see _pykernels.py for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, pow, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"


def kahan_sum(values):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef Py_ssize_t i
    cdef double total = 0.0, comp = 0.0, t, x
    for i in range(v.shape[0]):
        x = v[i]
        t = total + x
        if fabs(total) >= fabs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def psi_moduli(x, double a_m):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0], m = xv.shape[1], i, j
    cdef double[::1] out = np.empty(N)
    cdef double logs, sq, c = 2.0 * a_m / (m + 1), xi
    for i in range(N):
        logs = 0.0
        sq = 0.0
        for j in range(m):
            xi = xv[i, j]
            sq += xi * xi
            if xi == 0.0:
                logs = -INFINITY
            elif logs != -INFINITY:
                logs += log(xi)
        out[i] = c * logs - a_m * log1p(sq)
    return np.asarray(out)


def reduction_points(x, int n, int k):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0], m = xv.shape[1], i, j, h, base
    l1_arr = np.empty((N, m))
    l2_arr = np.empty((N, m))
    cdef double[:, ::1] l1 = l1_arr
    cdef double[:, ::1] l2 = l2_arr
    cdef double acc, z0, zeta, gacc, gamma
    for i in range(N):
        if n > 1:
            acc = 0.0
            for j in range(n - 1):
                acc += log(xv[i, j])
            z0 = exp(acc / (n - 1))
            for j in range(n - 1):
                l1[i, j] = z0
                l2[i, j] = z0
        gacc = 0.0
        for h in range(k - 1):
            base = n - 1 + h * n
            acc = 0.0
            for j in range(n):
                acc += log(xv[i, base + j])
            zeta = exp(acc / n)
            gacc += log(zeta)
            for j in range(n):
                l1[i, base + j] = zeta
        gamma = exp(gacc / (k - 1))
        for j in range(n - 1, m):
            l2[i, j] = gamma
    return l1_arr, l2_arr


def tian_integrand(x, double alpha):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0], m = xv.shape[1], i, j
    cdef double[::1] out = np.empty(N)
    cdef double s, lp
    for i in range(N):
        s = 0.0
        lp = 0.0
        for j in range(m):
            s += xv[i, j]
            lp += log(xv[i, j])
        out[i] = exp((alpha - 1.0) * (m + 1) * log1p(s) - alpha * lp)
    return np.asarray(out)


def tian_sample(t, double alpha, double s=1.0):
    cdef const double[:, ::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t N = tv.shape[0], m = tv.shape[1], i, j
    x_arr = np.empty((N, m))
    cdef double[:, ::1] xv = x_arr
    cdef double[::1] logj = np.empty(N)
    cdef double expo = s / (1.0 - alpha), lc = log(s) - log(1.0 - alpha)
    cdef double acc, ti, lv, l1m, coef = alpha * expo + s - 1.0
    for i in range(N):
        acc = 0.0
        for j in range(m):
            ti = tv[i, j]
            l1m = log1p(-ti)
            lv = log(ti) - l1m
            xv[i, j] = exp(expo * lv)
            # log x = expo * lv, so alpha log x + (s-1) lv folds into one term
            acc += coef * lv - 2.0 * l1m
        logj[i] = acc + m * lc
    return x_arr, np.asarray(logj)


def tian_psi_weights(t, double alpha, double s=1.0):
    cdef const double[:, ::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t N = tv.shape[0], m = tv.shape[1], i, j
    cdef double[::1] out = np.empty(N)
    cdef double expo = s / (1.0 - alpha), lc = log(s) - log(1.0 - alpha)
    cdef double sx, lj, ti, lv, l1m
    for i in range(N):
        sx = 0.0
        lj = 0.0
        for j in range(m):
            ti = tv[i, j]
            l1m = log1p(-ti)
            lv = log(ti) - l1m
            sx += exp(expo * lv)
            lj += (s - 1.0) * lv - 2.0 * l1m
        out[i] = exp((alpha - 1.0) * (m + 1) * log1p(sx) + lj + m * lc)
    return np.asarray(out)
