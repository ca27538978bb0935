# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled summation of the Kummer series M(a, b, z) over an array of z.

Mirrors :mod:`fracsurv._series_py` exactly; see that module for the contract.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt, ldexp, INFINITY

cnp.import_array()

cdef double _BIG = 1e250
cdef int _SHIFT = 830                # 2**-830 ~ 1e-250, applied when a partial sum grows past _BIG
cdef double _LN2 = 0.6931471805599453


cdef inline double _guard(double a, double b, double z) nogil:
    if b > 0:
        return fabs(z) + 2.0 * fabs(a) + sqrt(b)
    return fabs(z) + 2.0 * fabs(a) + fabs(b)


cdef int _one(double a, double b, double z, double eps, long max_terms,
              long consecutive_small, double *out_log, double *out_sign,
              double *out_cond) nogil:
    cdef double term = 1.0, s = 1.0, sabs = 1.0, scale = 0.0, r
    cdef double kguard = _guard(a, b, z)
    cdef long k, small = 0
    cdef bint done = 0
    if z == 0.0:
        out_log[0] = 0.0
        out_sign[0] = 1.0
        out_cond[0] = 0.0
        return 0
    for k in range(max_terms):
        r = (a + k) / (b + k) * z / (k + 1)
        term *= r
        s += term
        sabs += fabs(term)
        if term == 0.0:
            done = 1
            break
        if sabs > _BIG or fabs(term) > _BIG:
            s = ldexp(s, -_SHIFT)
            sabs = ldexp(sabs, -_SHIFT)
            term = ldexp(term, -_SHIFT)
            scale += _SHIFT * _LN2
        if k + 1 >= kguard and fabs(r) < 1.0 and fabs(term) <= eps * fabs(s):
            small += 1
            if small >= consecutive_small:
                done = 1
                break
        else:
            small = 0
    if not done:
        return 1
    if s == 0.0:
        out_log[0] = -INFINITY
        out_sign[0] = 0.0
        out_cond[0] = INFINITY
    else:
        out_log[0] = log(fabs(s)) + scale
        out_sign[0] = 1.0 if s > 0 else -1.0
        out_cond[0] = log(sabs / fabs(s))
    return 0


def log_series(double a, double b, z, double eps, long max_terms, long consecutive_small):
    """Return ``(log|M|, sign(M), log_cond, failed)`` for each element of ``z``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_log = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_sign = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_cond = np.empty(n)
    cdef double[::1] zv = zz, lv = out_log, sv = out_sign, cv = out_cond
    cdef Py_ssize_t failed = -1
    with nogil:
        for i in range(n):
            if _one(a, b, zv[i], eps, max_terms, consecutive_small, &lv[i], &sv[i], &cv[i]):
                failed = i
                break
    return out_log, out_sign, out_cond, failed
