# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def play_nodes(u, double r, double w0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n, dtype=np.float64)
    cdef double prev = w0, lo, hi
    cdef Py_ssize_t i
    w[0] = prev
    for i in range(1, n):
        lo = uu[i] - r
        hi = uu[i] + r
        if prev < lo:
            prev = lo
        elif prev > hi:
            prev = hi
        w[i] = prev
    return w


def project_stop(u, double r, double z0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(n, dtype=np.float64)
    cdef double cur = z0
    cdef Py_ssize_t i
    if cur > r:
        cur = r
    elif cur < -r:
        cur = -r
    z[0] = cur
    for i in range(1, n):
        cur = cur + (uu[i] - uu[i - 1])
        if cur > r:
            cur = r
        elif cur < -r:
            cur = -r
        z[i] = cur
    return z


cdef inline double _interp(const double[:] t, const double[:] v, double x, Py_ssize_t n):
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if x <= t[0]:
        return v[0]
    if x >= t[n - 1]:
        return v[n - 1]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if t[mid] <= x:
            lo = mid
        else:
            hi = mid
    return v[lo] + (v[hi] - v[lo]) * (x - t[lo]) / (t[hi] - t[lo])


def window_oscillation(t, v, starts, double eps):
    cdef const double[:] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[:] ss = np.ascontiguousarray(starts, dtype=np.float64)
    cdef Py_ssize_t n = tt.shape[0], m = ss.shape[0], k, i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double s, e, vs, ve, hi, lo
    cdef Py_ssize_t[:] first = np.searchsorted(np.asarray(tt), np.asarray(ss), side="right").astype(np.intp)
    for k in range(m):
        s = ss[k]
        e = s + eps
        vs = _interp(tt, vv, s, n)
        ve = _interp(tt, vv, e, n)
        hi = vs if vs > ve else ve
        lo = vs if vs < ve else ve
        i = first[k]
        while i < n and tt[i] < e:
            if vv[i] > hi:
                hi = vv[i]
            if vv[i] < lo:
                lo = vv[i]
            i += 1
        out[k] = hi - lo
    return out
