# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops over packed link configurations and phase grids.

Same contracts as ``_pykernels``; see that module for the encoding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, M_PI

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline int _link(i64 code, int n) nogil:
    return 1 if (code >> n) & 1 else -1


cdef inline int _matter(i64 code, int n, int n_sites) nogil:
    cdef int prev = (n - 1 + n_sites) % n_sites
    cdef int stag = 1 if n % 2 == 0 else -1
    return stag - _link(code, prev) + _link(code, n)


cdef Py_ssize_t _find(const i64[::1] codes, i64 key) nogil:
    cdef Py_ssize_t lo = 0, hi = codes.shape[0] - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if codes[mid] == key:
            return mid
        if codes[mid] < key:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


def enumerate_sector(int n_sites):
    cdef i64 total = (<i64>1) << n_sites
    cdef i64 code
    cdef int n, s
    cdef bint ok
    out = []
    for code in range(total):
        ok = True
        for n in range(n_sites):
            s = _matter(code, n, n_sites)
            if s != 1 and s != -1:
                ok = False
                break
        if ok:
            out.append(code)
    return np.asarray(out, dtype=np.int64)


def hopping_moves(codes_in, int n_sites):
    cdef const i64[::1] codes = np.ascontiguousarray(codes_in, dtype=np.int64)
    cdef Py_ssize_t i, dim = codes.shape[0]
    cdef int n, nxt
    cdef i64 code
    src = []
    dst = []
    for i in range(dim):
        code = codes[i]
        for n in range(n_sites):
            nxt = (n + 1) % n_sites
            if (_matter(code, n, n_sites) == -1 and _link(code, n) == -1
                    and _matter(code, nxt, n_sites) == 1):
                src.append(i)
                dst.append(_find(codes, code | ((<i64>1) << n)))
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def string_moves(codes_in, int n_sites):
    cdef const i64[::1] codes = np.ascontiguousarray(codes_in, dtype=np.int64)
    cdef Py_ssize_t i, dim = codes.shape[0]
    cdef int m, n, dc, dcc, p, half = n_sites // 2
    cdef i64 code, mask
    cdef bint ok
    src = []
    dst = []
    dist = []
    # same term order as the numpy kernel: (m, n) outer, states inner
    for m in range(2):
        for n in range(n_sites):
            dc = (n - m + n_sites) % n_sites
            dcc = n_sites - dc
            if n == m:
                for i in range(dim):
                    if _matter(codes[i], m, n_sites) == 1:
                        src.append(i)
                        dst.append(i)
                        dist.append(0)
                continue
            if dc <= half:
                mask = 0
                for p in range(dc):
                    mask |= (<i64>1) << ((m + p) % n_sites)
                for i in range(dim):
                    code = codes[i]
                    ok = (_matter(code, m, n_sites) == 1 and _matter(code, n, n_sites) == -1
                          and (code & mask) == mask)
                    if ok:
                        src.append(i)
                        dst.append(_find(codes, code & ~mask))
                        dist.append(dc)
            if dcc <= half:
                mask = 0
                for p in range(dcc):
                    mask |= (<i64>1) << ((n + p) % n_sites)
                for i in range(dim):
                    code = codes[i]
                    ok = (_matter(code, m, n_sites) == 1 and _matter(code, n, n_sites) == -1
                          and (code & mask) == 0)
                    if ok:
                        src.append(i)
                        dst.append(_find(codes, code | mask))
                        dist.append(-dcc)
    return (np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
            np.asarray(dist, dtype=np.int64))


cdef inline double _wrap(double d) nogil:
    return d - 2.0 * M_PI * ceil((d - M_PI) / (2.0 * M_PI))


def wrap_angles(delta):
    arr = np.asarray(delta, dtype=float)
    flat = np.ascontiguousarray(arr).ravel()
    cdef double[::1] v = flat.copy()
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        v[i] = _wrap(v[i])
    return np.asarray(v).reshape(arr.shape)


def plaquette_sums(phase_in):
    cdef const double[:, ::1] ph = np.ascontiguousarray(phase_in, dtype=float)
    cdef Py_ssize_t nx = ph.shape[0], ny = ph.shape[1], i, j
    out = np.zeros((nx - 1, ny - 1), dtype=float)
    cdef double[:, ::1] w = out
    cdef double s
    for i in range(nx - 1):
        for j in range(ny - 1):
            s = (_wrap(ph[i + 1, j] - ph[i, j]) + _wrap(ph[i + 1, j + 1] - ph[i + 1, j])
                 - _wrap(ph[i + 1, j + 1] - ph[i, j + 1]) - _wrap(ph[i, j + 1] - ph[i, j]))
            w[i, j] = s / (2.0 * M_PI)
    return out
