# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels; same contracts as the numpy versions."""

import math

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libc.math cimport cos, sin, M_PI

cnp.import_array()


cdef inline int64_t _md(int64_t a, int64_t n) noexcept nogil:
    cdef int64_t r = a % n
    return r + n if r < 0 else r


cdef inline void _mul(int64_t* a, int64_t* b, int64_t* out, int64_t n) noexcept nogil:
    cdef int64_t o0, o1, o2, o3
    o0 = _md(a[0] * b[0] - a[1] * b[3] - a[2] * b[2] - a[3] * b[1], n)
    o1 = _md(a[0] * b[1] + a[1] * b[0] - a[2] * b[3] - a[3] * b[2], n)
    o2 = _md(a[0] * b[2] + a[1] * b[1] + a[2] * b[0] - a[3] * b[3], n)
    o3 = _md(a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0], n)
    out[0] = o0
    out[1] = o1
    out[2] = o2
    out[3] = o3


cdef inline void _pow(int64_t* x, int64_t e, int64_t* out, int64_t n) noexcept nogil:
    cdef int64_t base[4]
    cdef int k
    for k in range(4):
        base[k] = x[k]
        out[k] = 0
    out[0] = 1 % n
    while e:
        if e & 1:
            _mul(out, base, out, n)
        e >>= 1
        if e:
            _mul(base, base, base, n)


def ring_poly_phase_hist(coefs, exps, basis, diag, u, N, table, L):
    cdef int64_t n = N
    cdef int64_t l = L
    cdef int64_t m = math.lcm(n, l)
    cdef cnp.int64_t[:, ::1] cf = np.ascontiguousarray(coefs, dtype=np.int64).reshape(-1, 4)
    cdef cnp.int64_t[::1] ex = np.ascontiguousarray(exps, dtype=np.int64)
    cdef cnp.int64_t[::1] dg = np.ascontiguousarray(diag, dtype=np.int64)
    cdef cnp.int64_t[::1] uu = np.ascontiguousarray(u, dtype=np.int64)
    cdef bint has_table = table is not None
    cdef cnp.int64_t[::1] tb = np.ascontiguousarray(table if has_table else np.zeros(1), dtype=np.int64)
    counts_arr = np.zeros(m, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef int64_t nterms = cf.shape[0]
    cdef int64_t x0, x1, x2, x3, idx, t, ph, tw, k
    cdef int64_t x[4]
    cdef int64_t xe[4]
    cdef int64_t term[4]
    cdef int64_t acc[4]
    cdef int64_t c[4]
    cdef int64_t sn = m // n
    cdef int64_t sl = m // l
    with nogil:
        idx = 0
        for x0 in range(dg[0]):
            for x1 in range(dg[1]):
                for x2 in range(dg[2]):
                    for x3 in range(dg[3]):
                        if has_table:
                            tw = tb[idx]
                            if tw < 0:
                                idx += 1
                                continue
                        else:
                            tw = 0
                        x[0] = x0 % n
                        x[1] = x1 % n
                        x[2] = x2 % n
                        x[3] = x3 % n
                        acc[0] = 0
                        acc[1] = 0
                        acc[2] = 0
                        acc[3] = 0
                        for t in range(nterms):
                            _pow(x, ex[t], xe, n)
                            for k in range(4):
                                c[k] = cf[t, k]
                            _mul(xe, c, term, n)
                            for k in range(4):
                                acc[k] = (acc[k] + term[k]) % n
                        ph = 0
                        for k in range(4):
                            ph = (ph + acc[k] * uu[k] % n) % n
                        counts[(ph * sn + tw * sl) % m] += 1
                        idx += 1
    return counts_arr, m


def int_poly_hist(coefs, exps, q):
    cdef int64_t n = q
    cdef cnp.int64_t[::1] cf = np.ascontiguousarray([int(a) % q for a in coefs], dtype=np.int64)
    cdef cnp.int64_t[::1] ex = np.ascontiguousarray(exps, dtype=np.int64)
    counts_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef int64_t x, acc, t, e, base, r
    cdef int64_t nterms = cf.shape[0]
    with nogil:
        for x in range(n):
            acc = 0
            for t in range(nterms):
                e = ex[t]
                base = x
                r = 1 % n
                while e:
                    if e & 1:
                        r = r * base % n
                    e >>= 1
                    if e:
                        base = base * base % n
                acc = (acc + cf[t] * r) % n
            counts[acc] += 1
    return counts_arr


def period_sum(values, b, p):
    v = np.asarray(values, dtype=np.int64)
    return complex(np.sum(np.exp(2j * np.pi * ((int(b) % p) * v % p) / p)))


def coset_period(b, g, m, p):
    """sum_{j<m} exp(2 pi i b g^j / p), powers of g taken sequentially."""
    cdef int64_t pp = p
    cdef int64_t h = _md(b, pp)
    cdef int64_t gg = _md(g, pp)
    cdef int64_t j, mm = m
    cdef double re = 0.0, im = 0.0, t
    cdef double scale = 2.0 * M_PI / pp
    with nogil:
        for j in range(mm):
            t = scale * h
            re += cos(t)
            im += sin(t)
            h = h * gg % pp
    return complex(re, im)
