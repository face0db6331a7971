"""Pure numpy versions of the enumeration kernels."""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 1 << 18


def _mul(a, b, n):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        (a0 * b0 - a1 * b3 - a2 * b2 - a3 * b1) % n,
        (a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2) % n,
        (a0 * b2 + a1 * b1 + a2 * b0 - a3 * b3) % n,
        (a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0) % n,
    )


def _pow(x, e, n):
    result = None
    base = x
    while e:
        if e & 1:
            result = base if result is None else _mul(result, base, n)
        e >>= 1
        if e:
            base = _mul(base, base, n)
    if result is None:
        one = np.ones_like(x[0]) % n
        zero = np.zeros_like(x[0])
        result = (one, zero, zero, zero)
    return result


def ring_poly_phase_hist(coefs, exps, basis, diag, u, N, table, L):
    """Histogram over Z/M, M = lcm(N, L), of the phase of twist(x) e(f(x)/c).

    Residues x run over the mixed-radix box given by `diag`; rows with a
    negative twist exponent are skipped.
    """
    N = int(N)
    L = int(L)
    M = math.lcm(N, L)
    total = int(np.prod(diag))
    counts = np.zeros(M, dtype=np.int64)
    d = [int(v) for v in diag]
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        rest = idx
        x3 = rest % d[3]
        rest = rest // d[3]
        x2 = rest % d[2]
        rest = rest // d[2]
        x1 = rest % d[1]
        x0 = rest // d[1]
        x = (x0 % N, x1 % N, x2 % N, x3 % N)
        acc = [np.zeros_like(x0) for _ in range(4)]
        for coef, e in zip(coefs, exps):
            xe = _pow(x, int(e), N)
            term = _mul(xe, tuple(int(v) for v in coef), N)
            acc = [(a + t) % N for a, t in zip(acc, term)]
        ph = np.zeros_like(x0)
        for j in range(4):
            ph = (ph + acc[j] * int(u[j]) % N) % N
        if table is not None:
            tw = np.asarray(table)[idx]
            keep = tw >= 0
            ph = (ph[keep] * (M // N) + tw[keep] * (M // L)) % M
        else:
            ph = ph * (M // N)
        counts += np.bincount(ph, minlength=M)
    return counts, M


def int_poly_hist(coefs, exps, q):
    """Histogram of f(x) mod q for x in [0, q)."""
    q = int(q)
    counts = np.zeros(q, dtype=np.int64)
    for start in range(0, q, _CHUNK):
        x = np.arange(start, min(q, start + _CHUNK), dtype=np.int64)
        acc = np.zeros_like(x)
        for a, e in zip(coefs, exps):
            acc = (acc + int(a) % q * _int_pow(x, int(e), q)) % q
        counts += np.bincount(acc, minlength=q)
    return counts


def _int_pow(x, e, q):
    result = np.ones_like(x) % q
    base = x % q
    while e:
        if e & 1:
            result = result * base % q
        base = base * base % q
        e >>= 1
    return result


def period_sum(values, b, p):
    """sum_h exp(2 pi i b h / p) over the given residues h."""
    v = np.asarray(values, dtype=np.int64)
    return complex(np.sum(np.exp(2j * np.pi * ((int(b) % p) * v % p) / p)))


def coset_period(b, g, m, p):
    """sum_{j<m} exp(2 pi i b g^j / p), powers of g taken sequentially."""
    p, m = int(p), int(m)
    if m == 0:
        return 0j
    block = max(1, math.isqrt(m))
    small = np.empty(block, dtype=np.int64)
    h = 1
    for j in range(block):
        small[j] = h
        h = h * int(g) % p
    step = h  # g^block
    total = 0j
    lead = int(b) % p
    for start in range(0, m, block):
        cnt = min(block, m - start)
        vals = lead * small[:cnt] % p
        total += complex(np.sum(np.exp(2j * np.pi * vals / p)))
        lead = lead * step % p
    return total
