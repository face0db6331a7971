"""Hot loops for complete sums: compiled when available, numpy otherwise.

Set Z8EXPSUM_BACKEND=python to force the numpy implementation.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("Z8EXPSUM_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def ring_poly_phase_hist(coefs, exps, basis, diag, u, N, table, L):
    return _impl.ring_poly_phase_hist(coefs, exps, basis, diag, u, N, table, L)


def int_poly_hist(coefs, exps, q):
    return _impl.int_poly_hist(coefs, exps, q)


def period_sum(values, b, p):
    return _impl.period_sum(values, b, p)


def coset_period(b, g, m, p):
    return _impl.coset_period(b, g, m, p)


__all__ = ["BACKEND", "ring_poly_phase_hist", "int_poly_hist", "period_sum", "coset_period"]
