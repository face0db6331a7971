"""Compare the compiled and numpy kernel backends on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import contextlib
import importlib.util
import time

import numpy as np

from z8expsum import kernels
from z8expsum.expsums import PolySpec, complete_sum
from z8expsum.kernels import _pykernels
from z8expsum.ring import CycInt, prime_ideals_above


@contextlib.contextmanager
def backend(name: str):
    saved = kernels._impl
    if name == "python":
        kernels._impl = _pykernels
    else:
        from z8expsum.kernels import _ckernels

        kernels._impl = _ckernels
    try:
        yield
    finally:
        kernels._impl = saved


def cases():
    p = prime_ideals_above(337)[0]
    quartic = PolySpec.from_terms([(1, 4), (CycInt(4, 0, 0, 0), 2)])
    yield "ring complete sum, N=337^2", lambda: complete_sum(quartic, p * p)
    coefs = np.array([1, 1], dtype=np.int64)
    exps = np.array([3, 1], dtype=np.int64)
    yield "int poly histogram, q=65537", lambda: kernels.int_poly_hist(coefs, exps, 65537)
    yield "coset period, p=1000003", lambda: kernels.coset_period(5, 2, 500001, 1000003)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = ["python"]
    if importlib.util.find_spec("z8expsum.kernels._ckernels"):
        names.insert(0, "cython")
    else:
        print("compiled backend not built; timing numpy only")
    print(f"{'case':32s}" + "".join(f"{n:>12s}" for n in names) + "   agree")
    for label, fn in cases():
        times, vals = [], []
        for name in names:
            with backend(name):
                best = float("inf")
                for _ in range(args.repeat):
                    t0 = time.perf_counter()
                    v = fn()
                    best = min(best, time.perf_counter() - t0)
            times.append(best)
            vals.append(np.asarray(complex(v) if hasattr(v, "value") else v))
        agree = all(np.allclose(vals[0], v, atol=1e-6) for v in vals[1:])
        print(f"{label:32s}" + "".join(f"{t * 1000:10.1f}ms" for t in times) + f"   {agree}")


if __name__ == "__main__":
    main()
