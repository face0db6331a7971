"""Sums of complete exponential sums.

Two families live here.  Over Z, S(f, X) = sum_{c <= X} sum_{x mod c} e(f(x)/c)
is evaluated modulus by modulus through the Chinese remainder theorem, with
memoized closed forms at prime powers.  Over Z[w], smoothly weighted sums of
quartic and quadratic sums over moduli c = 1 mod 4 are evaluated together with
their Kloosterman and cross-term decomposition, the predicted main term, and
the Dirichlet partial sums attached to the constant term of the theta series.
"""

from __future__ import annotations

import cmath
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, interpolate, stats
from sympy import primitive_root, primerange

from . import kernels
from .characters import (
    AdditiveMode,
    DirichletChar,
    power_symbol,
    power_symbol_array,
    root_of_unity,
)
from .ring import (
    ONE,
    TORSION,
    FUNDAMENTAL_UNIT,
    CycInt,
    Modulus,
    RingError,
    as_cycint,
    canonical_associate,
    crt,
    euclid_gcd,
    inverse_mod,
    mul_array,
    normalize_assoc,
    prime_ideals_above,
    unit_inverse,
)


class SeriesError(ValueError):
    """Bad series parameters (empty grid, enumeration too large, ...)."""


def phi_ideal(c) -> int:
    """Euler phi of the ideal (c): the number of unit residues."""
    c = c if isinstance(c, Modulus) else Modulus(as_cycint(c))
    n = c.residue_count
    out = n
    for p, _ in c.factors:
        q = abs(p.norm())
        out = out // q * (q - 1)
    return out


# ---------------------------------------------------------------------------
# plumbing types


@dataclass(frozen=True)
class SmoothWeight:
    """Compactly supported test function on (a, b).

    Default is the bump exp(-1/(1-u^2)), u the support rescaled to (-1, 1).
    With `samples` the weight is a cubic spline through the given points,
    clipped at zero and vanishing outside the sample range.
    """

    a: float = 0.5
    b: float = 2.0
    scale: float = 1.0
    samples: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError(f"need 0 < a < b, got ({self.a}, {self.b})")
        if self.samples is not None:
            ys, vs = (np.asarray(t, dtype=float) for t in self.samples)
            if len(ys) != len(vs) or len(ys) < 4:
                raise ValueError("need at least 4 matching (y, value) samples")
            if np.any(np.diff(ys) <= 0):
                raise ValueError("sample abscissae must increase")
            object.__setattr__(self, "_spline", interpolate.CubicSpline(ys, vs))

    @classmethod
    def from_samples(cls, ys: Sequence[float], values: Sequence[float]) -> "SmoothWeight":
        ys = tuple(float(y) for y in ys)
        return cls(ys[0], ys[-1], 1.0, (ys, tuple(float(v) for v in values)))

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    def scaled(self, k: float) -> "SmoothWeight":
        return SmoothWeight(self.a, self.b, self.scale * k, self.samples)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y > self.a) & (y < self.b)
        out = np.zeros_like(y)
        if self.samples is None:
            u = 2 * (y[inside] - self.a) / (self.b - self.a) - 1
            out[inside] = np.exp(-1.0 / (1.0 - u * u))
        else:
            out[inside] = np.maximum(self._spline(y[inside]), 0.0)
        out *= self.scale
        return out if out.ndim else float(out)


@dataclass
class SeriesPoint:
    X: float
    value: complex
    term_count: int
    elapsed: float  # seconds
    meta: dict = field(default_factory=dict)

    CSV_HEADER = ("X", "re", "im", "abs", "term_count", "elapsed_ms")

    def csv_row(self, with_time: bool = True) -> list[str]:
        v = complex(self.value)
        ms = f"{self.elapsed * 1000:.3f}" if with_time else "0"
        return [repr(float(self.X)), repr(v.real), repr(v.imag), repr(abs(v)),
                str(self.term_count), ms]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    points_used: int


def mellin_hat(psi: SmoothWeight, s: float) -> float:
    """int_0^oo psi(y) y^(s-1) dy by adaptive quadrature on the support."""
    a, b = psi.support
    val, _ = integrate.quad(lambda y: float(psi(y)) * y ** (s - 1), a, b,
                            epsabs=1e-12, epsrel=1e-12, limit=400)
    return float(val)


def fit_exponent(points: Sequence[SeriesPoint], window: int | None = None) -> FitResult:
    """Least-squares slope of log|value| against log X."""
    usable = [pt for pt in points if abs(complex(pt.value)) > 0 and pt.X > 0
              and math.isfinite(abs(complex(pt.value)))]
    usable.sort(key=lambda pt: pt.X)
    if window is not None:
        usable = usable[-int(window):]
    if len(usable) < 3:
        raise SeriesError(f"need at least 3 usable points, got {len(usable)}")
    lx = np.log([float(pt.X) for pt in usable])
    ly = np.log([abs(complex(pt.value)) for pt in usable])
    res = stats.linregress(lx, ly)
    stderr = float(res.stderr) if math.isfinite(res.stderr) else 0.0
    return FitResult(float(res.slope), float(res.intercept), max(stderr, 0.0), len(usable))


def geometric_grid(x_min: float, x_max: float, ratio: float = 2.0) -> list[float]:
    if x_min <= 0 or x_max < x_min or ratio <= 1:
        raise SeriesError("grid needs 0 < X_min <= X_max and ratio > 1")
    out = []
    x = float(x_min)
    while x <= x_max * (1 + 1e-12):
        out.append(int(round(x)) if abs(x - round(x)) < 1e-9 else x)
        x *= ratio
    return out


# ---------------------------------------------------------------------------
# Patterson sums over Z


def _eval_mod(terms: Sequence[tuple[int, int]], x: int, c: int) -> int:
    return sum(a * pow(x, e, c) for a, e in terms) % c


def direct_complete_sum(terms: Sequence[tuple[int, int]], c: int) -> complex:
    """sum_{x mod c} e(f(x)/c) accumulated term by term in x order."""
    total = 0j
    for x in range(c):
        total += cmath.exp(2j * math.pi * _eval_mod(terms, x, c) / c)
    return total


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _shape(terms: Sequence[tuple[int, int]], p: int, k: int):
    """Which closed form applies to f modulo p^k."""
    q = p**k
    red = {e: a % q for a, e in terms if a % q}
    nonconst = {e: a for e, a in red.items() if e > 0}
    if p != 2 and nonconst and max(nonconst) == 2 and red.get(2, 0) % p:
        return "quadratic", (red.get(2, 0), red.get(1, 0), red.get(0, 0))
    if k == 1 and len(nonconst) == 1:
        (n, alpha), = nonconst.items()
        if (n * alpha) % p:
            return "monomial", (n, alpha, red.get(0, 0))
    return "generic", None


def local_sums(terms: Sequence[tuple[int, int]], p: int, k: int,
               a_values: Sequence[int]) -> list[complex]:
    """sum_{x mod p^k} e(a f(x)/p^k) for each a coprime to p."""
    q = p**k
    kind, data = _shape(terms, p, k)
    out: list[complex] = []
    if kind == "quadratic":
        alpha, beta, gamma = data
        const = (gamma - beta * beta * pow(4 * alpha, -1, q)) % q
        eps = 1 if q % 4 == 1 else 1j
        root = math.sqrt(q)
        for a in a_values:
            ph = cmath.exp(2j * math.pi * (a * const % q) / q)
            sym = _legendre(a * alpha, p) ** k
            out.append(ph * sym * eps * root)
        return out
    if kind == "monomial":
        n, alpha, gamma = data
        d = math.gcd(n, p - 1)
        if d == 1:
            return [0j for _ in a_values]
        m = (p - 1) // d
        gd = pow(int(primitive_root(p)), d, p)
        periods: dict[int, complex] = {}
        for a in a_values:
            b = a * alpha % p
            key = pow(b, m, p)
            if key not in periods:
                periods[key] = kernels.coset_period(b, gd, m, p)
            ph = cmath.exp(2j * math.pi * (a * gamma % p) / p)
            out.append(ph * (1 + d * periods[key]))
        return out
    coefs = [a for a, _ in terms]
    exps = [e for _, e in terms]
    hist = np.asarray(kernels.int_poly_hist(coefs, exps, q), dtype=float)
    if len(a_values) > 16:
        spec = np.fft.ifft(hist) * q
        return [complex(spec[a % q]) for a in a_values]
    nz = np.nonzero(hist)[0]
    for a in a_values:
        out.append(complex(np.sum(hist[nz] * np.exp(2j * np.pi * (a * nz % q) / q))))
    return out


class PrimePowerCache:
    """(f mod p^k, p^k) -> {a: value}; writes are idempotent."""

    def __init__(self):
        self._store: dict[tuple, dict[int, complex]] = {}

    @staticmethod
    def key(terms, q: int) -> tuple:
        return (q, tuple(sorted((e, a % q) for a, e in terms)))

    def lookup(self, terms, q: int) -> dict[int, complex]:
        return self._store.setdefault(self.key(terms, q), {})

    def clear(self) -> None:
        self._store.clear()

    def __len__(self):
        return len(self._store)


PRIME_POWER_CACHE = PrimePowerCache()


def _spf_sieve(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p:: p]
            block[block == 0] = p
            spf[p * p:: p] = block
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    return spf


def _local_task(args):
    terms, p, k, avals = args
    return local_sums(terms, p, k, avals)


def _run_tasks(tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) < 2:
        return [_local_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_local_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def patterson_terms(f, X: int, workers: int = 1, crossover: int = 64,
                    cache: PrimePowerCache | None = None) -> np.ndarray:
    """Array t with t[c] = sum_{x mod c} e(f(x)/c) for 1 <= c <= X (t[0] = 0)."""
    terms = f.int_terms() if hasattr(f, "int_terms") else [(int(a), int(e)) for a, e in f]
    X = int(X)
    if X < 1:
        raise SeriesError("X must be >= 1")
    cache = PRIME_POWER_CACHE if cache is None else cache
    out = np.zeros(X + 1, dtype=complex)
    for c in range(1, min(crossover, X + 1)):
        out[c] = direct_complete_sum(terms, c)
    if X < crossover:
        return out
    spf = _spf_sieve(X)
    plan: list[list[tuple[int, int]]] = []
    need: dict[tuple[int, int], set[int]] = {}
    for c in range(crossover, X + 1):
        parts = []
        r = c
        while r > 1:
            p = int(spf[r])
            k = 0
            while r % p == 0:
                r //= p
                k += 1
            q = p**k
            a = pow(c // q % q, -1, q) if q > 1 else 0
            parts.append((q, a))
            need.setdefault((p, k), set()).add(a)
        plan.append(parts)
    tasks = []
    for (p, k), avals in sorted(need.items()):
        known = cache.lookup(terms, p**k)
        missing = sorted(a for a in avals if a not in known)
        if missing:
            tasks.append((terms, p, k, missing))
    for (t_terms, p, k, missing), vals in zip(tasks, _run_tasks(tasks, workers)):
        cache.lookup(t_terms, p**k).update(zip(missing, vals))
    tables = {}
    for (p, k) in need:
        tables[p**k] = cache.lookup(terms, p**k)
    for c, parts in zip(range(crossover, X + 1), plan):
        val = None
        for q, a in parts:  # ascending primes
            v = tables[q][a]
            val = v if val is None else val * v
        out[c] = val
    return out


def patterson_series_int(f, X_values: Iterable[int], workers: int = 1,
                         crossover: int = 64) -> list[SeriesPoint]:
    """S(f, X) for every X in X_values, sharing one pass over the moduli."""
    Xs = sorted({int(x) for x in X_values})
    if not Xs or Xs[0] < 1:
        raise SeriesError("need X >= 1")
    t0 = time.perf_counter()
    terms = patterson_terms(f, Xs[-1], workers, crossover)
    partial = np.cumsum(terms[1:])
    elapsed = time.perf_counter() - t0
    return [SeriesPoint(x, complex(partial[x - 1]), x, elapsed, {"kind": "patterson_z"})
            for x in Xs]


def patterson_sum_int(f, X: int, workers: int = 1, crossover: int = 64) -> SeriesPoint:
    """sum_{c <= X} sum_{x mod c} e(f(x)/c)."""
    return patterson_series_int(f, [X], workers, crossover)[0]


def is_symmetric(terms: Sequence[tuple[int, int]]) -> bool:
    """Whether f(x) = f(a - x) for some rational a (equivalently f(x0 + t) even in t)."""
    import sympy

    x = sympy.Symbol("x")
    t = sympy.Symbol("t")
    poly = sum(sympy.Integer(a) * x**e for a, e in terms)
    n = sympy.degree(poly, x)
    if n < 1:
        return True
    lead = sympy.Poly(poly, x).all_coeffs()
    x0 = -lead[1] / (n * lead[0]) if len(lead) > 1 else 0
    shifted = sympy.expand(poly.subs(x, x0 + t))
    return sympy.expand(shifted - shifted.subs(t, -t)) == 0


def expected_exponent(terms: Sequence[tuple[int, int]]) -> float:
    """1 + 2/n for symmetric f, 1 + 1/n otherwise."""
    n = max(e for a, e in terms if a)
    return 1 + (2 if is_symmetric(terms) else 1) / n


# ---------------------------------------------------------------------------
# moduli of Z[w] under the compact weight

_ZETA = np.exp(1j * np.pi / 4)
_EMB = np.array([[_ZETA**k for k in range(4)], [_ZETA ** (3 * k) for k in range(4)]])
ENUMERATION_LIMIT = 5 * 10**7


def _scale(X: float, weight_mode: str) -> float:
    if weight_mode == "sqrt":
        return math.sqrt(X)
    if weight_mode == "linear":
        return float(X)
    raise SeriesError(f"weight_mode must be 'sqrt' or 'linear', got {weight_mode!r}")


def embedding_abs2(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """|eta_1(c)|^2 and |eta_2(c)|^2 for rows c of an (n, 4) integer array."""
    E = C.astype(float) @ _EMB.T
    return np.abs(E[:, 0]) ** 2, np.abs(E[:, 1]) ** 2


def enumerate_weighted(X: float, psi: SmoothWeight, weight_mode: str = "sqrt") -> list[CycInt]:
    """All c = 1 mod 4 with s/|eta_j(c)|^2 inside supp(psi) for j = 1, 2.

    s = sqrt(X) by default (weight_mode="linear" uses s = X).  Order is
    lexicographic in the coordinates.
    """
    return [CycInt(*map(int, row)) for row in _enumerate_array(X, psi, weight_mode)]


def _enumerate_array(X: float, psi: SmoothWeight, weight_mode: str = "sqrt") -> np.ndarray:
    if X <= 0:
        raise SeriesError("X must be positive")
    s = _scale(X, weight_mode)
    a, b = psi.support
    hi = s / a
    # |c_k| <= (|eta_1| + |eta_2|) / 2 <= sqrt(hi)
    R = int(math.isqrt(int(math.floor(hi))) + 1)
    c0 = np.arange(-R - ((-R) % 4) + 1, R + 1, 4)
    c0 = c0[np.abs(c0) <= R]
    rest = np.arange(-(R // 4) * 4, R + 1, 4)
    total = len(c0) * len(rest) ** 3
    if total > ENUMERATION_LIMIT:
        raise SeriesError(f"enumeration box has {total} points (limit {ENUMERATION_LIMIT})")
    rows = []
    for v0 in c0:
        g1, g2, g3 = np.meshgrid(rest, rest, rest, indexing="ij")
        C = np.stack([np.full(g1.size, v0), g1.ravel(), g2.ravel(), g3.ravel()], axis=1)
        e1, e2 = embedding_abs2(C)
        with np.errstate(divide="ignore"):
            y1 = np.where(e1 > 0, s / np.where(e1 > 0, e1, 1), np.inf)
            y2 = np.where(e2 > 0, s / np.where(e2 > 0, e2, 1), np.inf)
        keep = (y1 > a) & (y1 < b) & (y2 > a) & (y2 < b)
        rows.append(C[keep])
    out = np.concatenate(rows) if rows else np.zeros((0, 4), dtype=np.int64)
    return out.astype(np.int64)


def series_weight(c: CycInt, X: float, psi: SmoothWeight, weight_mode: str = "sqrt") -> float:
    """prod_j psi(s/|eta_j(c)|^2) / N(c)."""
    s = _scale(X, weight_mode)
    e1, e2 = embedding_abs2(np.array([c.c]))
    return float(psi(s / e1[0])) * float(psi(s / e2[0])) / abs(c.norm())


# ---------------------------------------------------------------------------
# per-modulus constituents

SERIES_KINDS = ("quartic_lhs", "quadratic_lhs", "kloosterman_rhs", "cross_rhs")


def check_series_hypotheses(A, B, D) -> None:
    """Raise HypothesisError naming the first violated condition."""
    from .expsums import HypothesisError, is_square

    A, B, D = map(as_cycint, (A, B, D))
    if not A or not B:
        raise HypothesisError("A and B must be nonzero")
    if not (D.c[0] % 4 == 1 and all(v % 4 == 0 for v in D.c[1:])):
        raise HypothesisError(f"D = {D} is not congruent to 1 mod 4")
    if any(v % 4 for v in B.c):
        raise HypothesisError(f"B = {B} is not divisible by 4 (B = 4B')")
    Bp = B.exact_div(CycInt(4))
    if not (16 * A).divides(B * B):
        raise HypothesisError("B^2/(16A) is not integral")
    if not is_square(A):
        raise HypothesisError(f"A = {A} is not a square")
    if not is_square(B):
        raise HypothesisError(f"B = {B} is not a square")
    if abs(Bp.norm()) > 1:
        for p, _ in Modulus(Bp).factors:
            if abs(D.norm()) == 1 or euclid_gcd(p, D) == ONE:
                raise HypothesisError(f"prime {p} of B' does not divide D")


def _local_s4(r: CycInt, s: CycInt, q: CycInt, mode) -> complex:
    """S4(r, s, q) for q a unit times a prime power."""
    from .expsums import kloosterman_s4, s4_prime_power

    qm = Modulus(q)
    (p, e), = qm.factors
    if e == 1:
        return kloosterman_s4(r, s, qm, mode).value
    u = q.exact_div(p**e)
    ui = unit_inverse(u)
    return s4_prime_power(ui * r, ui * s, p, e, mode).value


def kloosterman_assembled(r, s, c, mode=AdditiveMode.PLAIN) -> complex:
    """S4(r, s, c) from its prime-power pieces.

    Uses S4(r, s, nm) = (m/n)_4 (n/m)_4 S4(r, s mb^2, n) S4(r, s nb^2, m)
    with mb = m^-1 mod n and nb = n^-1 mod m; prime powers p^e with e >= 2
    go through the square-root closed form, primes are summed directly.
    """
    c = c if isinstance(c, Modulus) else Modulus(as_cycint(c))
    r, s = as_cycint(r), as_cycint(s)
    if c.residue_count == 1:
        return 1 + 0j
    pieces = [p**e for p, e in c.factors]
    pieces[0] = pieces[0] * c.unit_part
    return _assemble(r, s, pieces, AdditiveMode.parse(mode))


def _assemble(r: CycInt, s: CycInt, pieces: list[CycInt], mode) -> complex:
    if len(pieces) == 1:
        return _local_s4(r, s, pieces[0], mode)
    n = pieces[0]
    m = ONE
    for q in pieces[1:]:
        m = m * q
    nm_, mm_ = Modulus(n), Modulus(m)
    mb = inverse_mod(m, nm_)
    nb = inverse_mod(n, mm_)
    twist = complex(power_symbol(m, nm_, 4)) * complex(power_symbol(n, mm_, 4))
    left = _local_s4(r, nm_.reduce(s * mb * mb), n, mode)
    right = _assemble(r, mm_.reduce(s * nb * nb), pieces[1:], mode)
    return twist * left * right


def kloosterman_side(A, B, c, mode=AdditiveMode.PLAIN, method: str = "closed") -> complex:
    """(AB/c)_2 e(-B^2 (8A)^-1 / c) S4(B^2 (16A)^-1, same, c)."""
    from .expsums import _frac, c4_rhs, phase

    c = c if isinstance(c, Modulus) else Modulus(as_cycint(c))
    if method == "brute":
        return c4_rhs(A, B, c, mode, 16)
    A, B = as_cycint(A), as_cycint(B)
    sym = complex(power_symbol(A * B, c, 2))
    ph = phase(_frac(-(B * B) * inverse_mod(8 * A, c), c.elem), mode)
    arg = c.reduce(B * B * inverse_mod(16 * A, c))
    return sym * ph * kloosterman_assembled(arg, arg, c, mode)


def modulus_terms(A, B, F, c, mode=AdditiveMode.PLAIN, kinds: Sequence[str] = SERIES_KINDS,
                  kloosterman: str = "closed") -> dict[str, complex]:
    """Unweighted inner sums for one modulus c (each without e(F/c))."""
    from .expsums import _quadratic, _quartic, complete_sum, cross_term, decompositions

    c = c if isinstance(c, Modulus) else Modulus(as_cycint(c))
    out: dict[str, complex] = {}
    for kind in kinds:
        if kind == "quartic_lhs":
            out[kind] = complete_sum(_quartic(A, B), c, mode=mode).value
        elif kind == "quadratic_lhs":
            out[kind] = complete_sum(_quadratic(A, B), c, mode=mode).value
        elif kind == "kloosterman_rhs":
            out[kind] = kloosterman_side(A, B, c, mode, kloosterman)
        elif kind == "cross_rhs":
            out[kind] = complex(sum((cross_term(A, B, n, m, mode) for n, m in decompositions(c)), 0j))
        else:
            raise SeriesError(f"unknown series kind {kind!r}")
    return out


def _modulus_task(args):
    A, B, F, coords, mode, kinds, kloosterman = args
    return [modulus_terms(A, B, F, CycInt(*row), mode, kinds, kloosterman) for row in coords]


@dataclass
class SeriesTerms:
    """Per-modulus data of a weighted series at one X."""

    X: float
    moduli: list[CycInt]
    weights: np.ndarray  # prod psi / N(c)
    twists: np.ndarray  # theta(c) e(F/c)
    inner: dict[str, np.ndarray]
    enumerated: int

    def contributions(self, kind: str) -> np.ndarray:
        return self.weights * self.twists * self.inner[kind]

    def total(self, kind: str) -> complex:
        return complex(np.sum(self.contributions(kind)))


def series_terms(A, B, F, D, theta: DirichletChar | None, psi: SmoothWeight, X: float,
                 kinds: Sequence[str] = SERIES_KINDS, mode=AdditiveMode.PLAIN,
                 weight_mode: str = "sqrt", workers: int = 1, check: bool = True,
                 kloosterman: str = "closed") -> SeriesTerms:
    """Enumerate the moduli at X and evaluate the requested constituents."""
    from .expsums import _frac, phase

    A, B, F, D = map(as_cycint, (A, B, F, D))
    mode = AdditiveMode.parse(mode)
    for k in kinds:
        if k not in SERIES_KINDS:
            raise SeriesError(f"unknown series kind {k!r}")
    if check:
        check_series_hypotheses(A, B, D)
    if theta is not None and abs(theta.modulus.elem.norm()) != abs(D.norm()):
        raise SeriesError("theta must be a character modulo D")
    coords = _enumerate_array(X, psi, weight_mode)
    enumerated = len(coords)
    s = _scale(X, weight_mode)
    keep, tw = [], []
    Dm = Modulus(D)
    for i, row in enumerate(coords):
        c = CycInt(*map(int, row))
        if Dm.residue_count > 1 and euclid_gcd(c, D) != ONE:
            continue
        t = theta(c) if theta is not None else 1 + 0j
        if F:
            t *= phase(_frac(F, c), mode)
        keep.append(i)
        tw.append(t)
    coords = coords[keep]
    e1, e2 = embedding_abs2(coords)
    norms = np.array([abs(CycInt(*map(int, r)).norm()) for r in coords], dtype=float)
    weights = psi(s / e1) * psi(s / e2) / norms if len(coords) else np.zeros(0)
    rows = [tuple(int(v) for v in r) for r in coords]
    if workers > 1 and len(rows) > 1:
        chunks = [rows[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_modulus_task, [(A, B, F, ch, mode, tuple(kinds), kloosterman)
                                                  for ch in chunks]))
        per_c: list = [None] * len(rows)
        for i in range(workers):
            per_c[i::workers] = parts[i]
    else:
        per_c = _modulus_task((A, B, F, rows, mode, tuple(kinds), kloosterman))
    inner = {k: np.array([d[k] for d in per_c], dtype=complex) for k in kinds}
    return SeriesTerms(X, [CycInt(*r) for r in rows], np.asarray(weights, dtype=float),
                       np.array(tw, dtype=complex), inner, enumerated)


def weighted_series(kind: str, A, B, F, D, theta: DirichletChar | None, psi: SmoothWeight,
                    X: float, mode=AdditiveMode.PLAIN, weight_mode: str = "sqrt",
                    workers: int = 1, check: bool = True, kloosterman: str = "closed") -> SeriesPoint:
    """sum over c = 1 mod 4, (c, D) = 1 of prod_j psi(sqrt X/|eta_j(c)|^2)/N(c) theta(c) e(F/c) * inner(c)."""
    t0 = time.perf_counter()
    st = series_terms(A, B, F, D, theta, psi, X, (kind,), mode, weight_mode, workers, check,
                      kloosterman)
    value = st.total(kind)
    return SeriesPoint(X, value, st.enumerated, time.perf_counter() - t0,
                       {"kind": kind, "summed": len(st.moduli)})


def decomposition_residuals(A, B, F, D, theta, psi, X, mode=AdditiveMode.PLAIN,
                            weight_mode: str = "sqrt", workers: int = 1) -> list[dict]:
    """Per-modulus quartic term against the Kloosterman + quadratic + cross terms."""
    st = series_terms(A, B, F, D, theta, psi, X, SERIES_KINDS, mode, weight_mode, workers)
    out = []
    for i, c in enumerate(st.moduli):
        w = st.weights[i] * st.twists[i]
        lhs = w * st.inner["quartic_lhs"][i]
        rhs = w * (st.inner["kloosterman_rhs"][i] + st.inner["quadratic_lhs"][i]
                   + st.inner["cross_rhs"][i])
        out.append({"c": c, "norm": abs(c.norm()), "weight": float(st.weights[i]),
                    "lhs": complex(lhs), "rhs": complex(rhs), "residual": abs(lhs - rhs)})
    return out


# ---------------------------------------------------------------------------
# main term of the quadratic series


def phi4() -> int:
    """|(R/4)^*| computed by counting unit residues."""
    m = Modulus(CycInt(4))
    return int(np.count_nonzero(m.unit_mask()))


@dataclass(frozen=True)
class LocalT:
    prime: CycInt
    j: int
    table: int  # predicted value
    primitive: complex  # sum with the trivial character extended by 1
    literal: complex  # sum over units only
    primitive_exact: int | None  # exact integer when the sum reduces to one
    literal_exact: int | None


def _cyclotomic_exact(exponents: np.ndarray, L: int) -> int | None:
    """Exact value of sum_k i^... style sums: sum root(e, L) reduced mod Phi_L."""
    import sympy

    counts = np.bincount(np.asarray(exponents, dtype=np.int64) % L, minlength=L)
    x = sympy.Symbol("x")
    poly = sympy.Poly([int(v) for v in counts[::-1]], x)
    rem = poly.rem(sympy.Poly(sympy.cyclotomic_poly(L, x), x))
    if rem.degree() <= 0:
        return int(rem.as_expr())
    return None


def _local_character_exponents(theta: DirichletChar | None, p: CycInt, e_theta: int,
                               j: int, D: CycInt) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Exponents of theta_p(d) (d/p)_2^j over d mod p^max(j, e_theta, 1)."""
    k = max(j, e_theta, 1)
    mod = Modulus(p**k)
    Xr = mod.residue_array
    pm = Modulus(p)
    unit = pm.reduce_array(Xr).any(axis=1)
    L = 4 if theta is None else math.lcm(theta.L, 4)
    exps = np.zeros(len(Xr), dtype=np.int64)
    if theta is not None and abs(D.norm()) > 1:
        pe = p**e_theta
        rest = D.exact_div(pe) if e_theta else D
        if abs(rest.norm()) > 1:
            idem = crt(ONE, Modulus(pe), CycInt(0), Modulus(rest)) if e_theta else CycInt(0)
            other = crt(CycInt(0), Modulus(pe), ONE, Modulus(rest)) if e_theta else ONE
            lift = (mul_array(Xr, np.array([idem.c]), None) + np.array(other.c)) if e_theta else \
                np.tile(np.array(other.c), (len(Xr), 1))
        else:
            lift = Xr.copy()
        th = theta.exponents_of(lift)
        good = th >= 0
        exps = np.where(good, th * (L // theta.L), 0)
        unit &= good
    if j % 2:
        sym = power_symbol_array(Xr, pm, 2)
        exps = exps + np.where(sym >= 0, sym, 0) * (L // 4)
    return exps % L, unit, L, mod.residue_count


def local_t(theta: DirichletChar | None, p: CycInt, j: int, D: CycInt | None = None) -> LocalT:
    """T_{p^j}(theta) = sum_d theta_p(d) (d/p^j)_2 under both conventions.

    The primitive convention treats theta_p (d/p)_2^j as the constant 1 when it
    is trivial, so non-units count too; the literal convention sums over units.
    """
    p = as_cycint(p)
    D = as_cycint(D) if D is not None else (theta.modulus.elem if theta is not None else ONE)
    e_theta = 0
    if abs(D.norm()) > 1:
        for q, e in Modulus(D).factors:
            if euclid_gcd(q, p) != ONE:
                e_theta = e
    exps, unit, L, size = _local_character_exponents(theta, p, e_theta, j, D)
    trivial = bool(np.all(exps[unit] % L == 0))
    lit_exact = _cyclotomic_exact(exps[unit], L)
    lit = complex(np.sum(root_of_unity(exps[unit], L)))
    if trivial:
        prim_exact = size
        prim = complex(size)
    else:
        prim_exact = lit_exact
        prim = lit
    Np = abs(p.norm())
    table = table_t(Np, j, theta_kind(theta, p, D))
    return LocalT(p, j, table, prim, lit, prim_exact, lit_exact)


def theta_kind(theta: DirichletChar | None, p: CycInt, D: CycInt) -> str:
    """'trivial', 'quadratic' or 'other' for the p-component of theta."""
    if theta is None:
        return "trivial"
    e_theta = 0
    for q, e in Modulus(D).factors if abs(D.norm()) > 1 else ():
        if euclid_gcd(q, p) != ONE:
            e_theta = e
    exps, unit, L, _ = _local_character_exponents(theta, p, e_theta, 0, D)
    if np.all(exps[unit] % L == 0):
        return "trivial"
    exps1, unit1, L1, _ = _local_character_exponents(theta, p, e_theta, 1, D)
    if np.all(exps1[unit1] % L1 == 0):
        return "quadratic"
    return "other"


def table_t(Np: int, j: int, kind: str) -> int:
    """Predicted T_{p^j}: N(p)^j or N(p) in the listed cases, else 0."""
    if j == 0:
        return Np if kind == "trivial" else 0
    if j == 1:
        return Np if kind == "quadratic" else 0
    if j % 2 == 0:
        return Np**j if kind == "trivial" else 0
    return Np**j if kind == "quadratic" else 0


def t_factor(A, D, theta: DirichletChar | None, verify: bool = True) -> complex:
    """prod over p | lcm(A, D) of the local table values T_{p^j}(theta).

    With verify=True each local value is checked against the primitive
    character sum and a mismatch raises.
    """
    from .expsums import HypothesisError

    A, D = as_cycint(A), as_cycint(D)
    primes: dict[CycInt, tuple[CycInt, int]] = {}
    for x in (D, A):
        if abs(x.norm()) > 1:
            for p, _ in Modulus(x).factors:
                key = canonical_associate(p)[0]
                primes.setdefault(key, (p, 0))
    if abs(A.norm()) > 1:
        for p, e in Modulus(A).factors:
            if abs(D.norm()) <= 1 or euclid_gcd(p, D) == ONE:
                raise HypothesisError(f"prime {p} of A does not divide D")
            key = canonical_associate(p)[0]
            primes[key] = (primes[key][0], e)
    value = 1
    for key in sorted(primes, key=lambda q: (abs(q.norm()), q.c)):
        p, j = primes[key]
        kind = theta_kind(theta, p, D) if abs(D.norm()) > 1 else "trivial"
        tv = table_t(abs(p.norm()), j, kind)
        if verify:
            loc = local_t(theta, p, j, D)
            if loc.primitive_exact != tv:
                raise SeriesError(f"local T at {p}^{j}: table {tv}, character sum {loc.primitive_exact}")
        value *= tv
    return complex(value)


def quad_main_term(A, B, F, D, theta: DirichletChar | None, psi: SmoothWeight, X: float,
                   normalization: str = "stated") -> complex:
    """sqrt(X) pi^3/(2 phi(4)) psihat(-1/2)^2 T_{A,D}(theta).

    normalization="lattice" instead returns the density prediction
    sqrt(X) pi^2 psihat(-1/2)^2 T_lit / (covol * N(4 lcm(A, D))), where T_lit
    sums theta(d)(d/A)_2 over units only and covol = 4 is the covolume of Z[w]
    in C^2; it is a diagnostic for the stated constant.
    """
    check_series_hypotheses(A, B, D)
    mh = mellin_hat(psi, -0.5)
    if normalization == "stated":
        T = t_factor(A, D, theta)
        return math.sqrt(X) * math.pi**3 / (2 * phi4()) * mh**2 * T
    if normalization == "lattice":
        A, D = as_cycint(A), as_cycint(D)
        T_lit = 1 + 0j
        Nq = 256
        primes: dict[CycInt, tuple[CycInt, int]] = {}
        for x in (D, A):
            if abs(x.norm()) > 1:
                for p, _ in Modulus(x).factors:
                    primes.setdefault(canonical_associate(p)[0], (p, 0))
        if abs(A.norm()) > 1:
            for p, e in Modulus(A).factors:
                k = canonical_associate(p)[0]
                primes[k] = (primes[k][0], e)
        Dn = abs(D.norm())
        for key, (p, j) in primes.items():
            e_theta = 0
            if Dn > 1:
                for q, e in Modulus(D).factors:
                    if euclid_gcd(q, p) != ONE:
                        e_theta = e
            loc = local_t(theta, p, j, D)
            T_lit *= loc.literal
            Nq *= abs(p.norm()) ** max(j, e_theta, 1)
        return math.sqrt(X) * math.pi**2 * mh**2 * T_lit / (4 * Nq)
    raise SeriesError(f"unknown normalization {normalization!r}")


def ptp_table(p, js: Iterable[int] = range(5), orders: Iterable[int] | None = None) -> list[dict]:
    """Rows (order, j, table, primitive sum, literal sum) for characters mod p."""
    from .characters import CharacterGroup

    p = as_cycint(p)
    G = CharacterGroup(p)
    reps: dict[int, DirichletChar] = {}
    for chi in G:
        reps.setdefault(chi.order, chi)
    wanted = sorted(reps) if orders is None else [o for o in sorted(reps) if o in set(orders)]
    rows = []
    for order in wanted:
        chi = reps[order]
        for j in js:
            loc = local_t(chi, p, j, p)
            rows.append({"prime": str(p), "norm": abs(p.norm()), "order": order, "j": j,
                         "table": loc.table, "primitive": loc.primitive_exact,
                         "literal": loc.literal_exact,
                         "match": loc.primitive_exact == loc.table})
    return rows


# ---------------------------------------------------------------------------
# theta constant term: Dirichlet partial sums


class ThetaPartial(NamedTuple):
    partial_sum: complex
    l_ratio_partial: complex


@dataclass
class ThetaPartialReport:
    partial_sum: complex
    l_ratio_partial: complex
    restricted_count: int
    ideal_count: int
    unit_invariant: bool  # theta^4 trivial on units, so the ideal series is well defined


@dataclass(frozen=True)
class IdealRecord:
    generator: CycInt
    norm: int
    phi: int


def enumerate_odd_ideals(T: int) -> list[IdealRecord]:
    """All ideals coprime to 2 with norm <= T, with a small generator and phi."""
    primes: list[tuple[int, CycInt]] = []
    for p in primerange(3, T + 1):
        if p % 8 != 1 and p * p > T:
            continue
        for g in prime_ideals_above(p):
            n = abs(g.norm())
            if n <= T:
                primes.append((n, g))
    primes.sort(key=lambda t: (t[0], t[1].c))
    out: list[IdealRecord] = [IdealRecord(ONE, 1, 1)]

    def rec(start: int, gen: CycInt, n: int, phi: int):
        for i in range(start, len(primes)):
            q, g = primes[i]
            if n * q > T:
                break
            nn, gg, ph = n * q, gen * g, phi * (q - 1)
            while nn <= T:
                gg = canonical_associate(gg)[0]
                out.append(IdealRecord(gg, nn, ph))
                rec(i + 1, gg, nn, ph)
                nn, gg, ph = nn * q, gg * g, ph * q

    rec(0, ONE, 1, 1)
    out.sort(key=lambda r: (r.norm, r.generator.c))
    return out


def _kernel_unit() -> CycInt:
    """Generator (up to sign of the exponent) of units congruent to 1 mod 4 of infinite order."""
    u = FUNDAMENTAL_UNIT
    cur = ONE
    for k in range(1, 64):
        cur = cur * u
        for t in TORSION:
            y = t * cur
            if y.c[0] % 4 == 1 and all(v % 4 == 0 for v in y.c[1:]):
                return y
    raise RingError("no unit congruent to 1 mod 4 found")


def theta_partial_report(theta: DirichletChar | None, s: float, T: int,
                         ideals: list[IdealRecord] | None = None) -> ThetaPartialReport:
    """Partial sums of sum phi(c0^4) theta^4(c0) / N(c0)^(4s) over normalized c0.

    The c0 run over ideals coprime to 2 with a generator c0 = 1 mod 4 (taken
    from normalize_assoc) and N(c0) <= T.  Alongside, the truncated series
    sum theta^4(a) phi(a)/N(a)^(4s-3) over all odd ideals, whose full value is
    L(4s-4, theta^4)/L(4s-3, theta^4); it is only meaningful when theta^4 is
    trivial on units, which is reported.
    """
    if s <= 1.25:
        raise SeriesError("need s > 5/4")
    ideals = enumerate_odd_ideals(T) if ideals is None else ideals
    L = 1 if theta is None else theta.L

    def th4(x: CycInt) -> complex:
        if theta is None:
            return 1 + 0j
        e = theta.exponent(x)
        if e < 0:
            return 0j
        return complex(root_of_unity(4 * e % L, L))

    unit_inv = theta is None or all(
        abs(th4(u) - 1) < 1e-12 for u in (TORSION[1], FUNDAMENTAL_UNIT))
    restricted = 0j
    full = 0j
    rcount = 0
    expo = 4 * s - 3
    for rec in ideals:
        if rec.norm > T:
            continue
        base = rec.phi / rec.norm**expo
        full += th4(rec.generator) * base
        try:
            c0, _ = normalize_assoc(rec.generator)
        except RingError:
            continue
        rcount += 1
        restricted += th4(c0) * base
    return ThetaPartialReport(restricted, full if unit_inv else complex("nan+nanj"), rcount,
                              sum(1 for r in ideals if r.norm <= T), unit_inv)


def theta_partial(theta: DirichletChar | None, s: float, T: int) -> ThetaPartial:
    rep = theta_partial_report(theta, s, T)
    return ThetaPartial(rep.partial_sum, rep.l_ratio_partial)


def is_fourth_power_times_unit(c) -> bool:
    """Exact test via a square root of a square root (over all unit twists)."""
    from .expsums import integer_sqrt

    c = as_cycint(c)
    for t in TORSION:
        for j in range(4):
            u = t * FUNDAMENTAL_UNIT**j
            r = integer_sqrt(c * u)
            if r is None:
                continue
            for v in (r, r * TORSION[2]):
                if integer_sqrt(v) is not None:
                    return True
    return False


def quartic_character_total(c, brute_limit: int = 20000) -> complex:
    """sum over units a mod c of conj((a/c)_4).

    Summed directly when N(c) <= brute_limit; otherwise phi(c) or 0 according
    to whether every prime exponent of c is divisible by 4 ((./p)_4 has exact
    order 4 at every odd prime).
    """
    mod = Modulus(as_cycint(c))
    if mod.residue_count == 1:
        return 1 + 0j
    if mod.residue_count <= brute_limit:
        U = mod.residue_array[mod.unit_mask()]
        sym = power_symbol_array(U, mod, 4)
        return complex(np.sum(root_of_unity((-sym) % 4, 4)))
    if all(e % 4 == 0 for _, e in mod.factors):
        return complex(phi_ideal(mod))
    return 0j


def orthogonality_check(theta: DirichletChar | None, s: float, T: int,
                        brute_limit: int = 20000) -> dict:
    """sum_c N(c)^-s theta(c) sum_{a unit mod c} conj((a/c)_4) over normalized c, N(c) <= T,
    against the restricted theta partial sum at cutoff T^(1/4).

    Each c is classified twice: by whether the inner character sum is
    nonzero and by an independent fourth-power test; the two must agree.
    """
    ideals = enumerate_odd_ideals(T)
    lhs = 0j
    disagreements = []
    fourth = 0
    for rec in ideals:
        try:
            c, _ = normalize_assoc(rec.generator)
        except RingError:
            continue
        inner = quartic_character_total(c, brute_limit)
        nonzero = abs(inner) > 0.5
        is4 = is_fourth_power_times_unit(c)
        if nonzero != is4:
            disagreements.append(c)
        if not nonzero:
            continue
        fourth += 1
        th = 1 + 0j if theta is None else theta(c)
        lhs += th * inner / rec.norm**s
    rhs = theta_partial_report(theta, s, int(math.floor(T ** 0.25 + 1e-9))).partial_sum \
        if T >= 1 else 0j
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs),
            "fourth_power_moduli": fourth, "disagreements": disagreements}


__all__ = [
    "SeriesError", "SmoothWeight", "SeriesPoint", "FitResult", "PrimePowerCache",
    "PRIME_POWER_CACHE", "ThetaPartial", "ThetaPartialReport", "LocalT", "SERIES_KINDS",
    "phi_ideal", "mellin_hat", "fit_exponent", "geometric_grid", "direct_complete_sum",
    "local_sums", "patterson_terms", "patterson_series_int", "patterson_sum_int",
    "is_symmetric", "expected_exponent", "embedding_abs2", "enumerate_weighted",
    "series_weight", "check_series_hypotheses", "kloosterman_assembled", "kloosterman_side",
    "modulus_terms", "series_terms", "weighted_series", "decomposition_residuals", "phi4",
    "local_t", "theta_kind", "table_t", "t_factor", "quad_main_term", "ptp_table",
    "enumerate_odd_ideals", "theta_partial_report", "theta_partial",
    "is_fourth_power_times_unit", "quartic_character_total", "orthogonality_check",
]
