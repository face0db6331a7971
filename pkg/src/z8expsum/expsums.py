"""Complete exponential sums over residue rings of Z[w] and their closed forms.

Every sum is evaluated by exact enumeration: the argument f(x) is computed
in integer arithmetic, mapped to an exact phase numerator, and only the
final histogram of phases is turned into complex numbers.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .characters import (
    AdditiveMode,
    DirichletChar,
    additive_phase,
    ff_family,
    phase_numerators,
    power_symbol,
    power_symbol_array,
    root_of_unity,
    sum_phases,
)
from .ring import (
    CycInt,
    FieldElem,
    Modulus,
    NotCoprimeError,
    RingError,
    ZERO,
    ONE,
    as_cycint,
    euclid_gcd,
    inverse_mod,
    mul_array,
)


class HypothesisError(ValueError):
    """Inputs violate the hypotheses of the identity being evaluated."""


def _mod(c) -> Modulus:
    return c if isinstance(c, Modulus) else Modulus(c)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PolySpec:
    """Sparse polynomial sum of coef * x**exp with coefficients in Z[w]."""

    terms: tuple[tuple[CycInt, int], ...]

    def __post_init__(self):
        merged: dict[int, CycInt] = {}
        for coef, e in self.terms:
            if e < 0:
                raise ValueError("exponents must be nonnegative")
            merged[e] = merged.get(e, ZERO) + as_cycint(coef)
        terms = tuple(sorted(((c, e) for e, c in merged.items() if c), key=lambda t: -t[1]))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[object, int]]) -> "PolySpec":
        return cls(tuple((as_cycint(c), int(e)) for c, e in terms))

    @classmethod
    def monomial(cls, coef, exp: int) -> "PolySpec":
        return cls.from_terms([(coef, exp)])

    @classmethod
    def parse(cls, text: str) -> "PolySpec":
        """Dense 'a_n,...,a_1,a_0' (highest degree first) or sparse 'a3=1,a1=-2'."""
        parts = [p.strip() for p in text.split(",")]
        if not parts or any(p == "" for p in parts):
            raise ValueError(f"bad polynomial spec {text!r}")
        try:
            if any("=" in p for p in parts):
                terms = []
                for p in parts:
                    key, _, val = p.partition("=")
                    key = key.strip().lower()
                    if not key.startswith("a") or not val:
                        raise ValueError(p)
                    terms.append((int(val), int(key[1:])))
                return cls.from_terms(terms)
            coefs = [int(p) for p in parts]
        except ValueError as exc:
            raise ValueError(f"bad polynomial spec {text!r}") from exc
        deg = len(coefs) - 1
        return cls.from_terms([(c, deg - i) for i, c in enumerate(coefs)])

    @property
    def degree(self) -> int:
        return self.terms[0][1] if self.terms else 0

    def is_rational(self) -> bool:
        return all(c.c[1:] == (0, 0, 0) for c, _ in self.terms)

    def int_terms(self) -> list[tuple[int, int]]:
        if not self.is_rational():
            raise ValueError("polynomial has non-rational coefficients")
        return [(c.c[0], e) for c, e in self.terms]

    def scaled(self, a) -> "PolySpec":
        a = as_cycint(a)
        return PolySpec(tuple((c * a, e) for c, e in self.terms))

    def __add__(self, other: "PolySpec") -> "PolySpec":
        return PolySpec(self.terms + other.terms)

    def __call__(self, x) -> CycInt:
        x = as_cycint(x)
        return sum((c * x**e for c, e in self.terms), ZERO)

    def eval_array(self, X: np.ndarray, N: int) -> np.ndarray:
        """f(x) coordinatewise mod N for every row of X."""
        out = np.zeros_like(X)
        cache: dict[int, np.ndarray] = {}
        for coef, e in self.terms:
            out = (out + mul_array(_power_array(X, e, N, cache), np.array([coef.c], dtype=np.int64), N)) % N
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})x^{e}" for c, e in self.terms)


def _power_array(X: np.ndarray, e: int, N: int, cache: dict) -> np.ndarray:
    if e in cache:
        return cache[e]
    if e == 0:
        r = np.zeros_like(X)
        r[:, 0] = 1 % N
    elif e == 1:
        r = np.mod(X, N)
    else:
        half = _power_array(X, e // 2, N, cache)
        r = mul_array(half, half, N)
        if e % 2:
            r = mul_array(r, np.mod(X, N), N)
    cache[e] = r
    return r


@dataclass(frozen=True)
class TwistSpec:
    """Multiplicative twist applied to a complete sum."""

    kind: str = "none"  # none | symbol | dirichlet
    k: int = 0
    chi: DirichletChar | None = None

    @classmethod
    def none(cls) -> "TwistSpec":
        return cls()

    @classmethod
    def symbol(cls, k: int) -> "TwistSpec":
        if k not in (2, 4):
            raise ValueError("residue symbol twist needs k in {2, 4}")
        return cls("symbol", k)

    @classmethod
    def dirichlet(cls, chi: DirichletChar) -> "TwistSpec":
        return cls("dirichlet", 0, chi)

    def exponents(self, c: Modulus) -> tuple[np.ndarray | None, int]:
        """Exponent table over residues of c (-1 = skip) and its order."""
        if self.kind == "none":
            return None, 1
        if self.kind == "symbol":
            if c.residue_count % 2 == 0:
                raise RingError("residue symbol twist needs an odd modulus")
            if c.residue_count == 1:
                return np.zeros(1, dtype=np.int64), 4
            return _symbol_table(c.elem.c, self.k), 4
        if self.chi.modulus != c:
            raise ValueError("twist character modulus differs from the sum modulus")
        return self.chi.table, self.chi.L


@functools.lru_cache(maxsize=16)
def _symbol_table(c: tuple, k: int) -> np.ndarray:
    m = Modulus(CycInt(*c))
    return power_symbol_array(m.residue_array, m, k)


@dataclass(frozen=True)
class SumValue:
    value: complex
    modulus_norm: int
    method: str = "brute"  # brute | closed | assembled

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


# ---------------------------------------------------------------------------
# evaluators


def complete_sum(f: PolySpec, c, twist: TwistSpec | None = None,
                 mode=AdditiveMode.PLAIN) -> SumValue:
    """sum over x mod c of twist(x) e(f(x)/c)."""
    c = _mod(c)
    twist = twist or TwistSpec.none()
    N = c.residue_count
    table, L = twist.exponents(c)
    if N == 1:
        return SumValue(1 + 0j, 1)
    u = c.phase_vector(AdditiveMode.parse(mode).value)
    coefs = np.array([t[0].c for t in f.terms], dtype=np.int64).reshape(-1, 4) % N
    exps = np.array([t[1] for t in f.terms], dtype=np.int64)
    counts, M = kernels.ring_poly_phase_hist(
        coefs, exps, np.array(c.basis, dtype=np.int64), np.array(c.diag, dtype=np.int64),
        u, N, table, L,
    )
    return SumValue(histogram_sum(counts, M), N)


def histogram_sum(counts: np.ndarray, M: int) -> complex:
    """sum_k counts[k] exp(2 pi i k/M), evaluated deterministically."""
    nz = np.nonzero(counts)[0]
    if len(nz) == 0:
        return 0j
    return complex(np.sum(counts[nz] * root_of_unity(nz, M)))


def phase(alpha, mode=AdditiveMode.PLAIN) -> complex:
    """e(alpha) for alpha in Q(w), exact reduction then one exponential."""
    t = additive_phase(alpha, mode)
    return complex(np.exp(2j * np.pi * float(t)))


def _frac(num, den) -> FieldElem:
    return FieldElem.from_cycint(as_cycint(num)) / as_cycint(den)


def _unit_residues(c: Modulus) -> np.ndarray:
    X = c.residue_array
    return X[c.unit_mask()]


def _inverse_array(c: Modulus, U: np.ndarray) -> np.ndarray:
    """Inverses of the unit residues U modulo c (via the group exponent)."""
    from .series import phi_ideal

    return c.pow_array(U, phi_ideal(c) - 1)


@functools.lru_cache(maxsize=16)
def _kloosterman_tables(c: tuple, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit residues, their inverses and symbol exponents; these depend only on c."""
    m = Modulus(CycInt(*c))
    U = _unit_residues(m)
    return U, _inverse_array(m, U), power_symbol_array(U, m, k)


def kloosterman_s4(r, s, c, mode=AdditiveMode.PLAIN, k: int = 4) -> SumValue:
    """sum over units a mod c of (a/c)_k e((r a + s a^-1)/c); 1 for unit c."""
    c = _mod(c)
    if c.residue_count % 2 == 0:
        raise RingError("S4 needs a modulus coprime to 2")
    N = c.residue_count
    if N == 1:
        return SumValue(1 + 0j, 1)
    r, s = as_cycint(r), as_cycint(s)
    U, V, sym = _kloosterman_tables(c.elem.c, k)
    arg = (mul_array(U, np.array([r.c]), N) + mul_array(V, np.array([s.c]), N)) % N
    ph = phase_numerators(c, arg, mode)
    M = math.lcm(N, 4)
    num = (ph * (M // N) + sym * (M // 4)) % M
    counts = np.bincount(num, minlength=M)
    return SumValue(histogram_sum(counts, M), N)


def sqrt_mod(b, p, m: int = 1) -> list[CycInt]:
    """All u mod p^m with u^2 = b (p an odd prime, b a unit mod p)."""
    p = as_cycint(p)
    pm = Modulus(p)
    q = pm.residue_count
    if q % 2 == 0:
        raise RingError("sqrt_mod needs an odd prime")
    b = as_cycint(b)
    if pm.reduce(b) == ZERO:
        raise HypothesisError("b must be a unit modulo p")
    from .characters import _pow_mod

    if _pow_mod(b, (q - 1) // 2, pm) != pm.reduce(1):
        return []
    # Tonelli-Shanks in the residue field of size q
    Q, S = q - 1, 0
    while Q % 2 == 0:
        Q //= 2
        S += 1
    z = None
    for row in pm.residue_array[1:]:
        cand = CycInt(*map(int, row))
        if _pow_mod(cand, (q - 1) // 2, pm) != pm.reduce(1):
            z = cand
            break
    one = pm.reduce(1)
    M_, cc = S, _pow_mod(z, Q, pm)
    t = _pow_mod(b, Q, pm)
    R = _pow_mod(b, (Q + 1) // 2, pm)
    while t != one:
        i, tt = 0, t
        while tt != one:
            tt = pm.reduce(tt * tt)
            i += 1
        bb = cc
        for _ in range(M_ - i - 1):
            bb = pm.reduce(bb * bb)
        M_, cc = i, pm.reduce(bb * bb)
        t = pm.reduce(t * cc)
        R = pm.reduce(R * bb)
    # Newton lift to p^m
    mod = Modulus(p**m)
    u = R
    for _ in range(max(1, m.bit_length() + 1)):
        u = mod.reduce(u - (u * u - b) * inverse_mod(2 * u, mod))
    if mod.reduce(u * u - b) != ZERO:
        raise RingError("Hensel lift failed")
    roots = {mod.reduce(u), mod.reduce(-u)}
    return sorted(roots, key=lambda x: x.c)


def s4_prime_power(a, b, p, m: int, mode=AdditiveMode.PLAIN, form: str = "corrected") -> SumValue:
    """Closed form of S4(a, b, p^m) for m >= 2 by square roots of b/a.

    form="stated" uses the displayed odd-power prefactor (a/p)_2;
    form="corrected" uses (a/p)_2 (u/p)_2 * g(p) with g(p) the normalized
    quadratic Gauss sum at p, which is what brute force confirms.
    """
    if m < 2:
        raise HypothesisError("s4_prime_power needs m >= 2")
    a, b, p = as_cycint(a), as_cycint(b), as_cycint(p)
    pm = Modulus(p)
    if pm.reduce(a * b) == ZERO:
        raise HypothesisError("need gcd(ab, p) = 1")
    mod = Modulus(p**m)
    N = mod.residue_count
    qp = pm.residue_count
    ratio = b * inverse_mod(a, mod)
    roots = sqrt_mod(ratio, p, m)
    k = m // 2
    total = 0j
    g_norm = None
    if m % 2 and form == "corrected":
        g_norm = quadratic_gauss_normalized(pm, mode)
    for u in roots:
        sym = power_symbol(u, pm, 4) ** m
        term = complex(sym) * phase(_frac(2 * a * u, p**m), mode)
        if m % 2 and form == "corrected":
            term *= complex(power_symbol(u, pm, 2))
        total += term
    if m % 2 == 0:
        value = qp**k * total
    else:
        pref = complex(power_symbol(a, pm, 2)) * qp ** (k + 0.5)
        if form == "corrected":
            pref *= g_norm
        value = pref * total
    return SumValue(value, N, "closed")


def quadratic_gauss_normalized(c, mode=AdditiveMode.PLAIN) -> complex:
    """sum_x e(x^2/c) / sqrt(N(c))."""
    c = _mod(c)
    f = PolySpec.monomial(1, 2)
    return complete_sum(f, c, mode=mode).value / math.sqrt(c.residue_count)


def quad_sum_closed(m, n, r, c, mode=AdditiveMode.PLAIN, check: bool = True) -> SumValue:
    """(m/c)_2 e(r/c) e(-n^2 (4m)^-1 / c) sqrt(N(c))."""
    c = _mod(c)
    m, n, r = as_cycint(m), as_cycint(n), as_cycint(r)
    if check:
        if c.residue_count % 2 == 0:
            raise HypothesisError("c must be odd")
        if not _is_one_mod4(c.elem):
            raise HypothesisError("c must be 1 mod 4")
    try:
        inv4m = inverse_mod(4 * m, c)
    except NotCoprimeError as exc:
        raise HypothesisError("gcd(m, c) must be 1") from exc
    sym = complex(power_symbol(m, c, 2))
    ph = phase(_frac(r, c.elem), mode) * phase(_frac(-(n * n) * inv4m, c.elem), mode)
    return SumValue(sym * ph * math.sqrt(c.residue_count), c.residue_count, "closed")


def completed_square(m, n, r, c) -> dict:
    """Pieces of m x^2 + n x + r = m (x + n/(2m))^2 + r - n^2/(4m) modulo c."""
    c = _mod(c)
    m, n, r = as_cycint(m), as_cycint(n), as_cycint(r)
    inv2m = inverse_mod(2 * m, c)
    inv4m = inverse_mod(4 * m, c)
    return {
        "shift": c.reduce(n * inv2m),
        "constant": c.reduce(r - n * n * inv4m),
        "leading": c.reduce(m),
    }


def _is_one_mod4(x: CycInt) -> bool:
    return x.c[0] % 4 == 1 and all(v % 4 == 0 for v in x.c[1:])


# ---------------------------------------------------------------------------
# identity reports


@dataclass
class IdentityReport:
    statement_id: str
    modulus_norm: int
    lhs: complex
    rhs_terms: list[tuple[str, complex]]
    residual: float
    seed: int | None = None
    mode: str = "different"
    extra: dict = field(default_factory=dict)

    @property
    def rhs(self) -> complex:
        return complex(sum(v for _, v in self.rhs_terms))

    def scale(self) -> float:
        return math.sqrt(self.modulus_norm)

    def to_dict(self) -> dict:
        def cx(z):
            z = complex(z)
            return [z.real, z.imag]

        extra = {}
        for k, v in self.extra.items():
            extra[k] = cx(v) if isinstance(v, complex) else v
        return {
            "statement_id": self.statement_id,
            "modulus_norm": self.modulus_norm,
            "lhs": cx(self.lhs),
            "rhs_terms": [{"name": n, "value": cx(v)} for n, v in self.rhs_terms],
            "residual": self.residual,
            "seed": self.seed,
            "mode": self.mode,
            "extra": extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _quartic(A, B) -> PolySpec:
    return PolySpec.from_terms([(A, 4), (B, 2)])


def _quadratic(A, B) -> PolySpec:
    return PolySpec.from_terms([(A, 2), (B, 1)])


def c4_rhs(A, B, c, mode=AdditiveMode.DIFFERENT, denom: int = 16) -> complex:
    """(AB/c)_2 e(-B^2 (8A)^-1 / c) S4(B^2 (denom A)^-1, same, c)."""
    c = _mod(c)
    A, B = as_cycint(A), as_cycint(B)
    sym = complex(power_symbol(A * B, c, 2))
    ph = phase(_frac(-(B * B) * inverse_mod(8 * A, c), c.elem), mode)
    arg = c.reduce(B * B * inverse_mod(denom * A, c))
    return sym * ph * kloosterman_s4(arg, arg, c, mode).value


def _coprime(a, c: Modulus) -> bool:
    return euclid_gcd(as_cycint(a), c.elem) == ONE


def identity_prime(A, B, p, mode=AdditiveMode.DIFFERENT, seed=None) -> IdentityReport:
    """Quartic minus quadratic sum, the eta-twisted quadratic sum and the S4 side at a prime."""
    p = _mod(p)
    A, B = as_cycint(A), as_cycint(B)
    if p.residue_count % 4 != 1:
        raise HypothesisError("N(p) must be 1 mod 4")
    if len(p.factors) != 1 or p.factors[0][1] != 1:
        raise HypothesisError("modulus must be prime")
    if not _coprime(A * B, p):
        raise HypothesisError("gcd(AB, p) must be 1")
    mode = AdditiveMode.parse(mode)
    quart = complete_sum(_quartic(A, B), p, mode=mode).value
    quad = complete_sum(_quadratic(A, B), p, mode=mode).value
    twisted = complete_sum(_quadratic(A, B), p, TwistSpec.symbol(2), mode).value
    rhs16 = c4_rhs(A, B, p, mode, 16)
    rhs8 = c4_rhs(A, B, p, mode, 8)
    s = math.sqrt(p.residue_count)
    lhs = quart - quad
    r1 = abs(lhs - twisted)
    r2 = abs(twisted - rhs16)
    return IdentityReport(
        "c4", p.residue_count, lhs,
        [("twisted_quadratic", twisted), ("kloosterman", rhs16)],
        max(r1, r2), seed, mode.value,
        {"residual_i_ii": r1, "residual_ii_iii": r2,
         "residual_alt_8A": abs(twisted - rhs8), "scale": s},
    )


def identity_prime_power(A, B, p, m: int, mode=AdditiveMode.DIFFERENT, seed=None,
                         check_squares: bool = True, form: str = "corrected") -> IdentityReport:
    """Quartic minus quadratic sum modulo p^m against the closed S4 side."""
    A, B, p = as_cycint(A), as_cycint(B), as_cycint(p)
    if m == 1:
        return identity_prime(A, B, p, mode, seed)
    pm = Modulus(p)
    if check_squares:
        _check_square_hypotheses(A, B)
    if not _coprime(2 * A * B, pm):
        raise HypothesisError("gcd(2AB, p) must be 1")
    mode = AdditiveMode.parse(mode)
    c = Modulus(p**m)
    lhs = complete_sum(_quartic(A, B), c, mode=mode).value - complete_sum(_quadratic(A, B), c, mode=mode).value
    sym = complex(power_symbol(A * B, c, 2))
    ph = phase(_frac(-(B * B) * inverse_mod(8 * A, c), c.elem), mode)
    arg = c.reduce(B * B * inverse_mod(16 * A, c))
    closed = s4_prime_power(arg, arg, p, m, mode, form).value
    brute = kloosterman_s4(arg, arg, c, mode).value
    rhs = sym * ph * closed
    return IdentityReport(
        "pow", c.residue_count, lhs, [("kloosterman_closed", rhs)], abs(lhs - rhs), seed, mode.value,
        {"rhs_brute_s4": sym * ph * brute, "residual_brute_s4": abs(lhs - sym * ph * brute),
         "closed_vs_brute_s4": abs(closed - brute)},
    )


def _check_square_hypotheses(A: CycInt, B: CycInt) -> None:
    if not is_square(A):
        raise HypothesisError(f"A = {A} is not a square")
    if not is_square(B):
        raise HypothesisError(f"B = {B} is not a square")
    if any(v % 4 for v in B.c):
        raise HypothesisError(f"B = {B} is not divisible by 4")


def is_square(x) -> bool:
    """Whether x is a square in Z[w] (exact search via embeddings)."""
    x = as_cycint(x)
    if not x:
        return True
    return integer_sqrt(x) is not None


def integer_sqrt(x) -> CycInt | None:
    x = as_cycint(x)
    e = x.embeddings()
    import cmath

    s1, s2 = cmath.sqrt(e.eta1), cmath.sqrt(e.eta2)
    # invert the embedding for each sign choice and round
    z1 = cmath.exp(1j * math.pi / 4)
    z2 = cmath.exp(3j * math.pi / 4)
    Mx = np.array([[1, z1, z1**2, z1**3], [1, z2, z2**2, z2**3],
                   [1, z1.conjugate(), z1.conjugate() ** 2, z1.conjugate() ** 3],
                   [1, z2.conjugate(), z2.conjugate() ** 2, z2.conjugate() ** 3]])
    for a1, a2 in itertools.product((1, -1), repeat=2):
        v1, v2 = a1 * s1, a2 * s2
        rhs = np.array([v1, v2, v1.conjugate(), v2.conjugate()])
        coef = np.linalg.solve(Mx, rhs).real
        cand = CycInt(*(int(round(t)) for t in coef))
        if cand * cand == x:
            return cand
    return None


def decompositions(c: Modulus) -> list[tuple[CycInt, CycInt]]:
    """Ordered coprime factorizations c = n*m (up to the unit of c) with n, m != c,
    listed as (n, m) with n*m == c exactly."""
    facs = c.factors
    unit = c.unit_part
    out = []
    for mask in itertools.product((0, 1), repeat=len(facs)):
        if all(mask) or not any(mask):
            continue
        n = ONE
        m = unit
        for (p, e), bit in zip(facs, mask):
            if bit:
                n = n * p**e
            else:
                m = m * p**e
        out.append((n, m))
    return out


def cross_term(A, B, n, m, mode=AdditiveMode.DIFFERENT, sign: int = 1) -> complex:
    """[sum_{x(n)} e(m^-1 (Ax^2+Bx)/n)] (AB/m)_2 e(-B^2 (8An)^-1/m) S4(sign B^2 (16An)^-1, same, m)."""
    A, B, n, m = map(as_cycint, (A, B, n, m))
    nm_, mm_ = Modulus(n), Modulus(m)
    if nm_.residue_count == 1:
        quad = 1 + 0j
    else:
        mbar = inverse_mod(m, nm_)
        quad = complete_sum(_quadratic(A, B).scaled(mbar), nm_, mode=mode).value
    if mm_.residue_count == 1:
        return quad
    sym = complex(power_symbol(A * B, mm_, 2))
    ph = phase(_frac(-(B * B) * inverse_mod(8 * A * n, mm_), m), mode)
    arg = mm_.reduce(sign * B * B * inverse_mod(16 * A * n, mm_))
    return quad * sym * ph * kloosterman_s4(arg, arg, mm_, mode).value


def identity_composite(A, B, c, mode=AdditiveMode.DIFFERENT, seed=None,
                       check_hypotheses: bool = True, cross_sign: int = 1) -> IdentityReport:
    """Quartic sum modulo c against Kloosterman + quadratic + cross terms."""
    c = _mod(c)
    A, B = as_cycint(A), as_cycint(B)
    if check_hypotheses:
        if not _is_one_mod4(c.elem):
            raise HypothesisError("c must be 1 mod 4")
        _check_square_hypotheses(A, B)
    if not _coprime(2 * A * B, c):
        raise HypothesisError("gcd(2AB, c) must be 1")
    mode = AdditiveMode.parse(mode)
    lhs = complete_sum(_quartic(A, B), c, mode=mode).value
    klo = c4_rhs(A, B, c, mode, 16)
    quad = complete_sum(_quadratic(A, B), c, mode=mode).value
    terms = [("kloosterman", klo), ("quadratic", quad)]
    decs = decompositions(c)
    for n, m in decs:
        terms.append((f"cross[{n}|{m}]", cross_term(A, B, n, m, mode, cross_sign)))
    total = complex(sum(v for _, v in terms))
    return IdentityReport(
        "c400", c.residue_count, lhs, terms, abs(lhs - total), seed, mode.value,
        {"cross_term_count": len(decs), "prime_power_factors": len(c.factors),
         "cross_sign": cross_sign},
    )


def cross_reduction_check(A, B, n, m, mode=AdditiveMode.DIFFERENT) -> IdentityReport:
    """sum_{x(m)} e(n^-1 (Ax^2+Bx)/m) against
    (n/m)_2 e((4mA)^-1 B^2 / n) e(-(4A)^-1 B^2 / (nm)) sqrt(N(m))."""
    A, B, n, m = map(as_cycint, (A, B, n, m))
    for x in (n, m):
        if not _is_one_mod4(x):
            raise HypothesisError(f"{x} must be 1 mod 4")
    if not _coprime(2 * A * B, Modulus(n * m)):
        raise HypothesisError("gcd(nm, 2AB) must be 1")
    mode = AdditiveMode.parse(mode)
    mm_, nn_ = Modulus(m), Modulus(n)
    if mm_.residue_count == 1:
        lhs = 1 + 0j
        rhs = 1 + 0j
    else:
        nbar = inverse_mod(n, mm_)
        lhs = complete_sum(_quadratic(A, B).scaled(nbar), mm_, mode=mode).value
        sym = complex(power_symbol(n, mm_, 2))
        # (4A)^-1 modulo nm; (4mA)^-1 modulo n
        nm_mod = Modulus(n * m)
        inv4A = inverse_mod(4 * A, nm_mod)
        t1 = phase(_frac(inverse_mod(4 * m * A, nn_) * B * B, n), mode) if nn_.residue_count > 1 else 1
        t2 = phase(_frac(-inv4A * B * B, n * m), mode)
        rhs = sym * t1 * t2 * math.sqrt(mm_.residue_count)
    return IdentityReport("cross_reduction", mm_.residue_count, lhs, [("closed", rhs)],
                          abs(lhs - rhs), None, mode.value)


def reciprocity_check(A, B, mode=AdditiveMode.PLAIN) -> dict:
    """Exact check of Tr(A^-1 mod B / B) + Tr(B^-1 mod A / A) = Tr(1/(AB)) mod 1."""
    A, B = as_cycint(A), as_cycint(B)
    if not A or not B:
        raise HypothesisError("A and B must be nonzero")
    if euclid_gcd(A, B) != ONE:
        raise NotCoprimeError("A and B must be coprime")
    mA, mB = Modulus(A), Modulus(B)
    Abar = inverse_mod(A, mB) if mB.residue_count > 1 else ZERO
    Bbar = inverse_mod(B, mA) if mA.residue_count > 1 else ZERO
    lhs = additive_phase(_frac(Abar, B), mode)
    rhs = (-additive_phase(_frac(Bbar, A), mode) + additive_phase(_frac(1, A * B), mode)) % 1
    diff = (lhs - rhs) % 1
    residual = min(diff, 1 - diff)
    return {"lhs": lhs, "rhs": rhs, "residual": residual}


def cnn_check(n: int, p: int, A: int, B: int, form: str = "corrected") -> dict:
    """Sum of e((A x^{2n} + B x^n)/p) over F_p against the character double sum.

    form="stated": sum over xi with xi^2 = rho, rho^n = 1 of
        rho(B^2) tau(eta) eta(-1)/p * sum_{a,b} xi(a) eta(a) xi(b) e((a+b+4ab A/B^2)/p)
    form="corrected": 1 + sum over rho^n = 1 of conj(rho)(B) xi(4) tau(eta) eta(-1)/p
        * sum_{a,b != 0} xi(a) eta(a) xi(b) e((a+b+4abA/B^2)/p), one xi per rho.
    """
    if (p - 1) % (2 * n):
        raise HypothesisError(f"p = {p} is not 1 mod {2 * n}")
    if A % p == 0 or B % p == 0:
        raise HypothesisError("gcd(AB, p) must be 1")
    fam = ff_family(p)
    x = np.arange(p, dtype=np.int64)
    xn = np.array([pow(int(v), n, p) for v in x], dtype=np.int64)
    vals = (A * xn % p * xn + B * xn) % p
    lhs = sum_phases(vals, p)
    eta = fam.quadratic()
    tau_eta = fam.gauss_sum(eta)
    eta_m1 = eta(p - 1)
    binv2 = pow(B * B % p, -1, p)
    c4 = 4 * A * binv2 % p
    a = np.arange(1, p, dtype=np.int64)
    dl = fam.dlog
    M = p * (p - 1)

    def inner(xi_k: int) -> complex:
        # sum_{a,b} xi(a) eta(a) xi(b) e((a + b + c4 a b)/p)
        total = 0j
        eta_k = (p - 1) // 2
        ea = (xi_k + eta_k) * dl[a] % (p - 1)
        for bb in range(1, p):
            eb = xi_k * dl[bb] % (p - 1)
            ph = (a + bb + c4 * a % p * bb) % p
            num = (ph * (p - 1) + ((ea + eb) % (p - 1)) * p) % M
            total += sum_phases(num, M)
        return total

    rho_ks = [j * (p - 1) // n for j in range(n)]
    rhs = 0j
    terms = []
    if form == "stated":
        for rk in rho_ks:
            rho = fam.char(rk)
            for xk in ((rk // 2), (rk // 2 + (p - 1) // 2)):
                if (2 * xk - rk) % (p - 1):
                    continue
                t = rho(B * B % p) * tau_eta * eta_m1 / p * inner(xk)
                terms.append(t)
                rhs += t
    else:
        rhs = 1 + 0j
        for rk in rho_ks:
            rho = fam.char(rk)
            xk = rk // 2
            xi = fam.char(xk)
            t = rho.conjugate()(B) * xi(4) * tau_eta * eta_m1 / p * inner(xk)
            terms.append(t)
            rhs += t
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs), "terms": terms, "form": form}


def random_element(rng: random.Random, bound: int = 10) -> CycInt:
    return CycInt(*(rng.randint(-bound, bound) for _ in range(4)))


def random_coprime(rng: random.Random, c: Modulus, bound: int = 10) -> CycInt:
    while True:
        x = random_element(rng, bound)
        if x and _coprime(x, c):
            return x
