"""Exact arithmetic in Z[w] and Q(w), w a primitive eighth root of unity.

Elements are stored in the power basis {1, w, w^2, w^3} with w^4 = -1.
Everything here is exact big-integer / rational arithmetic; floats only
appear in :meth:`CycInt.embeddings`.

Moduli carry a triangular normal form of the ideal lattice ``cR`` inside
Z^4, which gives canonical residues, O(1) reduction and a deterministic
enumeration order for complete sums.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np
from sympy import factorint, symbols, Poly

__all__ = [
    "CycInt",
    "FieldElem",
    "Modulus",
    "EmbeddingPair",
    "RingError",
    "FactorizationTooLarge",
    "NotCoprimeError",
    "W",
    "ONE",
    "ZERO",
    "SQRT2",
    "FUNDAMENTAL_UNIT",
    "as_cycint",
    "trace",
    "norm",
    "galois",
    "euclid_gcd",
    "ext_gcd",
    "inverse_mod",
    "residues",
    "crt",
    "factor",
    "normalize_assoc",
    "canonical_associate",
    "is_unit",
    "DEFAULT_FACTOR_BOUND",
    "TORSION",
    "mul_array",
    "prime_ideals_above",
    "unit_inverse",
    "has_normalized_associate",
]

DEFAULT_FACTOR_BOUND = 10**12


class RingError(ValueError):
    """Precondition violation in ring arithmetic."""


class NotCoprimeError(RingError):
    """Raised when an inverse or CRT lift is blocked by a common factor."""

    def __init__(self, msg: str, gcd: "CycInt | None" = None):
        super().__init__(msg)
        self.gcd = gcd


class FactorizationTooLarge(RingError):
    pass


def _mul4(a: Sequence[int], b: Sequence[int]) -> tuple[int, int, int, int]:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b3 - a2 * b2 - a3 * b1,
        a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2,
        a0 * b2 + a1 * b1 + a2 * b0 - a3 * b3,
        a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0,
    )


def _galois4(c: Sequence, k: int) -> tuple:
    if k % 2 == 0:
        raise RingError(f"galois index must be odd, got {k}")
    out = [0, 0, 0, 0]
    for j, cj in enumerate(c):
        e = (j * k) % 8
        if e < 4:
            out[e] += cj
        else:
            out[e - 4] -= cj
    return tuple(out)


_ETA1 = [cmath.exp(1j * math.pi * j / 4) for j in range(4)]
_ETA2 = [cmath.exp(3j * math.pi * j / 4) for j in range(4)]


class CycInt:
    """Element c0 + c1 w + c2 w^2 + c3 w^3 of Z[w], w^4 = -1. Immutable."""

    __slots__ = ("c",)

    def __init__(self, c0: int = 0, c1: int = 0, c2: int = 0, c3: int = 0):
        object.__setattr__(self, "c", (int(c0), int(c1), int(c2), int(c3)))

    def __setattr__(self, name, value):
        raise AttributeError("CycInt is immutable")

    def __reduce__(self):
        return (CycInt, self.c)

    @classmethod
    def from_seq(cls, seq: Iterable[int]) -> "CycInt":
        return cls(*seq)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(*(x + y for x, y in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(*(x - y for x, y in zip(self.c, o.c)))

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return CycInt(*(-x for x in self.c))

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(*_mul4(self.c, o.c))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise RingError("negative powers are not integral")
        result = ONE
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other):
        return FieldElem.from_cycint(self) / other

    def __eq__(self, other):
        if isinstance(other, CycInt):
            return self.c == other.c
        if isinstance(other, int):
            return self.c == (other, 0, 0, 0)
        return NotImplemented

    def __hash__(self):
        return hash(("CycInt", self.c))

    def __bool__(self):
        return any(self.c)

    def __repr__(self):
        return f"CycInt{self.c}"

    def __str__(self):
        terms = []
        for j, cj in enumerate(self.c):
            if cj == 0:
                continue
            mono = ("", "w", "w^2", "w^3")[j]
            if mono and abs(cj) == 1:
                coef = "-" if cj < 0 else "+"
                terms.append(f"{coef}{mono}")
            else:
                terms.append(f"{cj:+d}{mono}")
        if not terms:
            return "0"
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s

    # structure ----------------------------------------------------------
    def galois(self, k: int) -> "CycInt":
        return CycInt(*_galois4(self.c, k))

    def conj(self) -> "CycInt":
        """Complex conjugation (w -> w^7)."""
        return self.galois(7)

    def cofactor(self) -> "CycInt":
        """Product of the three non-identity conjugates, so x*cofactor(x) = N(x)."""
        return self.galois(3) * self.galois(5) * self.galois(7)

    def norm(self) -> int:
        return (self * self.cofactor()).c[0]

    def trace(self) -> int:
        return 4 * self.c[0]

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def embeddings(self) -> "EmbeddingPair":
        e1 = sum(cj * z for cj, z in zip(self.c, _ETA1))
        e2 = sum(cj * z for cj, z in zip(self.c, _ETA2))
        return EmbeddingPair(complex(e1), complex(e2))

    def divides(self, other) -> bool:
        other = as_cycint(other)
        if not self:
            return not other
        q = FieldElem.from_cycint(other) / self
        return q.is_integral()

    def exact_div(self, other) -> "CycInt":
        q = FieldElem.from_cycint(self) / other
        if not q.is_integral():
            raise RingError(f"{other} does not divide {self}")
        return q.to_cycint()

    def divmod(self, other) -> tuple["CycInt", "CycInt"]:
        """Euclidean division: self = q*other + r with N(r) < N(other)."""
        b = as_cycint(other)
        if not b:
            raise ZeroDivisionError("division by zero in Z[w]")
        nb = b.norm()
        num = self * b.cofactor()
        q = CycInt(*(_round_half_away(x, nb) for x in num.c))
        r = self - q * b
        if r.norm() < nb:
            return q, r
        # nearest-coordinate rounding can tie; search the neighbouring box
        best = None
        for delta in itertools.product((-1, 0, 1), repeat=4):
            qq = q + CycInt(*delta)
            rr = self - qq * b
            nr = rr.norm()
            if best is None or nr < best[0]:
                best = (nr, qq, rr)
        if best[0] >= nb:
            raise RingError("Euclidean step failed to reduce the norm")
        return best[1], best[2]

    def __mod__(self, other):
        if isinstance(other, Modulus):
            return other.reduce(self)
        return Modulus(other).reduce(self)


def _round_half_away(a: int, b: int) -> int:
    if b < 0:
        a, b = -a, -b
    if a >= 0:
        return (2 * a + b) // (2 * b)
    return -((-2 * a + b) // (2 * b))


def _coerce(x):
    if isinstance(x, CycInt):
        return x
    if isinstance(x, (int, np.integer)):
        return CycInt(int(x))
    return NotImplemented


def as_cycint(x: Union[int, CycInt, Sequence[int]]) -> CycInt:
    if isinstance(x, CycInt):
        return x
    if isinstance(x, (int, np.integer)):
        return CycInt(int(x))
    if isinstance(x, Modulus):
        return x.elem
    if isinstance(x, (tuple, list)) and len(x) == 4:
        return CycInt(*x)
    raise TypeError(f"cannot interpret {x!r} as an element of Z[w]")


W = CycInt(0, 1, 0, 0)
ONE = CycInt(1)
ZERO = CycInt(0)
SQRT2 = CycInt(0, 1, 0, -1)
FUNDAMENTAL_UNIT = ONE + SQRT2
TORSION = tuple(W**k for k in range(8))


class FieldElem:
    """Element of Q(w) with exact rational coordinates."""

    __slots__ = ("q",)

    def __init__(self, q0=0, q1=0, q2=0, q3=0):
        object.__setattr__(self, "q", tuple(Fraction(x) for x in (q0, q1, q2, q3)))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElem is immutable")

    def __reduce__(self):
        return (FieldElem, self.q)

    @classmethod
    def from_cycint(cls, x) -> "FieldElem":
        x = as_cycint(x)
        return cls(*x.c)

    def _other(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(other)
        if isinstance(other, CycInt):
            return FieldElem.from_cycint(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElem(*(x + y for x, y in zip(self.q, o.q)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElem(*(x - y for x, y in zip(self.q, o.q)))

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return FieldElem(*(-x for x in self.q))

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElem(*_mul4(self.q, o.q))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(w)")
            return FieldElem(*(x / other for x in self.q))
        o = self._other(other)
        if o is NotImplemented:
            return o
        cof = _galois4(o.q, 3)
        cof = _mul4(_mul4(cof, _galois4(o.q, 5)), _galois4(o.q, 7))
        n = _mul4(o.q, cof)[0]
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(w)")
        num = _mul4(self.q, cof)
        return FieldElem(*(x / n for x in num))

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o / self

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self.q == o.q

    def __hash__(self):
        if self.is_integral():
            return hash(self.to_cycint())
        return hash(("FieldElem", self.q))

    def __repr__(self):
        return "FieldElem(" + ", ".join(str(x) for x in self.q) + ")"

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.q)

    def to_cycint(self) -> CycInt:
        if not self.is_integral():
            raise RingError(f"{self!r} is not integral")
        return CycInt(*(int(x) for x in self.q))

    def trace(self) -> Fraction:
        return 4 * self.q[0]

    def galois(self, k: int) -> "FieldElem":
        return FieldElem(*_galois4(self.q, k))


class EmbeddingPair:
    """Images of an element under w -> e^{i pi/4} and w -> e^{3 i pi/4}."""

    __slots__ = ("eta1", "eta2")

    def __init__(self, eta1: complex, eta2: complex):
        self.eta1 = eta1
        self.eta2 = eta2

    @property
    def abs2(self) -> tuple[float, float]:
        return abs(self.eta1) ** 2, abs(self.eta2) ** 2

    def norm(self) -> float:
        a, b = self.abs2
        return a * b

    def __iter__(self):
        return iter((self.eta1, self.eta2))

    def __repr__(self):
        return f"EmbeddingPair({self.eta1!r}, {self.eta2!r})"


# ---------------------------------------------------------------------------
# free functions mirroring the methods


def trace(x) -> Fraction:
    if isinstance(x, FieldElem):
        return x.trace()
    return Fraction(as_cycint(x).trace())


def norm(x) -> int:
    return as_cycint(x).norm()


def galois(x, k: int):
    if isinstance(x, FieldElem):
        return x.galois(k)
    return as_cycint(x).galois(k)


def is_unit(x) -> bool:
    return as_cycint(x).is_unit()


def unit_inverse(u: CycInt) -> CycInt:
    n = u.norm()
    if abs(n) != 1:
        raise RingError(f"{u} is not a unit")
    return u.cofactor() * n


# ---------------------------------------------------------------------------
# gcd, associates


def ext_gcd(a, b) -> tuple[CycInt, CycInt, CycInt]:
    """Return (g, s, t) with s*a + t*b = g, g a gcd of a and b (not normalized)."""
    a, b = as_cycint(a), as_cycint(b)
    if not a and not b:
        raise RingError("gcd(0, 0) is undefined")
    r0, r1 = a, b
    s0, s1 = ONE, ZERO
    t0, t1 = ZERO, ONE
    while r1:
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def _balance_power(x: CycInt) -> int:
    """Power j of the fundamental unit making |eta1(u^j x)| and |eta2(u^j x)| closest."""
    e1, e2 = x.embeddings().abs2
    if e1 == 0 or e2 == 0:
        return 0
    # |eta1(u)|^2 / |eta2(u)|^2 = (1+sqrt2)^4
    ratio = math.log(e1 / e2) / (4 * math.log(1 + math.sqrt(2)))
    return -round(ratio)


def _unit_power(j: int) -> CycInt:
    if j >= 0:
        return FUNDAMENTAL_UNIT**j
    return unit_inverse(FUNDAMENTAL_UNIT) ** (-j)


def canonical_associate(x) -> tuple[CycInt, CycInt]:
    """Deterministic associate of x: balanced embeddings, then lexicographically
    smallest absolute coordinates over the torsion. Returns (x', unit)."""
    x = as_cycint(x)
    if not x:
        return x, ONE
    j = _balance_power(x)
    best = None
    for jj in (j, j - 1, j + 1):
        base_u = _unit_power(jj)
        y = base_u * x
        e1, e2 = y.embeddings().abs2
        score = abs(math.log(e1 / e2))
        if best is None or score < best[0] - 1e-9:
            best = (score, base_u)
    base_u = best[1]
    candidates = []
    for t in TORSION:
        u = t * base_u
        y = u * x
        key = (tuple(abs(v) for v in y.c), tuple(-v for v in y.c))
        candidates.append((key, y, u))
    candidates.sort(key=lambda item: item[0])
    return candidates[0][1], candidates[0][2]


def _unit_cycle_mod4() -> tuple[CycInt, ...]:
    powers = [ONE]
    u = FUNDAMENTAL_UNIT
    cur = u
    while not all(v % 4 == (1 if i == 0 else 0) for i, v in enumerate(cur.c)):
        powers.append(cur)
        cur = cur * u
    return tuple(powers)


_UNIT_CYCLE_MOD4 = _unit_cycle_mod4()


def _is_one_mod4(x: CycInt) -> bool:
    return x.c[0] % 4 == 1 and x.c[1] % 4 == 0 and x.c[2] % 4 == 0 and x.c[3] % 4 == 0


def normalize_assoc(c) -> tuple[CycInt, CycInt]:
    """Return (eps*c, eps) with eps*c = 1 mod 4, eps a unit.

    The unit is unique modulo units congruent to 1 mod 4; the search runs over
    the torsion times one period of the fundamental unit modulo 4.
    """
    c = as_cycint(c)
    if not c or c.norm() % 2 == 0:
        raise RingError(f"{c} is not coprime to 2")
    for up in _UNIT_CYCLE_MOD4:
        for t in TORSION:
            eps = up * t
            y = eps * c
            if _is_one_mod4(y):
                return y, eps
    raise RingError(f"no associate of {c} is congruent to 1 mod 4")


def has_normalized_associate(c) -> bool:
    try:
        normalize_assoc(c)
    except RingError:
        return False
    return True


def _canonicalize(g: CycInt) -> CycInt:
    if g.norm() % 2 == 1:
        try:
            return normalize_assoc(g)[0]
        except RingError:
            pass
    return canonical_associate(g)[0]


def euclid_gcd(a, b) -> CycInt:
    """Greatest common divisor, canonicalized up to units."""
    g, _, _ = ext_gcd(a, b)
    if g.is_unit():
        return ONE
    return _canonicalize(g)


# ---------------------------------------------------------------------------
# residue rings


def _hnf_basis(gens: list[list[int]]) -> list[list[int]]:
    """Triangular basis h[0..3] of the lattice spanned by `gens` (full rank).

    h[i] is supported on coordinates 0..i with h[i][i] > 0, and off-diagonal
    entries reduced into [0, h[j][j]).
    """
    active = [list(v) for v in gens]
    basis: list[list[int] | None] = [None] * 4
    for i in range(3, -1, -1):
        while True:
            nz = [v for v in active if v[i] != 0]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda v: abs(v[i]))
            for v in nz:
                if v is piv:
                    continue
                q = v[i] // piv[i]
                for k in range(4):
                    v[k] -= q * piv[k]
        nz = [v for v in active if v[i] != 0]
        if not nz:
            raise RingError("lattice is not of full rank")
        piv = nz[0]
        if piv[i] < 0:
            piv = [-x for x in piv]
        active = [v for v in active if v[i] == 0 and any(v)]
        basis[i] = piv
    for i in range(4):
        h = basis[i]
        for j in range(i - 1, -1, -1):
            q = h[j] // basis[j][j]
            if q:
                for k in range(j + 1):
                    h[k] -= q * basis[j][k]
    return basis  # type: ignore[return-value]


class Modulus:
    """A nonzero element c of Z[w] together with its residue-ring data."""

    def __init__(self, c, factor_bound: int = DEFAULT_FACTOR_BOUND):
        if isinstance(c, Modulus):
            c = c.elem
        c = as_cycint(c)
        if not c:
            raise RingError("modulus must be nonzero")
        self.elem = c
        self.factor_bound = factor_bound
        n = abs(c.norm())
        self.residue_count = n
        gens = [list((c * W**j).c) for j in range(4)]
        self.basis = _hnf_basis(gens)
        self.diag = tuple(self.basis[i][i] for i in range(4))
        if math.prod(self.diag) != n:
            raise RingError("normal form determinant does not match the norm")

    def __repr__(self):
        return f"Modulus({self.elem})"

    def __eq__(self, other):
        if isinstance(other, Modulus):
            return self.elem == other.elem
        return NotImplemented

    def __hash__(self):
        return hash(("Modulus", self.elem.c))

    @property
    def norm(self) -> int:
        return self.residue_count

    @property
    def lattice(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(h) for h in self.basis)

    def is_unit(self) -> bool:
        return self.residue_count == 1

    # scalar reduction ----------------------------------------------------
    def reduce(self, x) -> CycInt:
        x = list(as_cycint(x).c)
        for i in range(3, -1, -1):
            q = x[i] // self.diag[i]
            if q:
                h = self.basis[i]
                for k in range(i + 1):
                    x[k] -= q * h[k]
        return CycInt(*x)

    def index(self, x) -> int:
        r = self.reduce(x).c
        d = self.diag
        return ((r[0] * d[1] + r[1]) * d[2] + r[2]) * d[3] + r[3]

    def congruent(self, x, y) -> bool:
        return self.reduce(as_cycint(x) - as_cycint(y)) == ZERO

    def divides(self, x) -> bool:
        return self.reduce(x) == ZERO

    # vectorized helpers ---------------------------------------------------
    @cached_property
    def _basis_arr(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64)

    def reduce_array(self, X: np.ndarray) -> np.ndarray:
        """Reduce an (n, 4) int64 array of elements to canonical residues."""
        n = self.residue_count
        X = np.mod(X, n)  # n*R is contained in cR
        B = self._basis_arr
        for i in range(3, -1, -1):
            q = X[:, i] // self.diag[i]
            X = X - q[:, None] * B[i][None, :]
        return X

    def index_array(self, Xred: np.ndarray) -> np.ndarray:
        d = self.diag
        return ((Xred[:, 0] * d[1] + Xred[:, 1]) * d[2] + Xred[:, 2]) * d[3] + Xred[:, 3]

    @cached_property
    def residue_array(self) -> np.ndarray:
        """All canonical residues as an (N, 4) int64 array in lexicographic order."""
        d = self.diag
        grids = np.indices(d, dtype=np.int64).reshape(4, -1).T
        grids.setflags(write=False)
        return grids

    def residues(self) -> list[CycInt]:
        return [CycInt(*map(int, row)) for row in self.residue_array]

    def mul_array(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Product of residues (broadcasting), reduced mod c."""
        _check_vec_size(self.residue_count)
        return self.reduce_array(mul_array(X, Y, self.residue_count))

    def pow_array(self, X: np.ndarray, e: int) -> np.ndarray:
        result = np.zeros_like(X)
        result[:, 0] = 1
        result = self.reduce_array(result)
        base = self.reduce_array(X)
        while e:
            if e & 1:
                result = self.mul_array(result, base)
            base = self.mul_array(base, base)
            e >>= 1
        return result

    def phase_vector(self, mode: str = "plain") -> np.ndarray:
        """Integer vector u with e(Tr(y/c)) = exp(2 pi i (u.y mod N)/N) for y in R.

        ``mode="different"`` gives the character y -> e(Tr(y/(c delta))), delta = 4 w^3.
        """
        n = self.residue_count
        cof = self.elem.cofactor()
        sign = 1 if self.elem.norm() > 0 else -1
        cols = [cof * W**j for j in range(4)]
        if mode == "plain":
            u = [4 * sign * col.c[0] for col in cols]
        elif mode == "different":
            u = [sign * col.c[3] for col in cols]
        else:
            raise ValueError(f"unknown additive mode {mode!r}")
        return np.array([v % n for v in u], dtype=np.int64)

    @cached_property
    def _factorization(self) -> tuple[CycInt, tuple[tuple[CycInt, int], ...]]:
        unit, fac = _factor_impl(self.elem, self.factor_bound)
        return unit, tuple(fac)

    @property
    def factors(self) -> tuple[tuple[CycInt, int], ...]:
        return self._factorization[1]

    @property
    def unit_part(self) -> CycInt:
        return self._factorization[0]

    def prime_power_moduli(self) -> list["Modulus"]:
        return [Modulus(p**e) for p, e in self.factors]

    def unit_mask(self, X: np.ndarray | None = None) -> np.ndarray:
        """Boolean mask of residues coprime to c."""
        if X is None:
            X = self.residue_array
        mask = np.ones(len(X), dtype=bool)
        for p, _ in self.factors:
            mp = Modulus(p)
            mask &= mp.reduce_array(X).any(axis=1)
        return mask


def mul_array(X: np.ndarray, Y: np.ndarray, mod: int | None = None) -> np.ndarray:
    """Vectorized product in Z[w] of (n, 4) int64 arrays, optionally reduced mod an integer."""
    a0, a1, a2, a3 = (X[..., k] for k in range(4))
    b0, b1, b2, b3 = (Y[..., k] for k in range(4))
    out = np.stack(
        [
            a0 * b0 - a1 * b3 - a2 * b2 - a3 * b1,
            a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2,
            a0 * b2 + a1 * b1 + a2 * b0 - a3 * b3,
            a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )
    if mod is not None:
        out = np.mod(out, mod)
    return out


_VEC_LIMIT = 1 << 29


def _check_vec_size(n: int) -> None:
    if n >= _VEC_LIMIT:
        raise RingError(f"modulus norm {n} too large for int64 vector arithmetic")


def residues(c) -> list[CycInt]:
    return Modulus(c).residues()


def inverse_mod(a, c) -> CycInt:
    c = c if isinstance(c, Modulus) else Modulus(c)
    a = as_cycint(a)
    if c.is_unit():
        return ZERO
    g, s, _ = ext_gcd(a, c.elem)
    if not g.is_unit():
        raise NotCoprimeError(f"{a} is not invertible mod {c.elem}", gcd=_canonicalize(g))
    return c.reduce(s * unit_inverse(g))


def crt(x1, c1, x2, c2) -> CycInt:
    """The residue mod c1*c2 congruent to x1 mod c1 and x2 mod c2."""
    m1 = c1 if isinstance(c1, Modulus) else Modulus(c1)
    m2 = c2 if isinstance(c2, Modulus) else Modulus(c2)
    g, s, t = ext_gcd(m1.elem, m2.elem)
    if not g.is_unit():
        raise NotCoprimeError("CRT moduli are not coprime", gcd=_canonicalize(g))
    gi = unit_inverse(g)
    s, t = s * gi, t * gi  # s*c1 + t*c2 = 1
    x = as_cycint(x1) * t * m2.elem + as_cycint(x2) * s * m1.elem
    return Modulus(m1.elem * m2.elem).reduce(x)


# ---------------------------------------------------------------------------
# factorization

_X = symbols("x")
_PI_2 = CycInt(1, 1, 0, 0)


def _prime_ideals_above(p: int) -> list[CycInt]:
    """Generators of the prime ideals of Z[w] lying over the rational prime p."""
    if p == 2:
        return [_PI_2]
    poly = Poly(_X**4 + 1, _X, modulus=p)
    _, facs = poly.factor_list()
    gens = []
    for f, _mult in facs:
        coeffs = [int(v) % p for v in reversed(f.all_coeffs())]
        g_elem = CycInt(*(coeffs + [0] * (4 - len(coeffs)))[:4]) if len(coeffs) <= 4 else None
        if len(coeffs) == 5:  # x^4 + 1 irreducible cannot happen for odd p
            raise RingError(f"x^4+1 unexpectedly irreducible mod {p}")
        g = euclid_gcd(CycInt(p), g_elem)
        gens.append(g)
    return gens


def _factor_impl(c: CycInt, bound: int) -> tuple[CycInt, list[tuple[CycInt, int]]]:
    n = abs(c.norm())
    if n > bound:
        raise FactorizationTooLarge(f"norm {n} exceeds factorization bound {bound}")
    if n == 1:
        return c, []
    rest = c
    out: list[tuple[CycInt, int]] = []
    for p in sorted(factorint(n)):
        for pi in _prime_ideals_above(p):
            e = 0
            while True:
                q = FieldElem.from_cycint(rest) / pi
                if not q.is_integral():
                    break
                rest = q.to_cycint()
                e += 1
            if e:
                out.append((pi, e))
    if not rest.is_unit():
        raise RingError(f"factorization of {c} left a non-unit cofactor {rest}")
    out.sort(key=lambda pe: (pe[0].norm(), pe[0].c))
    return rest, out


def factor(c, bound: int = DEFAULT_FACTOR_BOUND) -> tuple[CycInt, list[tuple[CycInt, int]]]:
    """Factor c into (unit, [(prime, exponent), ...]) with unit * prod(p^e) == c.

    Primes coprime to 2 are normalized to be 1 mod 4 when such an associate
    exists; otherwise a deterministic canonical associate is used.
    """
    c = as_cycint(c)
    if not c:
        raise RingError("cannot factor 0")
    if c.is_unit():
        raise RingError(f"{c} is a unit")
    return _factor_impl(c, bound)


def prime_ideals_above(p: int) -> list[CycInt]:
    return list(_prime_ideals_above(p))
