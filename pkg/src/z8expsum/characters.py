"""Multiplicative and additive characters on residue rings of Z[w].

Character values are kept as integer exponents over a common order L
(value = exp(2 pi i e / L)); -1 marks a zero value. Complex numbers only
appear when a sum is finally evaluated.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from sympy import factorint, primitive_root

from .ring import (
    CycInt,
    FieldElem,
    Modulus,
    RingError,
    as_cycint,
    mul_array,
)

DEFAULT_DIRICHLET_BOUND = 10**6
DELTA = CycInt(0, 0, 0, 4)  # 4 w^3, derivative of x^4 + 1 at w


class AdditiveMode(str, enum.Enum):
    PLAIN = "plain"
    DIFFERENT = "different"

    @classmethod
    def parse(cls, value) -> "AdditiveMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown additive mode {value!r}") from None


def _mode(mode) -> AdditiveMode:
    return AdditiveMode.parse(mode)


# ---------------------------------------------------------------------------
# roots of unity


@dataclass(frozen=True)
class SymbolValue:
    """i**k for k in Z/4, or zero (k is None)."""

    k: int | None

    def __post_init__(self):
        if self.k is not None:
            object.__setattr__(self, "k", self.k % 4)

    @classmethod
    def zero(cls) -> "SymbolValue":
        return cls(None)

    @classmethod
    def root(cls, k: int) -> "SymbolValue":
        return cls(k)

    @property
    def is_zero(self) -> bool:
        return self.k is None

    def __mul__(self, other: "SymbolValue") -> "SymbolValue":
        if self.k is None or other.k is None:
            return SymbolValue(None)
        return SymbolValue(self.k + other.k)

    def __pow__(self, e: int) -> "SymbolValue":
        if self.k is None:
            return SymbolValue(0) if e == 0 else self
        return SymbolValue(self.k * e)

    def conjugate(self) -> "SymbolValue":
        return self if self.k is None else SymbolValue(-self.k)

    def __complex__(self) -> complex:
        if self.k is None:
            return 0j
        return (1 + 0j, 1j, -1 + 0j, -1j)[self.k]

    def to_int(self) -> int:
        """Value as an integer when real (+-1 or 0)."""
        if self.k is None:
            return 0
        if self.k % 2:
            raise ValueError(f"i^{self.k} is not real")
        return 1 if self.k == 0 else -1

    def __repr__(self):
        return "SymbolValue(0)" if self.k is None else f"SymbolValue(i^{self.k})"


def root_of_unity(e: np.ndarray | int, order: int):
    """exp(2 pi i e / order) evaluated once from the reduced exponent."""
    e = np.mod(e, order)
    return np.exp(2j * np.pi * e / order)


# ---------------------------------------------------------------------------
# additive characters


def additive_phase(alpha, mode=AdditiveMode.PLAIN) -> Fraction:
    """Tr(alpha) or Tr(alpha/delta), reduced into [0, 1)."""
    alpha = alpha if isinstance(alpha, FieldElem) else FieldElem.from_cycint(alpha)
    if _mode(mode) is AdditiveMode.DIFFERENT:
        alpha = alpha / DELTA
    return alpha.trace() % 1


def additive_char(alpha, mode=AdditiveMode.PLAIN) -> complex:
    t = additive_phase(alpha, mode)
    return complex(np.exp(2j * np.pi * float(t)))


def phase_numerators(c: Modulus, X: np.ndarray, mode=AdditiveMode.PLAIN) -> np.ndarray:
    """Integers t with e(x/c) = exp(2 pi i t / N(c)) for each row x of X."""
    n = c.residue_count
    u = c.phase_vector(_mode(mode).value)
    Xr = np.mod(X, n)
    acc = np.zeros(len(Xr), dtype=np.int64)
    for j in range(4):
        acc = (acc + (Xr[:, j] * u[j]) % n) % n
    return acc


def sum_phases(num: np.ndarray, den: int) -> complex:
    """Sum of exp(2 pi i num/den) with numpy's pairwise summation."""
    if len(num) == 0:
        return 0j
    return complex(np.sum(root_of_unity(num, den)))


# ---------------------------------------------------------------------------
# power residue symbols

# i^k for k = 0..3 as elements of the ring
_I_POWERS = (CycInt(1), CycInt(0, 0, 1, 0), CycInt(-1), CycInt(0, 0, -1, 0))


def _check_odd(c: Modulus) -> None:
    if c.residue_count % 2 == 0:
        raise RingError(f"modulus {c.elem} is divisible by 1+w")


def _prime_symbol_array(X: np.ndarray, p: Modulus, k: int) -> np.ndarray:
    """Exponents of i for (x/p)_k, -1 where p | x."""
    n = p.residue_count
    if (n - 1) % k:
        raise RingError(f"N(p) = {n} is not 1 mod {k}")
    R = p.pow_array(X, (n - 1) // k)
    idx = p.index_array(R)
    out = np.full(len(X), -2, dtype=np.int64)
    zero_idx = p.index(0)
    out[idx == zero_idx] = -1
    step = 4 // k
    for j in range(k):
        out[idx == p.index(_I_POWERS[(j * step) % 4])] = j * step
    if (out == -2).any():
        raise RingError(f"{p.elem} does not look prime: power map left the roots of unity")
    return out


def power_symbol_array(X: np.ndarray, c, k: int = 4) -> np.ndarray:
    """Vectorized power residue symbol as exponents of i (0..3), -1 for zero."""
    if k not in (2, 4):
        raise ValueError("k must be 2 or 4")
    c = c if isinstance(c, Modulus) else Modulus(c)
    _check_odd(c)
    out = np.zeros(len(X), dtype=np.int64)
    zero = np.zeros(len(X), dtype=bool)
    for p, e in c.factors:
        vals = _prime_symbol_array(np.asarray(X, dtype=np.int64), Modulus(p), k)
        zero |= vals < 0
        out = (out + np.where(vals < 0, 0, vals) * e) % 4
    out[zero] = -1
    return out


def power_symbol(a, c, k: int = 4) -> SymbolValue:
    """(a/c)_k for k in {2, 4}; multiplicative in c over its factorization."""
    a = as_cycint(a)
    c = c if isinstance(c, Modulus) else Modulus(c)
    _check_odd(c)
    if c.is_unit():
        return SymbolValue(0)
    if k not in (2, 4):
        raise ValueError("k must be 2 or 4")
    result = SymbolValue(0)
    for p, e in c.factors:
        pm = Modulus(p)
        n = pm.residue_count
        if (n - 1) % k:
            raise RingError(f"N(p) = {n} is not 1 mod {k}")
        r = pm.reduce(_pow_mod(a, (n - 1) // k, pm))
        if r == 0:
            return SymbolValue.zero()
        for j, ij in enumerate(_I_POWERS):
            if pm.reduce(ij) == r:
                if k == 2 and j % 2:
                    break
                result = result * SymbolValue(j * e)
                break
        else:
            raise RingError(f"{p} does not look prime")
    return result


def _pow_mod(a: CycInt, e: int, m: Modulus) -> CycInt:
    result = m.reduce(1)
    base = m.reduce(a)
    while e:
        if e & 1:
            result = m.reduce(result * base)
        base = m.reduce(base * base)
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# Dirichlet characters


class UnitGroup:
    """Brute-force structure of (R/D)^*: independent generators with their orders
    and a discrete-log table indexed by canonical residue index."""

    def __init__(self, D, bound: int = DEFAULT_DIRICHLET_BOUND):
        D = D if isinstance(D, Modulus) else Modulus(D)
        n_res = D.residue_count
        if n_res > bound:
            raise RingError(f"N(D) = {n_res} exceeds the character bound {bound}")
        self.modulus = D
        self._build()

    def _mul_idx(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        D = self.modulus
        res = D.residue_array
        return D.index_array(D.reduce_array(mul_array(res[a], res[b], D.residue_count)))

    def _pow_idx(self, a: np.ndarray, e: int) -> np.ndarray:
        result = np.full_like(a, self.one)
        base = a.copy()
        while e:
            if e & 1:
                result = self._mul_idx(result, base)
            base = self._mul_idx(base, base)
            e >>= 1
        return result

    def _build(self) -> None:
        D = self.modulus
        N = D.residue_count
        self.one = D.index(1) if N > 1 else 0
        mask = D.unit_mask() if N > 1 else np.ones(1, dtype=bool)
        units = np.nonzero(mask)[0].astype(np.int64)
        self.units = units
        self.size = n = len(units)
        gens: list[int] = []
        orders: list[int] = []
        # dlog coordinates of every unit, filled per Sylow subgroup
        coord_blocks: list[np.ndarray] = []
        for ell, a in sorted(factorint(n).items()):
            q = ell**a
            cof = n // q
            # idempotent e = 1 mod q, 0 mod n/q
            e_ell = cof * pow(cof, -1, q) % n if n > 1 else 0
            proj = self._pow_idx(units, e_ell)
            P = np.unique(proj)
            g_ell, o_ell, table = self._p_group_basis(P, ell)
            gens.extend(g_ell)
            orders.extend(o_ell)
            coord_blocks.append(table[proj])
        self.generators = tuple(int(g) for g in gens)
        self.orders = tuple(orders)
        self.exponent = math.lcm(*orders) if orders else 1
        dlog = np.full((N, len(orders)), -1, dtype=np.int64)
        if coord_blocks:
            dlog[units] = np.concatenate(coord_blocks, axis=1)
        else:
            dlog[units] = 0
        self.dlog = dlog
        if math.prod(self.orders) != n:
            raise RingError("unit group decomposition is inconsistent")

    def _p_group_basis(self, P: np.ndarray, ell: int):
        """Basis of an abelian ell-group P (sorted residue indices)."""
        N = self.modulus.residue_count
        # H as membership table: coords[idx] for idx in H
        coords = {self.one: ()}
        H_idx = np.array([self.one], dtype=np.int64)
        H_coords = np.zeros((1, 0), dtype=np.int64)
        basis: list[int] = []
        orders: list[int] = []
        while len(H_idx) < len(P):
            in_H = np.zeros(N, dtype=bool)
            in_H[H_idx] = True
            # quotient orders for all of P at once
            y = P.copy()
            qord = np.ones(len(P), dtype=np.int64)
            pending = ~in_H[y]
            while pending.any():
                qord[pending] *= ell
                y = np.where(pending, self._pow_idx(y, ell), y)
                pending = ~in_H[y]
            best = int(np.argmax(qord))  # first maximal, deterministic
            g = int(P[best])
            o = int(qord[best])
            go = int(self._pow_idx(np.array([g]), o)[0])
            e = coords[go]
            adj = g
            for b, eb, ob in zip(basis, e, orders):
                if eb % o:
                    raise RingError("basis construction failed (non-divisible exponent)")
                shift = (-(eb // o)) % ob
                if shift:
                    adj = int(self._mul_idx(np.array([adj]), self._pow_idx(np.array([b]), shift))[0])
            basis.append(adj)
            orders.append(o)
            # extend H by powers of adj
            new_idx = [H_idx]
            new_coords = [np.hstack([H_coords, np.zeros((len(H_idx), 1), dtype=np.int64)])]
            cur = H_idx
            for j in range(1, o):
                cur = self._mul_idx(cur, np.full_like(cur, adj))
                new_idx.append(cur)
                new_coords.append(
                    np.hstack([H_coords, np.full((len(H_idx), 1), j, dtype=np.int64)])
                )
            H_idx = np.concatenate(new_idx)
            H_coords = np.concatenate(new_coords)
            coords = {int(i): tuple(int(v) for v in row) for i, row in zip(H_idx, H_coords)}
        table = np.zeros((self.modulus.residue_count, len(orders)), dtype=np.int64)
        table[H_idx] = H_coords
        return basis, orders, table

    def character_count(self) -> int:
        return self.size


class DirichletChar:
    """Character of (R/D)^* extended by zero, values exp(2 pi i e/L)."""

    def __init__(self, modulus: Modulus, order_base: int, table_fn: Callable[[], np.ndarray],
                 label: str = "", key: tuple | None = None):
        self.modulus = modulus
        self.L = order_base
        self._table_fn = table_fn
        self.label = label
        self.key = key

    @cached_property
    def table(self) -> np.ndarray:
        """Exponent (mod L) per canonical residue index; -1 where not a unit."""
        t = np.asarray(self._table_fn(), dtype=np.int64)
        t.setflags(write=False)
        return t

    @cached_property
    def order(self) -> int:
        vals = self.table[self.table >= 0]
        g = self.L
        for v in np.unique(vals):
            g = math.gcd(g, int(v))
        return self.L // g

    def is_trivial(self) -> bool:
        return self.order == 1

    def exponent(self, x) -> int:
        if self.modulus.residue_count == 1:
            return 0
        return int(self.table[self.modulus.index(x)])

    def __call__(self, x) -> complex:
        e = self.exponent(x)
        if e < 0:
            return 0j
        return complex(root_of_unity(e, self.L))

    def exponents_of(self, X: np.ndarray) -> np.ndarray:
        if self.modulus.residue_count == 1:
            return np.zeros(len(X), dtype=np.int64)
        return self.table[self.modulus.index_array(self.modulus.reduce_array(X))]

    def values(self) -> np.ndarray:
        t = self.table
        return np.where(t >= 0, root_of_unity(np.maximum(t, 0), self.L), 0)

    def _combine(self, other: "DirichletChar", sign: int) -> "DirichletChar":
        if other.modulus != self.modulus:
            raise ValueError("characters have different moduli")
        L = math.lcm(self.L, other.L)
        a, b = self, other

        def fn():
            ta, tb = a.table, b.table
            out = (ta * (L // a.L) + sign * tb * (L // b.L)) % L
            return np.where((ta < 0) | (tb < 0), -1, out)

        return DirichletChar(self.modulus, L, fn, label=f"({a.label})*({b.label})")

    def __mul__(self, other: "DirichletChar") -> "DirichletChar":
        return self._combine(other, 1)

    def __truediv__(self, other: "DirichletChar") -> "DirichletChar":
        return self._combine(other, -1)

    def __pow__(self, e: int) -> "DirichletChar":
        base = self

        def fn():
            t = base.table
            return np.where(t < 0, -1, (t * e) % base.L)

        return DirichletChar(self.modulus, self.L, fn, label=f"({base.label})^{e}")

    def conjugate(self) -> "DirichletChar":
        return self ** -1

    def __repr__(self):
        return f"DirichletChar(mod {self.modulus.elem}, order {self.order}, {self.label})"


def trivial_character(D) -> DirichletChar:
    D = D if isinstance(D, Modulus) else Modulus(D)

    def fn():
        if D.residue_count == 1:
            return np.zeros(1, dtype=np.int64)
        return np.where(D.unit_mask(), 0, -1)

    return DirichletChar(D, 1, fn, label="trivial", key=())


def symbol_character(c, k: int = 4) -> DirichletChar:
    """x -> (x/c)_k as a Dirichlet character modulo c."""
    c = c if isinstance(c, Modulus) else Modulus(c)

    def fn():
        return power_symbol_array(c.residue_array, c, k)

    return DirichletChar(c, 4, fn, label=f"symbol{k}")


class CharacterGroup:
    """All characters modulo D, enumerated lazily from a brute-force unit group."""

    def __init__(self, D, bound: int = DEFAULT_DIRICHLET_BOUND):
        self.group = UnitGroup(D, bound)
        self.modulus = self.group.modulus

    def __len__(self):
        return self.group.size

    def keys(self):
        return itertools.product(*(range(o) for o in self.group.orders))

    def character(self, key: Sequence[int]) -> DirichletChar:
        g = self.group
        L = g.exponent
        key = tuple(int(k) % o for k, o in zip(key, g.orders))
        weights = np.array([k * (L // o) for k, o in zip(key, g.orders)], dtype=np.int64)

        def fn():
            if not len(weights):
                out = np.full(g.dlog.shape[0], -1, dtype=np.int64)
                out[g.units] = 0
                return out
            d = g.dlog
            out = (d % L) @ weights % L if L > 1 else np.zeros(len(d), dtype=np.int64)
            return np.where(d[:, 0] < 0, -1, out)

        return DirichletChar(self.modulus, L, fn, label=f"idx{key}", key=key)

    def __iter__(self):
        for key in self.keys():
            yield self.character(key)

    def __getitem__(self, i: int) -> DirichletChar:
        orders = self.group.orders
        key = []
        for o in reversed(orders):
            key.append(i % o)
            i //= o
        return self.character(tuple(reversed(key)))

    def of_order(self, order: int) -> list[DirichletChar]:
        return [chi for chi in self if chi.order == order]


def dirichlet_enumerate(D, bound: int = DEFAULT_DIRICHLET_BOUND) -> list[DirichletChar]:
    """All characters modulo D, trivial character first."""
    return list(CharacterGroup(D, bound))


# ---------------------------------------------------------------------------
# Gauss sums


def gauss_sum(chi: DirichletChar, c=None, mode=AdditiveMode.PLAIN, shift=1) -> complex:
    """sum over units x mod c of chi(x) e(shift*x/c)."""
    c = chi.modulus if c is None else (c if isinstance(c, Modulus) else Modulus(c))
    if c != chi.modulus:
        raise ValueError("character modulus differs from the summation modulus")
    if c.residue_count == 1:
        return 1 + 0j
    X = c.residue_array
    t = chi.table
    keep = t >= 0
    shift = as_cycint(shift)
    Y = mul_array(X[keep], np.array([shift.c], dtype=np.int64), c.residue_count)
    ph = phase_numerators(c, Y, mode)
    N = c.residue_count
    M = math.lcm(N, chi.L)
    num = (ph * (M // N) + t[keep] * (M // chi.L)) % M
    return sum_phases(num, M)


def fourier_inversion_check(A, B, p, mode=AdditiveMode.DIFFERENT) -> dict:
    """Rebuild sum_x eta(x) e((A x^2 + B x)/p) from the multiplicative expansion
    e(y/p) = 1/(q-1) sum_chi conj(chi(y)) tau(chi) on units y."""
    p = p if isinstance(p, Modulus) else Modulus(p)
    A, B = as_cycint(A), as_cycint(B)
    N = p.residue_count
    X = p.residue_array
    eta = symbol_character(p, 2).table
    Aa = np.array([A.c], dtype=np.int64)
    Ba = np.array([B.c], dtype=np.int64)
    V = p.reduce_array(mul_array(X, mul_array(X, Aa, N) + Ba, N))
    ph = phase_numerators(p, V, mode)
    units = eta >= 0
    # eta takes values i^0 or i^2
    weights = np.where(units, 1 - (np.maximum(eta, 0) // 2) * 2, 0).astype(float)
    direct = complex(np.sum(weights * root_of_unity(ph, N)))
    chars = CharacterGroup(p)
    taus = np.array([gauss_sum(chi, p, mode) for chi in chars])
    vidx = p.index_array(V)
    vals_by_char = []
    for chi, tau in zip(chars, taus):
        e = chi.table[vidx]
        vals_by_char.append(np.where(e >= 0, root_of_unity(-np.maximum(e, 0), chi.L), 0) * tau)
    expanded = np.sum(vals_by_char, axis=0) / (N - 1)
    expanded = np.where(vidx == p.index(0), 1.0, expanded)
    rebuilt = complex(np.sum(weights * expanded))
    return {"direct": direct, "rebuilt": rebuilt, "residual": abs(direct - rebuilt)}


# ---------------------------------------------------------------------------
# characters of prime fields


class FFChar:
    """Character of F_p^*: x -> exp(2 pi i k dlog(x) / (p-1)), zero at 0."""

    __slots__ = ("family", "k")

    def __init__(self, family: "FFCharFamily", k: int):
        self.family = family
        self.k = k % (family.p - 1)

    @property
    def p(self) -> int:
        return self.family.p

    @property
    def order(self) -> int:
        m = self.p - 1
        return m // math.gcd(m, self.k)

    def is_trivial(self) -> bool:
        return self.k == 0

    def exponent(self, x: int) -> int:
        x %= self.p
        if x == 0:
            return -1
        return self.k * int(self.family.dlog[x]) % (self.p - 1)

    def exponents(self) -> np.ndarray:
        d = self.family.dlog
        out = (self.k * d) % (self.p - 1)
        out[0] = -1
        return out

    def __call__(self, x: int) -> complex:
        e = self.exponent(x)
        return 0j if e < 0 else complex(root_of_unity(e, self.p - 1))

    def __mul__(self, other: "FFChar") -> "FFChar":
        return FFChar(self.family, self.k + other.k)

    def __pow__(self, e: int) -> "FFChar":
        return FFChar(self.family, self.k * e)

    def conjugate(self) -> "FFChar":
        return FFChar(self.family, -self.k)

    def __eq__(self, other):
        return isinstance(other, FFChar) and other.p == self.p and other.k == self.k

    def __hash__(self):
        return hash((self.p, self.k))

    def __repr__(self):
        return f"FFChar(p={self.p}, k={self.k}, order={self.order})"


class FFCharFamily:
    """Multiplicative characters of F_p^* built on a primitive root."""

    def __init__(self, p: int):
        self.p = p
        self.g = int(primitive_root(p))
        dlog = np.zeros(p, dtype=np.int64)
        x = 1
        for e in range(p - 1):
            dlog[x] = e
            x = x * self.g % p
        self.dlog = dlog

    def char(self, k: int) -> FFChar:
        return FFChar(self, k)

    def of_order_dividing(self, n: int) -> list[FFChar]:
        if (self.p - 1) % n:
            raise ValueError(f"p = {self.p} is not 1 mod {n}")
        step = (self.p - 1) // n
        return [FFChar(self, j * step) for j in range(n)]

    def all(self) -> list[FFChar]:
        return [FFChar(self, k) for k in range(self.p - 1)]

    def residue_character(self, n: int) -> FFChar:
        """A character of exact order n (the n-th power residue character)."""
        if (self.p - 1) % n:
            raise ValueError(f"p = {self.p} is not 1 mod {n}")
        return FFChar(self, (self.p - 1) // n)

    def quadratic(self) -> FFChar:
        return self.residue_character(2)

    def gauss_sum(self, chi: FFChar, a: int = 1) -> complex:
        """sum over x != 0 of chi(x) e^{2 pi i a x / p}; -1 for trivial chi when p does not divide a."""
        p = self.p
        x = np.arange(1, p, dtype=np.int64)
        M = p * (p - 1)
        num = ((a * x) % p) * (p - 1) + (chi.k * self.dlog[x] % (p - 1)) * p
        return sum_phases(num % M, M)


_FAMILIES: dict[int, FFCharFamily] = {}


def ff_family(p: int) -> FFCharFamily:
    fam = _FAMILIES.get(p)
    if fam is None:
        fam = _FAMILIES[p] = FFCharFamily(p)
    return fam


def ff_char_table(p: int, n: int) -> list[FFChar]:
    """Characters of F_p^* of order dividing n (requires p = 1 mod n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if (p - 1) % n:
        raise ValueError(f"p = {p} is not 1 mod {n}")
    return ff_family(p).of_order_dividing(n)


def hd_check(p: int, n: int, chi: FFChar) -> dict:
    """Residual of tau(chi^n) = -chi(n^n) prod_l tau(chi gamma^l) / prod_l tau(gamma^l),
    l = 0..n-1, gamma of exact order n, tau(trivial) = -1."""
    if (p - 1) % n:
        raise ValueError(f"p = {p} is not 1 mod {n}")
    if n % p == 0:
        raise ValueError("n must be invertible mod p")
    fam = ff_family(p)
    gamma = fam.residue_character(n)
    lhs = fam.gauss_sum(chi**n)
    num = 1 + 0j
    den = 1 + 0j
    for ell in range(n):
        num *= fam.gauss_sum(chi * gamma**ell)
        den *= fam.gauss_sum(gamma**ell)
    rhs = -chi(pow(n, n, p)) * num / den
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)}
