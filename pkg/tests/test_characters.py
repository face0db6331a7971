import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from z8expsum.characters import (
    AdditiveMode,
    CharacterGroup,
    SymbolValue,
    additive_char,
    ff_family,
    fourier_inversion_check,
    gauss_sum,
    hd_check,
    power_symbol,
    power_symbol_array,
    symbol_character,
    trivial_character,
)
from z8expsum.ring import ONE, CycInt, FieldElem, Modulus, W, euclid_gcd, prime_ideals_above

coord = st.integers(-30, 30)
elems = st.builds(CycInt, coord, coord, coord, coord)
I_POW = (ONE, W**2, -ONE, -(W**2))

P17 = prime_ideals_above(17)[0]
P41 = prime_ideals_above(41)[1]
P9 = prime_ideals_above(3)[0]  # residue field of size 9


def euler_criterion(a: CycInt, p: CycInt, k: int) -> SymbolValue:
    """Brute force: the k-th root of unity congruent to a^((N-1)/k) mod p."""
    m = Modulus(p)
    if m.divides(a):
        return SymbolValue.zero()
    r = m.reduce(a ** ((m.residue_count - 1) // k))
    step = 4 // k
    for j in range(k):
        if m.congruent(r, I_POW[(j * step) % 4]):
            return SymbolValue(j * step)
    raise AssertionError("power left the roots of unity")


@pytest.mark.parametrize("p", [P17, P41, P9])
@given(a=elems)
@settings(max_examples=40)
def test_quartic_symbol_matches_euler(p, a):
    assert power_symbol(a, p, 4) == euler_criterion(a, p, 4)
    assert power_symbol(a, p, 2) == euler_criterion(a, p, 2)


@given(elems, elems)
@settings(max_examples=60)
def test_symbol_multiplicative_in_numerator(a, b):
    c = P17 * P41
    assert power_symbol(a * b, c) == power_symbol(a, c) * power_symbol(b, c)


@given(elems)
@settings(max_examples=60)
def test_symbol_multiplicative_in_denominator(a):
    assert power_symbol(a, P17 * P41) == power_symbol(a, P17) * power_symbol(a, P41)


def test_symbol_array_matches_scalar():
    c = Modulus(P17 * P9)
    X = c.residue_array[::7]
    arr = power_symbol_array(X, c, 4)
    for row, e in zip(X, arr):
        s = power_symbol(CycInt(*map(int, row)), c)
        assert (s.k if s.k is not None else -1) == e


def test_symbol_value_algebra():
    i = SymbolValue(1)
    assert complex(i**4) == 1
    assert (i * i.conjugate()).k == 0
    assert complex(SymbolValue.zero()) == 0
    assert SymbolValue(2).to_int() == -1
    with pytest.raises(ValueError):
        SymbolValue(1).to_int()


def test_symbol_rejects_even_modulus():
    with pytest.raises(ValueError):
        power_symbol(ONE, CycInt(1, 1, 0, 0))


@pytest.mark.parametrize("D", [P17, P9, P17 * P9, CycInt(5), CycInt(1, 4, 0, 4)])
def test_character_group_orthogonality(D):
    m = Modulus(D)
    G = CharacterGroup(m)
    units = [x for x in m.residues() if euclid_gcd(x, D) == ONE]
    assert len(G) == len(units)
    tables = set()
    for chi in G:
        vals = chi.values()
        total = vals.sum()
        if chi.is_trivial():
            assert abs(total - len(G)) < 1e-8
        else:
            assert abs(total) < 1e-8
        tables.add(tuple(np.round(vals, 8)))
    assert len(tables) == len(G)


@pytest.mark.parametrize("D", [P17 * P9, CycInt(5)])
def test_characters_are_multiplicative(D):
    m = Modulus(D)
    res = [x for x in m.residues() if euclid_gcd(x, D) == ONE][:25]
    for chi in list(CharacterGroup(m))[:8]:
        for x in res[:8]:
            for y in res[:8]:
                assert abs(chi(x * y) - chi(x) * chi(y)) < 1e-9


def test_symbol_character_has_order_four():
    chi = symbol_character(P17, 4)
    assert chi.order == 4
    assert (chi**2).order == 2
    assert trivial_character(P17).is_trivial()


@pytest.mark.parametrize("p", [P17, P41, P9])
@pytest.mark.parametrize("mode", list(AdditiveMode))
def test_gauss_sum_modulus(p, mode):
    m = Modulus(p)
    for chi in list(CharacterGroup(m))[:6]:
        tau = gauss_sum(chi, m, mode)
        if chi.is_trivial():
            assert abs(tau + 1) < 1e-9
        else:
            assert abs(abs(tau) ** 2 - m.residue_count) < 1e-7


def test_additive_char_trivial_on_integral_traces():
    for x in (ONE, CycInt(3, 1, 4, 1)):
        assert abs(additive_char(x) - 1) < 1e-12
    half = FieldElem(1, 0, 0, 0) / 8  # Tr = 1/2
    assert abs(additive_char(half) + 1) < 1e-12


@pytest.mark.parametrize("p", [P17, P41])
def test_fourier_inversion(p):
    assert fourier_inversion_check(CycInt(3), CycInt(2, 1), p)["residual"] < 1e-8


def naive_ff_gauss(p: int, chi) -> complex:
    return sum(chi(x) * cmath.exp(2j * math.pi * x / p) for x in range(1, p))


@pytest.mark.parametrize("p", [13, 17, 29])
def test_ff_gauss_sum_against_naive(p):
    fam = ff_family(p)
    for chi in fam.all():
        assert abs(fam.gauss_sum(chi) - naive_ff_gauss(p, chi)) < 1e-9
        if not chi.is_trivial():
            assert abs(abs(fam.gauss_sum(chi)) ** 2 - p) < 1e-8


@pytest.mark.parametrize("p,n", [(13, 2), (13, 3), (13, 4), (37, 4), (73, 3)])
def test_hasse_davenport(p, n):
    for chi in ff_family(p).all():
        assert hd_check(p, n, chi)["residual"] < 1e-8 * math.sqrt(p)
