import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from z8expsum.characters import power_symbol
from z8expsum.expsums import (
    HypothesisError,
    PolySpec,
    TwistSpec,
    cnn_check,
    complete_sum,
    cross_reduction_check,
    decompositions,
    identity_composite,
    identity_prime,
    identity_prime_power,
    integer_sqrt,
    is_square,
    kloosterman_s4,
    quad_sum_closed,
    random_coprime,
    reciprocity_check,
    s4_prime_power,
    sqrt_mod,
)
from z8expsum.ring import ONE, SQRT2, W, CycInt, FieldElem, Modulus, euclid_gcd, inverse_mod, prime_ideals_above

DELTA = 4 * W**3
P17 = prime_ideals_above(17)[0]
P41 = prime_ideals_above(41)[2]
P9 = prime_ideals_above(3)[1]
P25 = prime_ideals_above(5)[0]


def e_exact(num: CycInt, c: CycInt, mode: str) -> complex:
    den = c if mode == "plain" else c * DELTA
    t = (FieldElem.from_cycint(num) / den).trace()
    return cmath.exp(2j * math.pi * float(t - math.floor(t)))


def naive_sum(f: PolySpec, c: CycInt, mode="plain", k: int = 0) -> complex:
    tot = 0j
    for x in Modulus(c).residues():
        w = 1 if k == 0 else complex(power_symbol(x, c, k))
        if w:
            tot += w * e_exact(f(x), c, mode)
    return tot


def naive_kloosterman(r, s, c: CycInt, mode="plain") -> complex:
    m = Modulus(c)
    tot = 0j
    for a in m.residues():
        if euclid_gcd(a, c) != ONE:
            continue
        d = inverse_mod(a, m)
        tot += complex(power_symbol(a, c)) * e_exact(r * a + s * d, c, mode)
    return tot


@pytest.mark.parametrize("c", [P17, P9, P17 * P9, CycInt(1, 1, 0, 0) ** 3, P25 * P25])
@pytest.mark.parametrize("mode", ["plain", "different"])
def test_complete_sum_matches_naive(c, mode):
    f = PolySpec.from_terms([(CycInt(2, 1), 4), (CycInt(0, 3), 2), (5, 1)])
    assert abs(complete_sum(f, c, mode=mode).value - naive_sum(f, c, mode)) < 1e-9


@pytest.mark.parametrize("k", [2, 4])
def test_twisted_complete_sum(k):
    f = PolySpec.from_terms([(3, 2), (CycInt(1, 2), 1)])
    c = P17 * P9
    got = complete_sum(f, c, TwistSpec.symbol(k), "different").value
    assert abs(got - naive_sum(f, c, "different", k)) < 1e-9


@pytest.mark.parametrize("c", [P17, P41, P17 * P9, P25])
@pytest.mark.parametrize("mode", ["plain", "different"])
def test_kloosterman_matches_naive(c, mode):
    r, s = CycInt(2, 1), CycInt(3, 0, 1)
    assert abs(kloosterman_s4(r, s, c, mode).value - naive_kloosterman(r, s, c, mode)) < 1e-9


def test_polyspec_parse_forms():
    dense = PolySpec.parse("1,0,4,0,0")
    sparse = PolySpec.parse("a4=1,a2=4")
    assert dense == sparse
    assert dense.int_terms() == [(1, 4), (4, 2)]
    assert PolySpec.parse("a1=2,a1=3").int_terms() == [(5, 1)]
    for bad in ("", "1,,2", "x=1", "a2=", "1,b"):
        with pytest.raises(ValueError):
            PolySpec.parse(bad)


@pytest.mark.parametrize("p,m", [(P17, 1), (P17, 2), (P9, 3), (P41, 2)])
def test_sqrt_mod(p, m):
    q = Modulus(p**m)
    b = q.reduce(CycInt(3, 1) ** 2)
    roots = sqrt_mod(b, p, m)
    assert len(roots) == 2
    for u in roots:
        assert q.congruent(u * u, b)


@pytest.mark.parametrize("p,m", [(P17, 2), (P17, 3), (P9, 2), (P9, 3), (P25, 2), (P41, 2)])
@pytest.mark.parametrize("mode", ["plain", "different"])
def test_s4_prime_power_closed_form(p, m, mode):
    rng = random.Random(f"{p}{m}{mode}")
    mp = Modulus(p)
    for _ in range(3):
        a, b = random_coprime(rng, mp), random_coprime(rng, mp)
        closed = s4_prime_power(a, b, p, m, mode).value
        brute = kloosterman_s4(a, b, p**m, mode).value
        assert abs(closed - brute) < 1e-8 * abs(p.norm()) ** (m / 2)


# moduli = 1 mod 4: prime, prime power, product of distinct primes
@pytest.mark.parametrize("c", [CycInt(1, 4), CycInt(-3), CycInt(5, 4, 0, -4) ** 2,
                               CycInt(1, 4, 0, 4), CycInt(5)])
@pytest.mark.parametrize("mode", ["plain", "different"])
def test_quadratic_closed_form(c, mode):
    rng = random.Random(str(c))
    mc = Modulus(c)
    for _ in range(4):
        m_ = random_coprime(rng, mc)
        n_ = CycInt(rng.randint(-5, 5), rng.randint(-5, 5))
        r_ = CycInt(rng.randint(0, 3))
        f = PolySpec.from_terms([(m_, 2), (n_, 1), (r_, 0)])
        closed = quad_sum_closed(m_, n_, r_, c, mode).value
        assert abs(closed - naive_sum(f, c, mode)) < 1e-8 * math.sqrt(mc.residue_count)


@pytest.mark.parametrize("p", [P17, P41, P9, prime_ideals_above(73)[1]])
def test_identity_prime(p):
    rng = random.Random(1)
    mp = Modulus(p)
    for _ in range(3):
        A, B = random_coprime(rng, mp), random_coprime(rng, mp)
        rep = identity_prime(A, B, mp)
        s = math.sqrt(mp.residue_count)
        assert rep.extra["residual_i_ii"] < 1e-6 * s
        assert rep.extra["residual_ii_iii"] < 1e-6 * s


def test_identity_prime_rejects_bad_inputs():
    with pytest.raises(HypothesisError):
        identity_prime(P17, ONE, P17)
    with pytest.raises(HypothesisError):
        identity_prime(ONE, ONE, P17 * P41)


@pytest.mark.parametrize("p,m", [(P17, 2), (P9, 2), (P17, 3)])
def test_identity_prime_power(p, m):
    rep = identity_prime_power(CycInt(49), CycInt(4 * 121), p, m)
    assert rep.residual < 1e-6 * math.sqrt(abs(p.norm()) ** m)


def test_identity_composite_and_cross_count():
    c = Modulus(CycInt(1, 4) * CycInt(5, 4, 0, -4))
    rep = identity_composite(CycInt(9), CycInt(4 * 9), c)
    assert rep.residual < 1e-6 * math.sqrt(c.residue_count)
    assert rep.extra["cross_term_count"] == 2 ** len(c.factors) - 2


def test_decompositions_multiply_back():
    c = Modulus(P17 * P41 * P9)
    decs = decompositions(c)
    assert len(decs) == 2**3 - 2
    for n, m in decs:
        assert n * m == c.elem
        assert euclid_gcd(n, m) == ONE


def test_cross_reduction():
    rep = cross_reduction_check(CycInt(9), CycInt(196), CycInt(5), CycInt(1, 4))
    assert rep.residual < 1e-6 * math.sqrt(rep.modulus_norm)


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
@settings(max_examples=80)
def test_squares(a, b, c, d):
    x = CycInt(a, b, c, d)
    assert is_square(x * x)
    r = integer_sqrt(x * x)
    assert r is not None and (r == x or r == -x)


def test_non_square():
    assert not is_square(CycInt(3))
    assert integer_sqrt(CycInt(2)) in (SQRT2, -SQRT2)
    assert integer_sqrt(CycInt(7)) is None


@given(st.integers(1, 10**6), st.integers(1, 10**6))
@settings(max_examples=60)
def test_reciprocity_rational_pairs(a, b):
    A, B = CycInt(4 * a + 1), CycInt(4 * b + 1)
    if euclid_gcd(A, B) != ONE:
        return
    assert reciprocity_check(A, B)["residual"] == 0


@pytest.mark.parametrize("p,n", [(13, 2), (13, 3), (17, 4), (37, 3), (41, 4)])
def test_cnn_corrected(p, n):
    for A, B in ((1, 1), (3, 5), (7, 2)):
        assert cnn_check(n, p, A, B)["residual"] < 1e-8 * math.sqrt(p)
