import cmath
import itertools
import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from z8expsum.ring import (
    ONE,
    SQRT2,
    FUNDAMENTAL_UNIT,
    TORSION,
    W,
    ZERO,
    CycInt,
    FieldElem,
    Modulus,
    NotCoprimeError,
    RingError,
    crt,
    euclid_gcd,
    factor,
    inverse_mod,
    normalize_assoc,
    prime_ideals_above,
    unit_inverse,
)

coord = st.integers(-40, 40)
elems = st.builds(CycInt, coord, coord, coord, coord)
nonzero = elems.filter(bool)
ZETA = cmath.exp(1j * math.pi / 4)


def numeric(x: CycInt, k: int = 1) -> complex:
    z = ZETA**k
    return sum(c * z**j for j, c in enumerate(x.c))


def mult_matrix(x: CycInt) -> list[list[int]]:
    return [list((x * W**j).c) for j in range(4)]


def det4(m) -> int:
    return round(np.linalg.det(np.array(m, dtype=float)))


def test_w_has_order_eight():
    assert W**4 == -1
    assert W**8 == ONE
    assert len(set(TORSION)) == 8


def test_sqrt2_and_fundamental_unit():
    assert SQRT2 * SQRT2 == 2
    assert FUNDAMENTAL_UNIT.is_unit()
    assert unit_inverse(FUNDAMENTAL_UNIT) * FUNDAMENTAL_UNIT == ONE


@given(elems, elems)
def test_product_matches_complex_embedding(x, y):
    assert abs(numeric(x * y) - numeric(x) * numeric(y)) < 1e-6 * (1 + abs(numeric(x)) * abs(numeric(y)))


@given(elems, elems, elems)
def test_ring_axioms(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == ZERO


@given(elems)
def test_norm_is_multiplication_determinant(x):
    assert x.norm() == det4(mult_matrix(x))


@given(elems)
def test_norm_is_product_of_conjugates(x):
    prod = 1
    for k in (1, 3, 5, 7):
        prod *= numeric(x, k)
    assert abs(prod - x.norm()) < 1e-6 * (1 + abs(x.norm()))


@given(elems, elems)
def test_norm_multiplicative(x, y):
    assert (x * y).norm() == x.norm() * y.norm()


@given(elems, st.sampled_from([1, 3, 5, 7]))
def test_galois_matches_embedding(x, k):
    assert abs(numeric(x.galois(k)) - numeric(x, k)) < 1e-6 * (1 + sum(map(abs, x.c)))


@given(elems)
def test_trace_is_sum_of_conjugates(x):
    tot = sum(numeric(x, k) for k in (1, 3, 5, 7))
    assert abs(tot - x.trace()) < 1e-6 * (1 + sum(map(abs, x.c)))


@given(elems, nonzero)
def test_euclidean_division(a, b):
    q, r = a.divmod(b)
    assert a == q * b + r
    assert abs(r.norm()) < abs(b.norm())


@given(nonzero, nonzero)
@settings(max_examples=60)
def test_gcd_divides_both(a, b):
    g = euclid_gcd(a, b)
    assert g.divides(a) and g.divides(b)
    assert abs((a * b).norm()) % abs(g.norm()) == 0


def test_fieldelem_roundtrip_and_division():
    x = CycInt(3, -1, 2, 5)
    y = CycInt(1, 1, 0, 2)
    q = FieldElem.from_cycint(x * y) / y
    assert q.is_integral() and q.to_cycint() == x


def test_pickle_roundtrip():
    x = CycInt(1, -2, 3, -4)
    assert pickle.loads(pickle.dumps(x)) == x
    f = FieldElem.from_cycint(x) / 3
    assert pickle.loads(pickle.dumps(f)) == f


def test_immutable():
    with pytest.raises(AttributeError):
        ONE.c = (2, 0, 0, 0)


def brute_residue_classes(c: CycInt, box: int) -> int:
    """Distinct classes mod c among the points of a small box."""
    seen = []
    for v in itertools.product(range(box), repeat=4):
        x = CycInt(*v)
        if not any(c.divides(x - y) for y in seen):
            seen.append(x)
    return len(seen)


@pytest.mark.parametrize("c", [CycInt(1, 1, 0, 0), CycInt(3), CycInt(1, 2, 0, 0), CycInt(2, 1, 1, 0)])
def test_residue_count_is_norm(c):
    m = Modulus(c)
    assert m.residue_count == abs(c.norm())
    assert brute_residue_classes(c, 3 if m.residue_count <= 81 else 4) == m.residue_count


@pytest.mark.parametrize("c", [CycInt(5), CycInt(1, 2, 0, 0), CycInt(3, 0, 2, 1), CycInt(1, 4, 0, 4)])
def test_residues_are_distinct_and_reduce_idempotent(c):
    m = Modulus(c)
    res = m.residues()
    assert len(res) == m.residue_count
    for x in res[:200]:
        assert m.reduce(x) == x
    for i, x in enumerate(res[:50]):
        for y in res[i + 1:50]:
            assert not c.divides(x - y)


@given(elems)
@settings(max_examples=50)
def test_reduce_array_matches_scalar(x):
    m = Modulus(CycInt(3, 0, 2, 1))
    arr = m.reduce_array(np.array([x.c], dtype=np.int64))
    assert CycInt(*map(int, arr[0])) == m.reduce(x)


@pytest.mark.parametrize("mode", ["plain", "different"])
def test_phase_vector_matches_exact_trace(mode):
    c = CycInt(3, 0, 2, 1)
    m = Modulus(c)
    u = m.phase_vector(mode)
    n = m.residue_count
    delta = 4 * W**3
    for x in m.residues()[:300]:
        y = FieldElem.from_cycint(x) / (c if mode == "plain" else c * delta)
        t = y.trace()
        want = (t - math.floor(t))
        got = (int(np.dot(u, x.c)) % n) / n
        assert abs(want - got) < 1e-12 or abs(abs(want - got) - 1) < 1e-12


@given(elems)
@settings(max_examples=60)
def test_inverse_mod(a):
    c = CycInt(3, 0, 2, 1)
    m = Modulus(c)
    if euclid_gcd(a, c) != ONE:
        with pytest.raises(NotCoprimeError):
            inverse_mod(a, m)
        return
    assert m.reduce(a * inverse_mod(a, m)) == ONE


def test_crt():
    c1, c2 = CycInt(3), CycInt(1, 2, 0, 0)
    x = crt(CycInt(1, 1, 0, 0), c1, CycInt(2), c2)
    assert Modulus(c1).congruent(x, CycInt(1, 1, 0, 0))
    assert Modulus(c2).congruent(x, CycInt(2))
    with pytest.raises(NotCoprimeError):
        crt(ONE, CycInt(3), ONE, CycInt(9))


@pytest.mark.parametrize("p", [3, 5, 7, 17, 41, 73])
def test_prime_ideals_above(p):
    gens = prime_ideals_above(p)
    norms = [abs(g.norm()) for g in gens]
    assert math.prod(norms) == p**4
    # splitting type is fixed by p mod 8
    expected = {1: 4, 3: 2, 5: 2, 7: 2}[p % 8]
    assert len(gens) == expected
    for g in gens:
        assert CycInt(p) % Modulus(g) == ZERO


@given(nonzero)
@settings(max_examples=40)
def test_factor_reconstructs(c):
    if c.is_unit() or abs(c.norm()) > 10**7:
        return
    unit, fac = factor(c)
    prod = unit
    for p, e in fac:
        prod = prod * p**e
    assert prod == c
    assert unit.is_unit()


def test_normalize_assoc_is_one_mod_four():
    for p in (17, 41, 3, 5):
        for g in prime_ideals_above(p):
            try:
                n, eps = normalize_assoc(g)
            except RingError:
                continue
            assert eps.is_unit()
            assert n == eps * g
            assert Modulus(4).congruent(n, ONE)


def test_modulus_rejects_zero():
    with pytest.raises(RingError):
        Modulus(0)


@given(elems, elems)
def test_mul_array_matches_scalar(x, y):
    from z8expsum.ring import mul_array

    X = np.array([x.c], dtype=np.int64)
    Y = np.array([y.c], dtype=np.int64)
    assert tuple(int(v) for v in mul_array(X, Y, 97)[0]) == tuple(v % 97 for v in (x * y).c)


def test_vectorized_size_guard():
    big = Modulus(CycInt(1 << 8, 1, 0, 0))
    assert big.residue_count >= 1 << 29
    with pytest.raises(RingError):
        big.mul_array(np.ones((1, 4), dtype=np.int64), np.ones((1, 4), dtype=np.int64))
