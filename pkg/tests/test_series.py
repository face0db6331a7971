import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid
from sympy import factorint

from z8expsum.characters import CharacterGroup, power_symbol, symbol_character
from z8expsum.expsums import HypothesisError, PolySpec, kloosterman_s4
from z8expsum.ring import ONE, CycInt, Modulus, euclid_gcd, prime_ideals_above
from z8expsum.series import (
    SeriesError,
    SeriesPoint,
    SmoothWeight,
    check_series_hypotheses,
    decomposition_residuals,
    direct_complete_sum,
    embedding_abs2,
    enumerate_odd_ideals,
    enumerate_weighted,
    expected_exponent,
    fit_exponent,
    geometric_grid,
    is_fourth_power_times_unit,
    is_symmetric,
    kloosterman_side,
    mellin_hat,
    modulus_terms,
    orthogonality_check,
    patterson_series_int,
    patterson_sum_int,
    patterson_terms,
    phi4,
    phi_ideal,
    ptp_table,
    quartic_character_total,
    series_weight,
    t_factor,
    theta_partial,
    weighted_series,
)

PSI = SmoothWeight()


def naive_int_sum(terms, c: int) -> complex:
    return sum(cmath.exp(2j * math.pi * (sum(a * x**e for a, e in terms) % c) / c) for x in range(c))


# --- weights and fitting ---------------------------------------------------


def test_weight_support():
    y = np.array([0.1, 0.5, 0.7, 1.0, 1.9, 2.0, 3.0])
    v = PSI(y)
    assert v[0] == v[1] == v[5] == v[6] == 0
    assert np.all(v[2:5] > 0)
    assert PSI.scaled(3)(1.0) == pytest.approx(3 * PSI(1.0))
    with pytest.raises(ValueError):
        SmoothWeight(2.0, 1.0)


def test_sampled_weight():
    ys = np.linspace(0.5, 2.0, 30)
    w = SmoothWeight.from_samples(ys, PSI(ys))
    mid = np.linspace(0.6, 1.9, 17)
    assert np.max(np.abs(w(mid) - PSI(mid))) < 2e-3
    assert w(2.5) == 0


@pytest.mark.parametrize("s", [-0.5, 0.0, 1.0, 2.5])
def test_mellin_against_trapezoid(s):
    y = np.linspace(0.5, 2.0, 200001)
    ref = trapezoid(PSI(y) * y ** (s - 1), y)
    assert mellin_hat(PSI, s) == pytest.approx(ref, rel=1e-7)


@given(st.floats(0.5, 3.0), st.floats(0.1, 10.0))
@settings(max_examples=40)
def test_fit_recovers_power_law(alpha, k):
    pts = [SeriesPoint(X, k * X**alpha, 0, 0.0) for X in (2.0**j for j in range(4, 12))]
    fit = fit_exponent(pts)
    assert fit.slope == pytest.approx(alpha, abs=1e-9)
    assert fit.stderr < 1e-6


def test_fit_needs_three_points():
    with pytest.raises(SeriesError):
        fit_exponent([SeriesPoint(1, 1, 0, 0), SeriesPoint(2, 2, 0, 0)])


def test_geometric_grid():
    assert geometric_grid(1024, 2**17) == [2**j for j in range(10, 18)]
    with pytest.raises(SeriesError):
        geometric_grid(10, 5)


# --- Patterson sums over Z -------------------------------------------------

POLYS = [[(1, 3)], [(1, 2), (1, 1)], [(1, 4), (2, 1)], [(3, 3), (1, 1)], [(5, 2)], [(1, 6)]]


@pytest.mark.parametrize("terms", POLYS)
def test_direct_sum_matches_naive(terms):
    for c in (1, 2, 9, 25, 36, 49, 97):
        assert abs(direct_complete_sum(terms, c) - naive_int_sum(terms, c)) < 1e-9


@pytest.mark.parametrize("terms", POLYS)
def test_multiplicative_terms_match_naive(terms):
    # crossover 2 sends every modulus through the prime-power factorization
    t = patterson_terms(terms, 400, crossover=2)
    for c in range(1, 401):
        assert abs(t[c] - naive_int_sum(terms, c)) < 1e-7 * c, c


def test_series_is_cumulative():
    f = PolySpec.parse("1,0,0,0")
    X = [64, 128, 300]
    pts = patterson_series_int(f, X)
    naive = [sum(naive_int_sum([(1, 3)], c) for c in range(1, x + 1)) for x in X]
    for pt, ref in zip(pts, naive):
        assert abs(pt.value - ref) < 1e-7 * pt.X
    assert patterson_sum_int(f, 1).value == 1


def test_workers_do_not_change_values():
    f = PolySpec.parse("1,0,1")
    a = patterson_series_int(f, [500, 1000], workers=1)
    b = patterson_series_int(f, [500, 1000], workers=2)
    assert [p.value for p in a] == [p.value for p in b]


@pytest.mark.parametrize("terms,sym", [([(1, 2), (1, 1)], True), ([(1, 3)], False),
                                       ([(1, 4), (1, 2)], True), ([(1, 3), (1, 1)], False)])
def test_symmetry(terms, sym):
    assert is_symmetric(terms) is sym


def test_expected_exponents():
    assert expected_exponent([(1, 3)]) == pytest.approx(4 / 3)
    assert expected_exponent([(1, 2), (1, 1)]) == pytest.approx(2.0)


# --- the series over Z[w] --------------------------------------------------


def test_phi_ideal_counts_units():
    for c in (CycInt(5), CycInt(1, 4), CycInt(-3) ** 2, CycInt(1, 1, 0, 0) ** 3):
        m = Modulus(c)
        brute = sum(1 for x in m.residues() if euclid_gcd(x, c) == ONE)
        assert phi_ideal(c) == brute


def test_phi4():
    # N(4) = 256 and a single prime of norm 2 above 2
    assert phi4() == 128


@pytest.mark.parametrize("X", [64.0, 400.0])
def test_enumeration_against_box_scan(X):
    found = enumerate_weighted(X, PSI)
    s = math.sqrt(X)
    R = int(math.isqrt(int(s / 0.5))) + 4
    ref = []
    rng = range(-R, R + 1)
    for c0 in rng:
        if c0 % 4 != 1:
            continue
        for c1 in rng:
            if c1 % 4:
                continue
            for c2 in rng:
                if c2 % 4:
                    continue
                for c3 in rng:
                    if c3 % 4:
                        continue
                    e1, e2 = embedding_abs2(np.array([[c0, c1, c2, c3]], dtype=np.int64))
                    y1, y2 = s / e1[0], s / e2[0]
                    if 0.5 < y1 < 2 and 0.5 < y2 < 2:
                        ref.append(CycInt(c0, c1, c2, c3))
    assert sorted(found, key=lambda c: c.c) == sorted(ref, key=lambda c: c.c)
    for c in found:
        assert series_weight(c, X, PSI) > 0


def test_enumeration_counts():
    assert len(enumerate_weighted(400, PSI)) == 11
    assert len(enumerate_weighted(1600, PSI)) == 36


@pytest.mark.parametrize("A,B,D", [(1, 2, 1), (1, 4, 2), (2, 8, 1), (1, 12, 1), (1, 4, CycInt(1, 2))])
def test_hypothesis_gate(A, B, D):
    with pytest.raises(HypothesisError):
        check_series_hypotheses(CycInt(A), CycInt(B), CycInt(D) if isinstance(D, int) else D)


def test_hypothesis_gate_accepts_default():
    check_series_hypotheses(ONE, CycInt(4), ONE)
    check_series_hypotheses(ONE, CycInt(36), CycInt(-3))


@pytest.mark.parametrize("c", [CycInt(1, 4), CycInt(-3), CycInt(5), CycInt(5, 4, 0, -4) ** 2,
                               CycInt(1, 4) * CycInt(-3)])
def test_kloosterman_side_closed_vs_brute(c):
    a = kloosterman_side(ONE, CycInt(4), c, method="closed")
    b = kloosterman_side(ONE, CycInt(4), c, method="brute")
    assert abs(a - b) < 1e-8 * abs(c.norm())


def test_twisted_multiplicativity_matches_brute():
    from z8expsum.series import kloosterman_assembled

    for c in (CycInt(1, 4) * CycInt(-3), CycInt(5) * CycInt(5, 4, 0, -4)):
        for r, s in ((ONE, CycInt(3)), (CycInt(2, 1), CycInt(0, 1))):
            assert abs(kloosterman_assembled(r, s, c) - kloosterman_s4(r, s, c).value) < 1e-8


@pytest.mark.parametrize("c", [CycInt(1, 4), CycInt(5), CycInt(1, 4) * CycInt(5, 4, 0, -4)])
@pytest.mark.parametrize("mode", ["plain", "different"])
def test_per_modulus_decomposition(c, mode):
    t = modulus_terms(ONE, CycInt(4), 0, c, mode)
    rhs = t["kloosterman_rhs"] + t["quadratic_lhs"] + t["cross_rhs"]
    assert abs(t["quartic_lhs"] - rhs) < 1e-8 * abs(c.norm())


def test_decomposition_small_X():
    rows = decomposition_residuals(ONE, CycInt(4), 0, ONE, None, PSI, 256)
    assert rows
    for r in rows:
        assert r["residual"] < 1e-8 * max(r["weight"], 1e-300) * r["norm"]


def test_weighted_series_worker_invariance():
    theta = symbol_character(CycInt(-3), 4)
    a = weighted_series("quartic_lhs", ONE, CycInt(4), 0, CycInt(-3), theta, PSI, 512, workers=1)
    b = weighted_series("quartic_lhs", ONE, CycInt(4), 0, CycInt(-3), theta, PSI, 512, workers=2)
    assert a.value == b.value
    assert a.term_count == b.term_count


def test_unknown_kind():
    with pytest.raises(SeriesError):
        weighted_series("nope", ONE, CycInt(4), 0, ONE, None, PSI, 64)


# --- main-term factor and local tables ---------------------------------------


@pytest.mark.parametrize("p", [17, 41])
def test_ptp_table_two_primes(p):
    rows = ptp_table(prime_ideals_above(p)[0], range(3))
    assert rows and all(r["match"] for r in rows)


def test_t_factor_values():
    assert t_factor(ONE, CycInt(-3), None) == 81
    assert t_factor(CycInt(9), CycInt(-3), None) == 81**2
    quartic = symbol_character(CycInt(-3), 4)
    assert t_factor(ONE, CycInt(-3), quartic) == 0
    with pytest.raises(HypothesisError):
        t_factor(CycInt(5), CycInt(-3), None)


# --- theta partial sums ----------------------------------------------------


def test_odd_ideal_enumeration_against_norm_counts():
    ideals = enumerate_odd_ideals(400)
    norms = sorted(r.norm for r in ideals)

    # p = 1 mod 8 splits into four primes of norm p; otherwise two of norm p^2
    def count(n):
        tot = 1
        for p, e in factorint(n).items():
            if p % 8 == 1:
                tot *= math.comb(e + 3, 3)
            elif e % 2 == 0:
                tot *= e // 2 + 1
            else:
                return 0
        return tot

    for n in range(1, 401, 2):
        assert norms.count(n) == count(n), n


def test_theta_partial_converges_for_large_s():
    a = theta_partial(None, 1.5, 2000).partial_sum
    b = theta_partial(None, 1.5, 4000).partial_sum
    assert abs(a - b) / abs(b) < 1e-3


def test_theta_partial_rejects_small_s():
    with pytest.raises(SeriesError):
        theta_partial(None, 1.2, 100)


def test_fourth_powers():
    x = CycInt(1, 4)
    assert is_fourth_power_times_unit(x**4)
    assert is_fourth_power_times_unit(x**4 * CycInt(0, 1))
    assert not is_fourth_power_times_unit(x**2)
    assert not is_fourth_power_times_unit(x)


@pytest.mark.parametrize("c", [CycInt(1, 4), CycInt(-3), CycInt(5)])
def test_quartic_character_total_brute(c):
    m = Modulus(c)
    brute = sum(complex(power_symbol(a, c)).conjugate()
                for a in m.residues() if euclid_gcd(a, c) == ONE)
    assert abs(quartic_character_total(c) - brute) < 1e-8


def test_orthogonality_small():
    rep = orthogonality_check(None, 1.5, 3000)
    assert rep["residual"] < 1e-12
    assert rep["disagreements"] == []


def test_character_group_sizes_for_series_moduli():
    # 3 splits into two primes of norm 9
    assert len(CharacterGroup(CycInt(-3))) == 8 * 8
