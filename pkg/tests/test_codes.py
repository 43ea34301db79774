"""Code-parameter search: GV bound, cyclotomic cosets, BCH dimensions."""

from __future__ import annotations

import math
import random

import pytest
from sympy import Poly, symbols
from sympy.ntheory.residue_ntheory import n_order

from lwe_channel.codes import (
    BchResult,
    CodeSearchResult,
    bch_best_dimension,
    bch_search,
    char_of_prime_power,
    cyclotomic_cosets,
    gv_max_dimension,
    largest_d_for_rate,
    maximize_rate_for_dfr,
    minimize_dfr_for_rate,
)
from lwe_channel.params import PrecisionConfig, builtin


# ----- field characteristic ---------------------------------------------------


def test_char_of_prime_power():
    assert char_of_prime_power(2) == 2
    assert char_of_prime_power(4) == 2
    assert char_of_prime_power(8) == 2
    assert char_of_prime_power(9) == 3
    assert char_of_prime_power(27) == 3
    assert char_of_prime_power(7) == 7
    for bad in (1, 0, 6, 12, 100):
        with pytest.raises(ValueError):
            char_of_prime_power(bad)


# ----- Gilbert-Varshamov ------------------------------------------------------


def test_gv_trivial_distances_give_full_dimension():
    for n, Q in ((16, 2), (256, 5), (1024, 7)):
        assert gv_max_dimension(n, 1, Q) == n
        # d = 2: the ball volume is exactly Q^0, so the boundary convention
        # keeps the full dimension
        assert gv_max_dimension(n, 2, Q) == n


def test_gv_frozen_values():
    assert gv_max_dimension(1024, 3, 2) == 1014
    assert gv_max_dimension(1024, 11, 3) == 973
    assert gv_max_dimension(1024, 31, 4) == 907
    assert gv_max_dimension(1024, 81, 5) == 784
    assert gv_max_dimension(1024, 369, 7) == 344
    assert gv_max_dimension(256, 5, 3) == 240
    assert gv_max_dimension(256, 9, 4) == 228
    assert gv_max_dimension(256, 15, 5) == 214
    assert gv_max_dimension(256, 33, 7) == 180


def test_gv_validation():
    with pytest.raises(ValueError, match="1 <= d <= n"):
        gv_max_dimension(16, 0, 2)
    with pytest.raises(ValueError, match="1 <= d <= n"):
        gv_max_dimension(16, 17, 2)
    with pytest.raises(ValueError, match="Q must be"):
        gv_max_dimension(16, 3, 1)


def test_gv_against_direct_inequality():
    # k is the largest value with Q^(n-k) >= V(d-2); check both sides.
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randrange(8, 200)
        d = rng.randrange(1, n + 1)
        Q = rng.choice([2, 3, 4, 5, 7, 8])
        k = gv_max_dimension(n, d, Q)
        volume = sum(math.comb(n - 1, i) * (Q - 1) ** i for i in range(d - 1))
        assert Q ** (n - k) >= volume
        if k < n:
            assert Q ** (n - k - 1) < volume


# ----- cyclotomic cosets ------------------------------------------------------


def test_cosets_n15_q2_frozen():
    assert cyclotomic_cosets(15, 2) == [
        [0], [1, 2, 4, 8], [3, 6, 9, 12], [5, 10], [7, 11, 13, 14]]


def test_cosets_require_coprime_length():
    with pytest.raises(ValueError, match="gcd"):
        cyclotomic_cosets(15, 3)


@pytest.mark.parametrize("n,Q", [(15, 2), (21, 2), (63, 2), (13, 3), (63, 4), (24, 5)])
def test_coset_sizes_match_multiplicative_orders(n, Q):
    cosets = cyclotomic_cosets(n, Q)
    assert sorted(x for c in cosets for x in c) == list(range(n))
    for coset in cosets:
        j = coset[0]
        m = n // math.gcd(n, j) if j else 1
        expect = 1 if m == 1 else n_order(Q % m, m)
        assert len(coset) == expect


@pytest.mark.parametrize("n,Q", [(15, 2), (31, 2), (63, 2), (13, 3), (26, 3), (63, 5)])
def test_coset_sizes_match_factor_degrees(n, Q):
    # x^n - 1 over GF(Q) splits into irreducibles whose degrees are exactly
    # the coset sizes (prime Q only; sympy factors over prime fields).
    x = symbols("x")
    factors = Poly(x ** n - 1, x, modulus=Q).factor_list()[1]
    degrees = sorted(p.degree() for p, mult in factors for _ in range(mult))
    sizes = sorted(len(c) for c in cyclotomic_cosets(n, Q))
    assert degrees == sizes


# ----- BCH dimension ----------------------------------------------------------


def test_bch_best_dimension_binary_classics():
    assert bch_best_dimension(15, 5, 2) == (7, 1)
    assert bch_best_dimension(15, 7, 2) == (5, 1)
    assert bch_best_dimension(15, 1, 2) == (15, 0)


def test_bch_best_dimension_validation():
    with pytest.raises(ValueError, match="exceeds length"):
        bch_best_dimension(15, 16, 2)
    with pytest.raises(ValueError, match="shares a factor"):
        bch_best_dimension(16, 3, 2)
    with pytest.raises(ValueError, match="d must be"):
        bch_best_dimension(15, 0, 2)


def test_bch_length_q_minus_one_meets_singleton():
    # Over GF(17) at length 16 every coset is a singleton, so the window
    # union is d-1 and the dimension meets the Singleton bound exactly.
    for d in (2, 5, 9, 16):
        assert bch_best_dimension(16, d, 17) == (16 - d + 1, 0)


def test_bch_dimension_never_beats_singleton():
    rng = random.Random(37)
    for _ in range(30):
        Q = rng.choice([2, 3, 4, 5, 7])
        p = char_of_prime_power(Q)
        n = rng.randrange(5, 120)
        if n % p == 0:
            continue
        d = rng.randrange(2, n + 1)
        k, b = bch_best_dimension(n, d, Q)
        assert k <= n - d + 1
        assert 0 <= b < n


@pytest.mark.parametrize("n,Q,d", [
    (15, 2, 3), (15, 2, 5), (15, 2, 7), (21, 2, 5), (13, 3, 4), (63, 4, 9)])
def test_bch_window_scan_matches_brute_force(n, Q, d):
    label = {}
    for coset in cyclotomic_cosets(n, Q):
        for x in coset:
            label[x] = tuple(coset)
    best_union, best_b = None, None
    for b in range(n):
        union = set()
        for e in range(b, b + d - 1):
            union.update(label[e % n])
        if best_union is None or len(union) < best_union:
            best_union, best_b = len(union), b
    assert bch_best_dimension(n, d, Q) == (n - best_union, best_b)


# ----- BCH length search ------------------------------------------------------


def test_bch_search_skips_characteristic_multiples():
    got = bch_search(16, 3, 2)
    assert got.n_bch == 15
    assert got == BchResult(n_bch=15, k_bch=11, b=1)


def test_bch_search_small_frozen():
    assert bch_search(15, 7, 2) == BchResult(n_bch=15, k_bch=5, b=1)


def test_bch_search_production_lengths():
    # b = 0 appears where a window through exponent 0 ties the narrow-sense
    # dimension; the scan keeps the first best start.
    assert bch_search(1024, 3, 2) == BchResult(n_bch=1023, k_bch=1013, b=1)
    assert bch_search(1024, 11, 3) == BchResult(n_bch=1022, k_bch=949, b=0)
    assert bch_search(1024, 31, 4) == BchResult(n_bch=1023, k_bch=912, b=0)
    assert bch_search(1024, 81, 5) == BchResult(n_bch=939, k_bch=554, b=899)
    assert bch_search(1024, 369, 7) == BchResult(n_bch=960, k_bch=91, b=115)
    assert bch_search(256, 5, 3) == BchResult(n_bch=242, k_bch=231, b=0)
    assert bch_search(256, 9, 4) == BchResult(n_bch=255, k_bch=231, b=1)
    assert bch_search(256, 15, 5) == BchResult(n_bch=252, k_bch=203, b=56)
    assert bch_search(256, 33, 7) == BchResult(n_bch=240, k_bch=143, b=0)


def test_bch_search_narrow_sense_flag():
    assert bch_search(1024, 3, 2).narrow_sense
    assert not bch_search(1024, 81, 5).narrow_sense


def test_bch_search_min_dimension_unreachable():
    with pytest.raises(ValueError, match="no BCH code"):
        bch_search(15, 7, 2, min_dimension=6)
    with pytest.raises(ValueError, match="d_required"):
        bch_search(15, 0, 2)


# ----- rate-floor driver ------------------------------------------------------


def test_largest_d_for_rate_full_rate_binary_is_trivial():
    # Rate 1 bit per coefficient over GF(2) forces the identity code.
    assert largest_d_for_rate(256, 2, 1.0) == (1, None)


def test_largest_d_for_rate_frozen_gf5():
    d, code = largest_d_for_rate(256, 5, 1.0)
    assert d == 44
    assert code == BchResult(n_bch=248, k_bch=116, b=0)
    k_min = math.ceil(1.0 * 256 / math.log2(5) - 1e-12)
    assert code.k_bch >= k_min
    with pytest.raises(ValueError):
        bch_search(256, 45, 5, min_dimension=k_min)


def test_largest_d_for_rate_monotone_in_rate():
    prev = None
    for rate in (0.25, 0.5, 0.75, 1.0, 1.5):
        d, _ = largest_d_for_rate(256, 5, rate)
        if prev is not None:
            assert d <= prev
        prev = d


def test_largest_d_for_rate_impossible_rate():
    with pytest.raises(ValueError, match="needs dimension"):
        largest_d_for_rate(64, 2, 1.1)


# ----- table drivers on an exact toy ------------------------------------------


def test_maximize_rate_rows_toy():
    toy = builtin("toy_n8q257")
    rows = maximize_rate_for_dfr(toy, [2, 4], -20.0, PrecisionConfig(exact_mode=True))
    r2, r4 = rows
    assert (r2.Q, r2.d, r2.k_gv, r2.r_gv) == (2, 1, 8, 1.0)
    assert r2.n_bch is None and r2.b is None and r2.narrow_sense is None
    assert r2.dfr_log2 == pytest.approx(-69.77435242010051, rel=1e-12)
    assert r2.plain_per_cipher == pytest.approx(1 / 12)

    assert (r4.Q, r4.d, r4.k_gv, r4.r_gv) == (4, 3, 5, 1.25)
    assert (r4.n_bch, r4.k_bch, r4.b) == (7, 4, 1)
    assert r4.r_bch == 1.0
    assert r4.narrow_sense is True
    assert r4.dfr_log2 == pytest.approx(-29.399696766538426, rel=1e-12)
    assert r4.plain_per_cipher == pytest.approx(1 / 12)
    # every row satisfies the target it was solved for
    assert all(r.dfr_log2 < -20.0 for r in rows)


def test_minimize_dfr_rows_toy():
    toy = builtin("toy_n8q257")
    rows = minimize_dfr_for_rate(toy, [2, 4], 0.5, PrecisionConfig(exact_mode=True))
    r2, r4 = rows
    assert (r2.Q, r2.d, r2.n_bch, r2.k_bch, r2.b) == (2, 3, 7, 4, 1)
    assert r2.k_gv is None and r2.r_gv is None
    assert r2.r_bch == 0.5
    assert r2.dfr_log2 == pytest.approx(-140.74134991814344, rel=1e-12)
    assert (r4.Q, r4.d, r4.n_bch, r4.k_bch, r4.b) == (4, 4, 7, 3, 0)
    assert r4.r_bch == 0.75
    assert r4.plain_per_cipher == pytest.approx(0.75 / 12)
    # the achieved rates respect the floor
    assert all(r.r_bch >= 0.5 for r in rows)


def test_code_search_result_narrow_sense_property():
    assert CodeSearchResult(Q=2, d=3, dfr_log2=-1.0, b=1).narrow_sense is True
    assert CodeSearchResult(Q=2, d=3, dfr_log2=-1.0, b=0).narrow_sense is False
    assert CodeSearchResult(Q=2, d=1, dfr_log2=-1.0).narrow_sense is None
