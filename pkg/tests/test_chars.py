import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclrank.chars import (
    WildCharData,
    canonical_character,
    char_exponent,
    splitting_oracle,
    wild_char_exponent,
)

PRIMES_1_MOD_3 = [7, 13, 19, 31, 37, 43, 61, 67, 73, 79, 97, 103, 109]
SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]


def test_canonical_character_examples():
    c7 = canonical_character(7, 3)
    assert (c7.g, c7.omega) == (3, 2)
    c13 = canonical_character(13, 3)
    assert (c13.g, c13.omega) == (2, 3)


def test_canonical_character_rejections():
    with pytest.raises(ValueError):
        canonical_character(5, 3)
    with pytest.raises(ValueError):
        canonical_character(15, 7)  # 15 = 1 mod 7 but composite


def test_omega_order():
    for p in PRIMES_1_MOD_3:
        c = canonical_character(p, 3)
        assert c.omega != 1
        assert pow(c.omega, 3, p) == 1


def test_char_exponent_examples():
    c7 = canonical_character(7, 3)
    assert char_exponent(c7, 2) == 2
    assert char_exponent(c7, 13) == 0
    assert char_exponent(c7, 8) == 0  # 8 = 1 mod 7
    with pytest.raises(ValueError):
        char_exponent(c7, 14)


def test_char_exponent_surjective():
    for p in PRIMES_1_MOD_3:
        c = canonical_character(p, 3)
        values = {char_exponent(c, q) for q in range(1, p)}
        assert values == {0, 1, 2}


@given(
    st.sampled_from(PRIMES_1_MOD_3),
    st.integers(min_value=1, max_value=10**6),
    st.integers(min_value=1, max_value=10**6),
)
@settings(max_examples=80, deadline=None)
def test_char_exponent_multiplicative(p, q1, q2):
    c = canonical_character(p, 3)
    if q1 % p == 0 or q2 % p == 0:
        return
    e1 = char_exponent(c, q1)
    e2 = char_exponent(c, q2)
    assert char_exponent(c, q1 * q2) == (e1 + e2) % 3


def test_wild_char_examples():
    w = WildCharData(3)
    assert wild_char_exponent(w, 2) == 1
    assert wild_char_exponent(w, 17) == 0
    assert wild_char_exponent(w, 19) == 0  # 19 = 1 mod 9
    with pytest.raises(ValueError):
        wild_char_exponent(w, 3)


@given(st.integers(min_value=1, max_value=10**6))
@settings(max_examples=60, deadline=None)
def test_wild_char_depends_on_residue(q):
    w = WildCharData(3)
    if q % 3 == 0:
        return
    assert wild_char_exponent(w, q) == wild_char_exponent(w, q % 9 + 9)


def test_wild_char_l5():
    w = WildCharData(5)
    # the Fermat quotient sends 1 + l to l - 1 and 1 + l^2-residues to 0
    assert wild_char_exponent(w, 6) == 4
    assert wild_char_exponent(w, 26) == 0
    for q in (2, 3, 7, 11, 13):
        assert 0 <= wild_char_exponent(w, q) < 5


def test_splitting_oracle_examples():
    assert splitting_oracle(7, 13, 3) is True
    assert splitting_oracle(7, 2, 3) is False
    assert splitting_oracle(7, 29, 3) is True  # 29 = 1 mod 7
    with pytest.raises(ValueError):
        splitting_oracle(7, 7, 3)
    with pytest.raises(ValueError):
        splitting_oracle(11, 2, 3)


def test_oracle_consistency_with_characters():
    for p in PRIMES_1_MOD_3:
        c = canonical_character(p, 3)
        for q in SMALL_PRIMES:
            if q == p:
                continue
            assert (char_exponent(c, q) == 0) == splitting_oracle(p, q, 3)


def test_oracle_consistency_l5():
    for p in (11, 31, 41, 61, 71):
        c = canonical_character(p, 5)
        for q in SMALL_PRIMES:
            if q == p:
                continue
            assert (char_exponent(c, q) == 0) == splitting_oracle(p, q, 5)
