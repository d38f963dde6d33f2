from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclrank.clmodules import (
    CyclotomicContext,
    DualElement,
    ModuleElement,
    Partition,
    TruncatedCyclotomic,
    add_elements,
    all_elements,
    annihilated_by,
    artin_pairing,
    aut_count,
    brute_force_aut_count,
    cl_weight,
    element_from_digits,
    evaluate_dual,
    in_layer,
    layer_dual_elements,
    layer_elements,
    module_order,
    pairing_kernels,
    partition_from_ranks,
    partitions_bounded,
    pi_multiply,
    rank_k,
    rank_prefix_prob,
    solve_pi_power,
    zero_element,
    zeta_multiply,
)
from cyclrank.matmodel import limit_rank_defect_prob


# --- ring arithmetic --------------------------------------------------------


def test_inverse_pi_identity():
    for l in (3, 5, 7):
        ctx = CyclotomicContext(l)
        prod_poly = ctx.mul(ctx.pi, ctx.inv_pi_num)
        assert prod_poly == tuple([l] + [0] * (l - 2))


def test_digit_round_trip():
    for l in (3, 5):
        ctx = CyclotomicContext(l)
        for digits in product(range(l), repeat=3):
            poly = ctx.from_digits(digits)
            assert ctx.digits(poly, 3) == digits


def test_three_has_valuation_two():
    three = TruncatedCyclotomic.from_poly(3, 5, (3,))
    assert three.valuation() == 2
    five = TruncatedCyclotomic.from_poly(5, 5, (5,))
    assert five.valuation() == 4


def test_arithmetic_consistency():
    a = TruncatedCyclotomic.from_poly(3, 4, (2, 1))
    b = TruncatedCyclotomic.from_poly(3, 4, (1, 2))
    assert (a + b) - b == a
    assert a * TruncatedCyclotomic.one(3, 4) == a
    assert (a * b).digits == (b * a).digits
    zeta = TruncatedCyclotomic.from_poly(3, 4, (0, 1))
    # zeta^l = 1
    acc = TruncatedCyclotomic.one(3, 4)
    for _ in range(3):
        acc = acc * zeta
    assert acc == TruncatedCyclotomic.one(3, 4)


def test_coeffs_view_matches_spec_modulus():
    x = TruncatedCyclotomic.from_poly(3, 4, (7, 5))
    assert x.coeff_modulus_exponent == 3
    assert all(0 <= c < 27 for c in x.coeffs)
    rebuilt = TruncatedCyclotomic.from_poly(3, 4, x.coeffs)
    assert rebuilt == x


def test_pi_shifts():
    x = TruncatedCyclotomic(3, 4, (0, 0, 2, 1))
    down = x.pi_shift_down(2)
    assert down.digits == (2, 1)
    with pytest.raises(ValueError):
        x.pi_shift_down(3)
    assert x.pi_shift_up(1).digits == (0, 0, 0, 2)


# --- partitions -------------------------------------------------------------


def test_rank_k_examples():
    lam = Partition((3, 1))
    assert rank_k(lam, 1) == 2
    assert rank_k(lam, 2) == 1
    assert rank_k(lam, 4) == 0


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition((1, 2))
    with pytest.raises(ValueError):
        Partition((0,))


def test_module_order_examples():
    assert module_order(Partition(()), 3) == 1
    assert module_order(Partition((2, 1)), 3) == 27
    assert module_order(Partition((1, 1, 1)), 5) == 125
    with pytest.raises(OverflowError):
        module_order(Partition((50,)), 3)


@given(st.lists(st.integers(min_value=1, max_value=6), min_size=0, max_size=5))
@settings(max_examples=60)
def test_rank_sequence_round_trip(parts):
    lam = Partition(tuple(sorted(parts, reverse=True)))
    ranks = [rank_k(lam, k) for k in range(1, (max(parts) if parts else 0) + 2)]
    assert all(a >= b for a, b in zip(ranks, ranks[1:]))
    assert partition_from_ranks(ranks) == lam


def test_partitions_bounded():
    got = {p.parts for p in partitions_bounded(4, 4)}
    expected = {
        (), (1,), (2,), (3,), (4,), (1, 1), (2, 1), (3, 1), (2, 2),
        (1, 1, 1), (2, 1, 1), (1, 1, 1, 1),
    }
    assert got == expected


# --- automorphism counts ----------------------------------------------------


def test_aut_count_examples():
    assert aut_count(Partition((1,)), 3) == 2
    assert aut_count(Partition((1, 1)), 3) == 48
    assert aut_count(Partition((2,)), 3) == 6
    assert aut_count(Partition(()), 3) == 1


def test_brute_force_examples():
    assert brute_force_aut_count(Partition(()), 3) == 1
    assert brute_force_aut_count(Partition((1,)), 3) == 2
    assert brute_force_aut_count(Partition((2, 1)), 3) == aut_count(Partition((2, 1)), 3)


@pytest.mark.parametrize("lam", [p for p in partitions_bounded(4, 4) if p.parts])
def test_aut_count_matches_brute_force(lam):
    assert aut_count(lam, 3) == brute_force_aut_count(lam, 3)


def test_aut_count_l5():
    assert aut_count(Partition((1,)), 5) == 4
    assert brute_force_aut_count(Partition((1, 1)), 5) == aut_count(Partition((1, 1)), 5)


# --- elements and the pairing ------------------------------------------------


def test_element_enumeration_count():
    lam = Partition((2, 1))
    assert len(list(all_elements(lam, 3))) == 27


def test_zeta_multiply_has_order_l():
    lam = Partition((2, 1))
    for e in all_elements(lam, 3):
        out = e
        for _ in range(3):
            out = zeta_multiply(out)
        assert out == e


def test_layer_membership():
    lam = Partition((2,))
    gen = element_from_digits(lam, 3, [(1, 0)])
    pi_gen = pi_multiply(gen)
    assert in_layer(pi_gen, 1)
    assert in_layer(pi_gen, 2)
    assert not in_layer(gen, 2)
    assert annihilated_by(pi_gen, 1)
    assert solve_pi_power(pi_gen, 1) is not None


def test_pairing_zero_left_argument():
    lam = Partition((1, 1))
    zero = zero_element(lam, 3)
    for chi in layer_dual_elements(lam, 3, 1):
        assert artin_pairing(lam, 1, zero, chi) == 0


def test_pairing_nondegenerate_rank_one():
    lam = Partition((1,))
    a = element_from_digits(lam, 3, [(1,)])
    chi = DualElement(lam, a.coords)
    assert artin_pairing(lam, 1, a, chi) == 1


def test_pairing_socle_squared_vanishes():
    lam = Partition((2,))
    a = element_from_digits(lam, 3, [(0, 1)])
    chi = DualElement(lam, a.coords)
    assert artin_pairing(lam, 1, a, chi) == 0


def test_pairing_rejects_bad_arguments():
    lam = Partition((2,))
    gen = element_from_digits(lam, 3, [(1, 0)])
    chi = DualElement(lam, pi_multiply(gen).coords)
    with pytest.raises(ValueError):
        artin_pairing(lam, 2, gen, chi)


def test_pairing_bilinear():
    lam = Partition((2, 1))
    lefts = list(layer_elements(lam, 3, 1))
    rights = list(layer_dual_elements(lam, 3, 1))
    for a in lefts[:6]:
        for b in lefts[:6]:
            for chi in rights[:6]:
                s = add_elements(a, b)
                lhs = artin_pairing(lam, 1, s, chi)
                rhs = (artin_pairing(lam, 1, a, chi) + artin_pairing(lam, 1, b, chi)) % 3
                assert lhs == rhs


def test_pairing_independent_of_lift():
    lam = Partition((3, 2))
    l = 3
    k = 2
    for a in layer_elements(lam, l, k):
        for chi in layer_dual_elements(lam, l, k):
            chi_elem = ModuleElement(lam, chi.coords)
            base = solve_pi_power(chi_elem, k - 1)
            value = artin_pairing(lam, k, a, chi)
            # every other lift differs by a coordinate killed by pi^(k-1)
            for offsets in product(range(l), repeat=len(lam.parts)):
                coords = []
                for c, off, m in zip(base.coords, offsets, lam.parts):
                    v = max(m - k + 1, 0)
                    bump = TruncatedCyclotomic(
                        l, m, tuple(off if i == v else 0 for i in range(m))
                    )
                    assert bump.pi_shift_up(k - 1).is_zero()
                    coords.append(c + bump)
                psi = DualElement(lam, tuple(coords))
                out = evaluate_dual(psi, a)
                assert out.socle_value() == value


@pytest.mark.parametrize("lam", [p for p in partitions_bounded(4, 4) if p.parts])
def test_pairing_kernels_match_predictions(lam):
    for k in range(1, max(lam.parts) + 2):
        pk = pairing_kernels(lam, k, 3)
        assert pk.left_matches, (lam, k)
        assert pk.right_matches, (lam, k)


def test_pairing_kernels_examples():
    pk = pairing_kernels(Partition((1,)), 1, 3)
    assert len(pk.left_kernel) == 1 and len(pk.right_kernel) == 1
    pk2 = pairing_kernels(Partition((2,)), 1, 3)
    assert len(pk2.left_kernel) == 3
    pk3 = pairing_kernels(Partition(()), 1, 3)
    assert pk3.left_matches and pk3.right_matches


def test_dual_module_same_rank_sequence():
    # nondegeneracy of the first-layer pairing on A x dual(A) for small cases
    for lam in (Partition((1,)), Partition((2, 1)), Partition((1, 1))):
        lefts = list(layer_elements(lam, 3, 1))
        rights = list(layer_dual_elements(lam, 3, 1))
        assert len(lefts) == len(rights)
        pk = pairing_kernels(lam, 1, 3)
        expected_kernel_dim = rank_k(lam, 2)
        assert len(pk.left_kernel) == 3**expected_kernel_dim


# --- the measure -------------------------------------------------------------


def test_cl_weight_examples():
    w_triv = cl_weight(Partition(()), 3)
    assert abs(w_triv.value - 0.8402) < 1e-3
    assert w_triv.error_bound < 1e-20
    w1 = cl_weight(Partition((1,)), 3)
    assert abs(w1.value - w_triv.value / 6) < 1e-15
    assert all(cl_weight(p, 3).value > 0 for p in partitions_bounded(6, 3))
    with pytest.raises(ValueError):
        cl_weight(Partition(()), 3, tail_cut=1)


def test_truncated_mass():
    mass = sum(cl_weight(p, 3).value for p in partitions_bounded(12, 6))
    assert mass >= 0.999
    assert mass <= 1.0


def test_rank_prefix_examples():
    assert abs(rank_prefix_prob((0,), 3) - 0.8402) < 1e-3
    total = sum(rank_prefix_prob((i,), 3) for i in range(11))
    assert abs(total - 1.0) < 1e-9
    with pytest.raises(ValueError):
        rank_prefix_prob((1, 2), 3)
    with pytest.raises(ValueError):
        rank_prefix_prob((), 3)


def test_rank_prefix_chain():
    # appending zeros multiplies by P(0 | 0) = 1 and P(0 | i) factors
    base = rank_prefix_prob((2,), 3)
    from cyclrank.matmodel import p_cond

    assert abs(
        rank_prefix_prob((2, 0, 0), 3) - base * float(p_cond(0, 2, 3))
    ) < 1e-15


def test_prefix_consistent_with_limit():
    for j in range(5):
        assert abs(rank_prefix_prob((j,), 3) - limit_rank_defect_prob(3, j)) < 1e-9
