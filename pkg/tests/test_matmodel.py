from fractions import Fraction

import numpy as np
import pytest

from cyclrank.flinalg import FlMatrix, rank
from cyclrank.matmodel import (
    GapReport,
    PinnedModel,
    SizeLimitError,
    _all_matrices,
    batch_rank,
    eta,
    eta_inf,
    exact_rank_distribution,
    gaussian_binomial,
    limit_rank_defect_prob,
    p_cond,
    pinned_rank_counts,
    q_pinned_prob,
    q_pinned_sample,
    rank_count,
    rm_gap_check,
    sample_kernel_dims,
    sample_rank,
    span_growth_counts,
)


def brute_rank_census(r, s, l):
    """Exhaustive rank counts over every r x s matrix (independent oracle)."""
    digits = _all_matrices(l, r * s)
    mats = digits.reshape(-1, r, s)
    census = {}
    for rho in batch_rank(mats, l):
        census[int(rho)] = census.get(int(rho), 0) + 1
    return census


@pytest.mark.parametrize("l", [3, 5])
@pytest.mark.parametrize("r,s", [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_rank_count_vs_exhaustive(r, s, l):
    census = brute_rank_census(r, s, l)
    for rho in range(min(r, s) + 1):
        assert rank_count(r, s, l, rho) == census.get(rho, 0)


def test_rank_count_examples():
    assert rank_count(2, 2, 3, 2) == 48
    assert rank_count(4, 7, 3, 0) == 1
    assert sum(rank_count(5, 4, 3, rho) for rho in range(5)) == 3**20


def test_gaussian_binomial_symmetry():
    for n in range(7):
        for k in range(n + 1):
            assert gaussian_binomial(n, k, 3) == gaussian_binomial(n, n - k, 3)


def test_p_cond_examples():
    assert p_cond(0, 0, 3) == 1
    assert p_cond(4, 4, 3) == Fraction(1, 3 ** (4 * 5))
    assert p_cond(0, 1, 3) == Fraction(8, 9)
    with pytest.raises(ValueError):
        p_cond(3, 2, 3)


@pytest.mark.parametrize("l", [3, 5])
@pytest.mark.parametrize("n", range(9))
def test_p_cond_sums_to_one(n, l):
    assert sum(p_cond(j, n, l) for j in range(n + 1)) == 1


def test_exact_distribution_sums_to_one():
    for r, s, l in [(3, 2, 3), (4, 3, 3), (2, 4, 5)]:
        dist = exact_rank_distribution(r, s, l)
        assert sum(dist.probs.values()) == 1
        assert set(dist.probs) == set(range(max(0, s - r), s + 1))


def test_span_growth_matches_rank_count():
    for r, s in [(2, 3), (3, 2), (4, 3)]:
        w = span_growth_counts(r, 0, s, 3)
        for t in range(min(r, s) + 1):
            assert w.get(t, 0) == rank_count(r, s, 3, t)


def test_pinned_counts_total():
    assert sum(pinned_rank_counts(4, 3, 3, 1, 0).values()) == 3**11
    assert sum(pinned_rank_counts(5, 4, 3, 2, 1).values()) == 3 ** (20 - 4)


@pytest.mark.parametrize("corner", [[[0]], [[1]], [[2]]])
def test_q_exact_equals_exhaustive_k1(corner):
    model = PinnedModel(M=FlMatrix.from_rows(3, corner), r=4, s=3)
    for j in range(4):
        assert q_pinned_prob(model, j, "exact") == q_pinned_prob(model, j, "exhaustive")


def test_q_exact_equals_exhaustive_k2():
    for rows in ([[1, 0], [0, 1]], [[1, 2], [2, 1]], [[0, 0], [0, 0]], [[1, 1], [0, 1]]):
        model = PinnedModel(M=FlMatrix.from_rows(3, rows), r=4, s=4)
        for j in range(5):
            assert q_pinned_prob(model, j, "exact") == q_pinned_prob(model, j, "exhaustive")


def test_q_no_pinning_equals_p():
    model = PinnedModel(M=FlMatrix(3, 0, 0, []), r=3, s=2)
    dist = exact_rank_distribution(3, 2, 3)
    for j in dist.probs:
        assert q_pinned_prob(model, j, "exact") == dist.probs[j]


def test_q_full_pin_invertible():
    M = FlMatrix.identity(3, 3)
    model = PinnedModel(M=M, r=3, s=3)
    assert q_pinned_prob(model, 0, "exact") == 1
    assert q_pinned_prob(model, 1, "exact") == 0


def test_q_depends_only_on_corner_rank():
    # two rank-1 corners must give identical completions distributions
    m1 = PinnedModel(M=FlMatrix.from_rows(3, [[1, 0], [0, 0]]), r=5, s=4)
    m2 = PinnedModel(M=FlMatrix.from_rows(3, [[1, 2], [2, 1]]), r=5, s=4)
    assert rank(m2.M) == 1
    for j in range(5):
        assert q_pinned_prob(m1, j, "exact") == q_pinned_prob(m2, j, "exact")


def test_q_exhaustive_size_guard():
    model = PinnedModel(M=FlMatrix(3, 0, 0, []), r=6, s=6)
    with pytest.raises(SizeLimitError):
        q_pinned_prob(model, 0, "exhaustive")


def test_q_sampled_close_to_exact():
    model = PinnedModel(M=FlMatrix.from_rows(3, [[0]]), r=4, s=3)
    est, radius = q_pinned_sample(model, 0, samples=20_000, seed=5)
    assert radius > 0
    assert abs(est - float(q_pinned_prob(model, 0, "exact"))) <= radius


def test_rm_gap_zero_pin():
    rep = rm_gap_check(4, 0, 3, method="exact")
    assert rep.max_gap == 0.0


def test_rm_gap_examples():
    rep = rm_gap_check(4, 1, 3, method="exhaustive")
    assert isinstance(rep, GapReport)
    assert rep.ok and rep.max_gap <= 2 * 3 ** (2 - 4)
    exact = rm_gap_check(4, 1, 3, method="exact")
    assert abs(exact.max_gap - rep.max_gap) < 1e-15
    with pytest.raises(ValueError):
        rm_gap_check(3, 2, 3)


def test_batch_rank_agrees_with_reference():
    rng = np.random.default_rng(1)
    mats = rng.integers(0, 5, size=(50, 4, 6), dtype=np.int64)
    expected = [rank(FlMatrix(5, 4, 6, [int(x) for x in m.ravel()])) for m in mats]
    assert list(batch_rank(mats, 5)) == expected


def test_limit_examples():
    assert abs(limit_rank_defect_prob(3, 0) - 0.8402) < 1e-3
    total = sum(limit_rank_defect_prob(3, j) for j in range(11))
    assert abs(total - 1.0) < 1e-9
    vals = [limit_rank_defect_prob(3, j) for j in range(6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_limit_matches_stabilized_exact():
    dist = exact_rank_distribution(40, 39, 3).probs
    for j in range(5):
        assert abs(float(dist[j]) - limit_rank_defect_prob(3, j)) < 1e-12


def test_eta_products():
    assert eta(3, 0) == 1.0
    assert abs(eta(3, 2) - (2 / 3) * (8 / 9)) < 1e-15
    assert eta_inf(3, 64, start=2) > eta_inf(3, 64, start=1)


def test_sample_rank_contract():
    assert sample_rank(0, 4, 3, seed=0) == 4  # zero-row matrix, full kernel
    assert sample_rank(5, 4, 3, seed=123) == sample_rank(5, 4, 3, seed=123)
    dims = sample_kernel_dims(4, 3, 3, 200, seed=9)
    assert np.array_equal(dims, sample_kernel_dims(4, 3, 3, 200, seed=9))


def test_monte_carlo_matches_exact_three_sigma():
    n_draws = 100_000
    for l in (3, 5):
        dist = exact_rank_distribution(4, 5, l).probs
        dims = sample_kernel_dims(4, 5, l, n_draws, seed=42)
        for j, p in dist.items():
            p = float(p)
            if p * n_draws < 10:
                continue
            freq = float((dims == j).mean())
            sigma = (p * (1 - p) / n_draws) ** 0.5
            assert abs(freq - p) <= 3 * sigma, (l, j, freq, p)
