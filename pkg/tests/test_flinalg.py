import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclrank.flinalg import (
    FlMatrix,
    FlScalar,
    FlSubspace,
    left_kernel,
    rank,
    right_kernel,
)


def test_rank_identity():
    assert rank(FlMatrix.identity(3, 3)) == 3


def test_rank_zero_matrix():
    assert rank(FlMatrix.zero(5, 2, 4)) == 0


def test_rank_dependent_rows():
    assert rank(FlMatrix.from_rows(5, [[1, 2], [2, 4]])) == 1


def test_left_kernel_examples():
    assert left_kernel(FlMatrix.identity(3, 4)).dim == 0
    M = FlMatrix.from_rows(3, [[1, 2], [0, 0]])
    assert left_kernel(M).basis == ((0, 1),)
    Z = FlMatrix.zero(3, 3, 5)
    assert left_kernel(Z).dim == 3


def test_right_kernel_examples():
    assert right_kernel(FlMatrix.identity(5, 4)).dim == 0
    M = FlMatrix.from_rows(3, [[1, 2], [0, 0]])
    assert right_kernel(M).basis == ((1, 1),)
    Z = FlMatrix.zero(3, 4, 6)
    assert right_kernel(Z).dim == 6


def test_scalar_validation():
    with pytest.raises(ValueError):
        FlScalar(3, 3)
    with pytest.raises(ValueError):
        FlMatrix.zero(2, 1, 1)
    with pytest.raises(ValueError):
        FlMatrix.zero(98, 1, 1)
    with pytest.raises(ValueError):
        FlMatrix.zero(9, 1, 1)
    FlScalar(96, 97)


def test_entries_reduced():
    M = FlMatrix(3, 1, 3, [4, -1, 3])
    assert M.data == [1, 2, 0]


matrix_params = st.tuples(
    st.sampled_from([3, 5, 7]),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=6),
    st.integers(),
)


@given(matrix_params)
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_transpose(params):
    l, r, c, seed = params
    M = FlMatrix.random(l, r, c, random.Random(seed))
    rk = rank(M)
    assert rk + right_kernel(M).dim == c
    assert rk + left_kernel(M).dim == r
    assert rank(M.transpose()) == rk


@given(matrix_params)
@settings(max_examples=40, deadline=None)
def test_kernel_bases_annihilate_exactly(params):
    l, r, c, seed = params
    M = FlMatrix.random(l, r, c, random.Random(seed))
    for b in right_kernel(M).basis:
        assert all(x == 0 for x in M.mat_vec(list(b)))
    for b in left_kernel(M).basis:
        assert all(x == 0 for x in M.vec_mat(list(b)))


@given(matrix_params)
@settings(max_examples=30, deadline=None)
def test_kernel_membership_and_iteration(params):
    l, r, c, seed = params
    M = FlMatrix.random(l, r, c, random.Random(seed))
    ker = right_kernel(M)
    if ker.dim <= 3:
        vecs = list(ker.vectors())
        assert len(vecs) == l**ker.dim
        for v in vecs:
            assert ker.contains(v)
            assert all(x == 0 for x in M.mat_vec(v))


def test_subspace_canonical_equality():
    M1 = FlMatrix.from_rows(3, [[1, 1, 0], [0, 0, 0]])
    M2 = FlMatrix.from_rows(3, [[2, 2, 0], [1, 1, 0]])
    assert right_kernel(M1) == right_kernel(M2)
    assert isinstance(right_kernel(M1), FlSubspace)
