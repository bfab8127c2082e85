import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extremal.fields import GF, QQ
from extremal.linalg import (DimensionError, Subspace, annihilator, inverse, kernel, rank, rref, solve)


def rank_oracle(rows, p):
    """Plain-list elimination mod p."""
    m = [list(r) for r in rows]
    r = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        r += 1
    return r


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(0, 4), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_rank_matches_oracle(rows):
    F = GF(5)
    M = F.asarray(rows)
    assert rank(F, M) == rank_oracle(rows, 5)


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_kernel_is_complement(rows):
    F = GF(5)
    M = F.asarray(rows)
    K = kernel(F, M)
    assert K.shape[1] == M.shape[2] - rank(F, M)
    assert F.all_zero(F.einsum("ij,kj->ik", M, K))


def test_rref_is_reduced():
    F = GF(3)
    M = F.asarray([[1, 2, 0, 1], [2, 1, 1, 0], [0, 0, 1, 2]])
    R, piv = rref(F, M)
    for i, c in enumerate(piv):
        col = R[0, :, c]
        assert col[i] == 1 and np.count_nonzero(col) == 1


def test_solve_and_inverse_over_q():
    F = QQ()
    M = F.asarray([[2, 1], [1, 3]])
    b = F.asarray([1, 0])
    x = solve(F, M, b)
    assert list(x[0]) == [Fraction(3, 5), Fraction(-1, 5)]
    Mi = inverse(F, M)
    assert F.equal(F.matmul(M, Mi), F.identity(2))
    assert solve(F, F.asarray([[1, 1], [1, 1]]), F.asarray([0, 1])) is None


def test_inverse_of_singular_raises():
    F = GF(2)
    with pytest.raises(ZeroDivisionError):
        inverse(F, F.asarray([[1, 1], [1, 1]]))


def test_subspace_lattice_gf2_exhaustive():
    """dim(U+W) + dim(U cap W) = dim U + dim W over all pairs of 2-spaces of GF(2)^4."""
    F = GF(2)
    pts = F.projective_points(4)
    twos = {Subspace.span(F, [pts[:, i], pts[:, j]]) for i, j in itertools.combinations(range(15), 2)}
    assert len(twos) == 35
    sample = list(twos)[:12]
    for U in sample:
        for W in sample:
            assert (U + W).dim + U.intersection(W).dim == 4
            assert U.intersection(W) <= U


def test_annihilator_double():
    F = GF(9)
    U = Subspace(F, 4, F.asarray([["1", "t", "0", "2"], ["0", "1", "1+t", "0"]]))
    A = annihilator(U)
    assert A.dim == 2
    assert annihilator(A) == U


def test_subspace_vectors_and_coordinates():
    F = GF(3)
    U = Subspace(F, 3, F.asarray([[1, 1, 0], [0, 1, 2]]))
    vecs = U.vectors()
    assert vecs.shape[1] == 9
    for i in range(9):
        assert U.contains(vecs[:, i])
    assert U.projective_points().shape[1] == 4
    with pytest.raises(ValueError):
        U.coordinates(F.asarray([0, 0, 1]))
    with pytest.raises(DimensionError):
        U.contains(F.asarray([1, 0]))
