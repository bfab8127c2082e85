import numpy as np
import pytest

from extremal.fields import GF
from extremal.lie import LieAlgebra, transvection
from extremal.linalg import Subspace, inverse
from extremal.local import (AmbientTooSmallError, DirectedIndex, InvalidIndexError, NotScalarError,
                            compatibility_scalar, conjugate_index, conjugation, index_containing, join,
                            leq, local_cover_check, random_index, random_invertible, sl_of_index, trivial_center)


def unit_index(F, n, ks, ls=None):
    eye = F.identity(n)
    ls = ks if ls is None else ls
    return DirectedIndex(Subspace.span(F, [eye[:, k] for k in ks], n), Subspace.span(F, [eye[:, l] for l in ls], n))


def same_span(F, A, B):
    flat = lambda M: M.reshape(M.shape[0], M.shape[1], -1)
    n = A.shape[-1] ** 2
    return Subspace(F, n, flat(A)) == Subspace(F, n, flat(B))


def test_invalid_indices():
    F = GF(3)
    with pytest.raises(InvalidIndexError, match="dimension 2"):
        unit_index(GF(5), 5, [0, 1])
    with pytest.raises(InvalidIndexError, match="characteristic"):
        unit_index(F, 5, [0, 1, 2])
    with pytest.raises(InvalidIndexError, match="ann_U"):
        unit_index(GF(5), 6, [0, 1, 2], [0, 1, 3])
    with pytest.raises(InvalidIndexError, match="dim Phi"):
        unit_index(GF(5), 6, [0, 1, 2], [0, 1, 2, 3])


def test_leq_is_a_partial_order():
    F = GF(5)
    a, b, c = unit_index(F, 6, [0, 1, 2]), unit_index(F, 6, [0, 1, 2, 3]), unit_index(F, 6, [3, 4, 5])
    assert leq(a, a) and leq(a, b) and not leq(b, a)
    assert not leq(a, c) and not leq(c, a)


def test_join_is_an_upper_bound():
    F = GF(5)
    a, c = unit_index(F, 6, [0, 1, 2]), unit_index(F, 6, [3, 4, 5])
    J = join(a, c)
    assert leq(a, J) and leq(c, J) and J.dim == 6
    assert join(a, a) == a


def test_join_steps_past_the_characteristic():
    # U1 + U2 has dimension 6, divisible by 3, so one more hyperbolic pair is needed
    F = GF(3)
    a, b = unit_index(F, 8, [0, 1, 2, 3]), unit_index(F, 8, [2, 3, 4, 5])
    J = join(a, b)
    assert J.dim == 7 and leq(a, J) and leq(b, J)


def test_index_containing_a_transvection():
    F = GF(5)
    eye = F.identity(6)
    I = index_containing(F, [eye[:, 0]], [eye[:, 1]], 6)
    assert I.dim == 3
    assert sl_of_index(I).contains(transvection(F, eye[:, 0], eye[:, 1]))


def test_ambient_too_small():
    F = GF(3)
    eye = F.identity(3)
    with pytest.raises(AmbientTooSmallError):
        index_containing(F, [eye[:, 0]], [eye[:, 0]], 3)


@pytest.mark.parametrize("q,n,m", [(2, 5, 3), (5, 6, 4), (3, 6, 4)])
def test_sl_of_index_dimension(q, n, m):
    F = GF(q)
    I = random_index(F, n, m, np.random.default_rng(q * n))
    A = sl_of_index(I)
    assert A.dim == m * m - 1 and trivial_center(A)


def test_sl_is_monotone():
    F = GF(5)
    rng = np.random.default_rng(3)
    I1, I2 = random_index(F, 7, 3, rng), random_index(F, 7, 3, rng)
    J = join(I1, I2)
    big = sl_of_index(J)
    for I in (I1, I2):
        A = sl_of_index(I)
        assert all(big.contains(x) for x in A.basis)


def test_conjugation_transports_sl():
    F = GF(5)
    rng = np.random.default_rng(8)
    I = random_index(F, 6, 4, rng)
    g = random_invertible(F, 6, rng)
    moved = sl_of_index(I).mats
    assert same_span(F, conjugation(F, g)(moved), sl_of_index(conjugate_index(I, g)).mats)


def _setup(seed=1):
    F = GF(5)
    rng = np.random.default_rng(seed)
    I = random_index(F, 6, 3, rng)
    J = join(I, random_index(F, 6, 3, rng))
    return F, rng, I, J, sl_of_index(I)


def test_compatibility_scalar_is_one():
    F, rng, I, J, A = _setup()
    g = random_invertible(F, 6, rng)
    # g_I is sl(I) pulled back along g, so conjugating by g lands in sl(I)
    gI = LieAlgebra(F, 6, conjugation(F, inverse(F, g))(A.mats), F)
    lam = compatibility_scalar(I, J, gI, conjugation(F, g), conjugation(F, g))
    assert lam == 1


def test_scaled_isomorphism_rejected():
    F, rng, I, J, A = _setup()
    ident = conjugation(F, F.identity(6))
    scaled = lambda m: F.smul(F.scalar(2), m)
    with pytest.raises(NotScalarError, match="brackets"):
        compatibility_scalar(I, J, A, scaled, ident)


def test_moving_isomorphism_rejected():
    F, rng, I, J, A = _setup()
    Ub, Pb = I.dual_basis()
    # 1 + t_{u0, phi1} normalises sl(I) but moves its extremal points
    g = F.add(F.identity(6), transvection(F, Ub[:, 0], Pb[:, 1]).matrix)
    with pytest.raises(NotScalarError, match="not a scalar"):
        compatibility_scalar(I, J, A, conjugation(F, g), conjugation(F, F.identity(6)))


def test_map_leaving_sl_i_rejected():
    F, rng, I, J, A = _setup()
    g = random_invertible(F, 6, rng)
    with pytest.raises(NotScalarError, match="sl\\(I\\)"):
        compatibility_scalar(I, J, A, conjugation(F, g), conjugation(F, F.identity(6)))


def test_local_cover_report():
    r = local_cover_check(6, GF(5), samples=4, terms=3, seed=2)
    assert r["schema"] == "extremal.local/1" and r["ok"]
    for s in r["samples"]:
        assert s["contained"] and s["tight_contained"]
        assert s["chain_dims"] == sorted(s["chain_dims"])
