import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extremal.fields import GF, QQ
from extremal.lie import (Extremality, EnumerationBoundError, LieAlgebra, LieElement, NotExtremalError,
                          TransvectionSpec, all_flags, bracket, center, classify_pair,
                          classify_transvection_pair, enumerate_extremal, exp_conjugation, exp_map,
                          extremal_form, extremal_functional, fgl, fsl, ideal_closure, is_extremal,
                          is_simple, sl, transvection, transvection_functional, unit_vector,
                          verify_identities)
from extremal.linalg import Subspace


def e(F, n, i):
    return unit_vector(F, n, i)


def T(F, n, i, j):
    return transvection(F, e(F, n, i), e(F, n, j))


def gauss_binom(n, k, q):
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def flag_count(n, q):
    return gauss_binom(n, 1, q) * gauss_binom(n - 1, 1, q)


# -- elements and brackets ---------------------------------------------------------

def test_transvection_requires_incidence():
    F = GF(3)
    with pytest.raises(ValueError):
        TransvectionSpec(F, e(F, 3, 0), e(F, 3, 0))


def test_bracket_formula_on_rank_one_terms():
    F = GF(5)
    v, w = F.asarray([1, 2, 0]), F.asarray([0, 1, 3])
    phi, psi = F.asarray([0, 1, 4]), F.asarray([2, 0, 1])
    a = LieElement.from_terms(F, [(v, phi)])
    b = LieElement.from_terms(F, [(w, psi)])
    c = bracket(a, b)
    # [v(x)phi, w(x)psi] = phi(w) v(x)psi - psi(v) w(x)phi, checked as matrices
    A, B = a.matrix, b.matrix
    assert F.equal(c.matrix, F.sub(F.matmul(A, B), F.matmul(B, A)))
    assert F.equal(c.expand(), c.matrix)


def test_lie_element_json_round_trip():
    F = GF(9)
    x = LieElement.from_terms(F, [(F.asarray(["1", "t", "0"]), F.asarray(["0", "0", "1"]))])
    assert LieElement.from_json(x.to_json()) == x


# -- constructions -------------------------------------------------------------------

@pytest.mark.parametrize("n,q", [(2, 3), (3, 2), (3, 5), (4, 2)])
def test_sl_dimension_and_identities(n, q):
    A = sl(n, GF(q))
    assert A.dim == n * n - 1
    assert A.identity_check()


def test_fsl_rejects_degenerate_pi():
    F = GF(3)
    with pytest.raises(ValueError):
        fsl(F, 3, Subspace(F, 3, F.asarray([[1, 0, 0], [0, 1, 0]])))
    assert fsl(F, 3, Subspace.full(F, 3)).dim == 8


def test_reflections_generate_gl():
    assert fgl(GF(2), 3).dim == 9


def test_algebra_json_round_trip():
    A = sl(3, GF(4))
    B = LieAlgebra.from_json(A.to_json())
    assert B.dim == A.dim and np.array_equal(B.structure, A.structure)


# -- extremality ---------------------------------------------------------------------

@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 5)])
def test_transvections_satisfy_identities(n, q):
    F = GF(q)
    A = sl(n, F)
    specs = [TransvectionSpec(F, fl.v, fl.phi) for fl in all_flags(F, n)]
    assert len(specs) == flag_count(n, q)
    X = A.coords_of_matrices(np.stack([s.element().matrix for s in specs], axis=1))
    G = np.stack([transvection_functional(A, s) for s in specs], axis=1)
    r = verify_identities(A, X, G)
    assert r.ok.all()


def test_solved_functional_matches_closed_form():
    F = GF(3)
    A = sl(4, F)
    t = TransvectionSpec(F, e(F, 4, 0), e(F, 4, 1))
    status, g = extremal_functional(t.element(), A)
    assert status == Extremality.PURE
    assert F.equal(g, transvection_functional(A, t))


def test_extremal_form_value():
    F = GF(5)
    x = TransvectionSpec(F, e(F, 3, 0), e(F, 3, 1))
    y = T(F, 3, 1, 0)
    # g(t_{e0,e1*}, t_{e1,e0*}) = -phi(y v) = -1
    assert extremal_form(x, y) == F.element(-1)
    A = sl(3, F)
    assert extremal_form(x.element(), y, A) == F.element(-1)


def test_non_extremal_examples():
    F = GF(5)
    A = sl(3, F)
    h = LieElement(F, F.asarray([[1, 0, 0], [0, -1, 0], [0, 0, 0]]))
    assert is_extremal(h, A) == Extremality.NOT_EXTREMAL
    F3 = GF(3)
    x = LieElement.from_terms(F3, [(e(F3, 4, 0), e(F3, 4, 1)), (e(F3, 4, 2), e(F3, 4, 3))])
    assert is_extremal(x, sl(4, F3)) == Extremality.NOT_EXTREMAL
    with pytest.raises(NotExtremalError):
        exp_map(h, 1, T(F, 3, 0, 1), A)


def test_central_element_is_a_sandwich():
    F = GF(3)
    A = sl(3, F)
    I = LieElement(F, F.identity(3))
    assert is_extremal(I, A) == Extremality.SANDWICH
    assert center(A).dim == 1


# -- exp -----------------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 119), st.integers(1, 4), st.integers(0, 4))
def test_exp_is_conjugation_and_additive(k, lam, mu):
    F = GF(5)
    flags = list(all_flags(F, 3))
    fl = flags[k % len(flags)]
    x = TransvectionSpec(F, fl.v, fl.phi)
    for y in sl(3, F).basis:
        assert exp_map(x, lam, y) == exp_conjugation(x.element(), lam, y)
        assert exp_map(x, mu, exp_map(x, lam, y)) == exp_map(x, (lam + mu) % 5, y)


def test_exp_preserves_brackets():
    F = GF(3)
    A = sl(3, F)
    x = TransvectionSpec(F, e(F, 3, 0), e(F, 3, 2))
    B = A.basis
    for a in B:
        for b in B:
            assert exp_map(x, 2, bracket(a, b)) == bracket(exp_map(x, 2, a), exp_map(x, 2, b))


# -- pair classification ---------------------------------------------------------------

def test_pair_cases_by_example():
    F = GF(5)
    A = sl(4, F)
    cases = {
        "a": (T(F, 4, 0, 1), T(F, 4, 0, 1).scale(F.scalar(2))),
        "b": (T(F, 4, 0, 1), T(F, 4, 0, 2)),
        "c": (T(F, 4, 0, 1), T(F, 4, 2, 3)),
        "d": (T(F, 4, 0, 1), T(F, 4, 1, 2)),
        "e": (T(F, 4, 0, 1), T(F, 4, 1, 0)),
    }
    for want, (x, y) in cases.items():
        assert classify_pair(x, y, A) == want
        from extremal.lie import as_transvection
        assert classify_transvection_pair(as_transvection(x), as_transvection(y)) == want


def test_pair_counts_sl32():
    """Frozen from the incidence formula: a=21, b=84, c=0, d=168, e=168."""
    F = GF(2)
    A = sl(3, F)
    pts = enumerate_extremal(A)
    counts = {}
    for p in pts:
        for q in pts:
            s = TransvectionSpec(F, p.label.v, p.label.phi)
            t = TransvectionSpec(F, q.label.v, q.label.phi)
            c = classify_transvection_pair(s, t)
            counts[c] = counts.get(c, 0) + 1
    assert counts == {"a": 21, "b": 84, "d": 168, "e": 168}


# -- enumeration ---------------------------------------------------------------------

@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 2), (3, 4)])
def test_parametric_point_count(n, q):
    assert len(enumerate_extremal(sl(n, GF(q)))) == flag_count(n, q)


@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 2)])
def test_brute_equals_parametric(n, q):
    A = sl(n, GF(q))
    brute = {p.key for p in enumerate_extremal(A, "brute")}
    par = {p.key for p in enumerate_extremal(A)}
    assert brute == par


def test_sandwiches_counted_only_on_request():
    A = sl(3, GF(3))
    assert len(enumerate_extremal(A, "brute", include_sandwiches=True)) == 53
    # in characteristic 2, sl(2,K) consists of sandwiches only
    B = sl(2, GF(4))
    assert enumerate_extremal(B, "brute") == []
    assert len(enumerate_extremal(B)) == 5


def test_enumeration_bound(monkeypatch):
    A = sl(3, GF(3))
    with pytest.raises(EnumerationBoundError):
        enumerate_extremal(A, "brute", bound=1000)
    monkeypatch.setenv("EXTREMAL_ENUM_CAP", "10")
    with pytest.raises(EnumerationBoundError):
        enumerate_extremal(A, "brute")
    with pytest.raises(EnumerationBoundError):
        enumerate_extremal(sl(2, QQ()), "brute")


# -- ideals ----------------------------------------------------------------------------

@pytest.mark.parametrize("n,q,simple", [(3, 2, True), (3, 3, False), (4, 3, True), (2, 2, False), (4, 2, False)])
def test_simplicity(n, q, simple):
    assert is_simple(sl(n, GF(q))) is simple


def test_ideal_closure_of_transvection_is_everything():
    F = GF(5)
    A = sl(3, F)
    assert ideal_closure(A, T(F, 3, 0, 1)).dim == 8
