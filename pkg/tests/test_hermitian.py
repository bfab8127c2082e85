import itertools

import pytest

from extremal.fields import GF, QQ_sqrt
from extremal.geometry import build_geometry
from extremal.hermitian import (DegenerateFormError, NoIsotropicVectorError, PolarityError, SemilinearInvolution,
                                SesquiForm, build_symplectic, build_unitary, delta_graph, extract_polarity,
                                hyperbolic_criterion, induced_permutation, is_trace_valued, isotropic_points,
                                isotropic_span, proportional, realize_form, skew_scalar, spanning_reflection_basis)
from extremal.lie import sl
from extremal.suite import polarity_case, three_way, trace_valued_forms


def unitary_points(n, q):
    """Isotropic points of a non-degenerate Hermitian form on GF(q^2)^n."""
    return (q ** n - (-1) ** n) * (q ** (n - 1) - (-1) ** (n - 1)) // (q * q - 1)


@pytest.mark.parametrize("q2,n", [(4, 2), (4, 3), (9, 2), (9, 3), (4, 4)])
def test_isotropic_point_counts(q2, n):
    h = SesquiForm.standard(GF(q2), n)
    assert isotropic_points(h).shape[1] == unitary_points(n, int(round(q2 ** 0.5)))


@pytest.mark.parametrize("q2,n", [(4, 3), (9, 3), (9, 2)])
def test_unitary_dimension(q2, n):
    U = build_unitary(SesquiForm.standard(GF(q2), n))
    # su has dimension n^2 - 1 over the fixed field
    assert U.full.dim == n * n - 1
    assert U.equal


def test_symplectic_sp4_3():
    f = SesquiForm.standard_symplectic(GF(3), 4)
    S = build_symplectic(f)
    assert S.full.dim == 10 and S.equal
    G = build_geometry(S.full)
    assert G.num_points == 40 and len(G.lines) == 0


def test_form_validation():
    K = GF(9)
    with pytest.raises(DegenerateFormError):
        SesquiForm.skew_hermitian(K, K.zeros((2, 2)))
    with pytest.raises(ValueError):
        SesquiForm.skew_hermitian(K, K.identity(2))        # Hermitian, not skew
    with pytest.raises(DegenerateFormError):
        SesquiForm.standard_symplectic(GF(3), 3)


def test_skew_scalar_is_skew():
    for K in (GF(4), GF(9), GF(25), QQ_sqrt(-1)):
        d = skew_scalar(K)
        assert K.s_sigma(d) == K.s_neg(d)


@pytest.mark.parametrize("name", list(trace_valued_forms()))
def test_three_way_equivalence(name):
    h = trace_valued_forms()[name]
    r = three_way(h)
    assert r["agree"], r


def test_char_two_symmetric_form_fails_everything():
    F = GF(2)
    h = SesquiForm(F, F.identity(3), F.one, "id")
    assert not is_trace_valued(h)
    assert isotropic_span(h).dim < 3
    assert hyperbolic_criterion(h)[0] is False


def test_anisotropic_form_over_gaussian_rationals():
    K = QQ_sqrt(-1)
    h = SesquiForm.standard(K, 3)
    with pytest.raises(NoIsotropicVectorError):
        hyperbolic_criterion(h)


def delta_oracle(h):
    """networkx graph on anisotropic points; edge when the 2-space holds two non-orthogonal isotropic vectors."""
    nx = pytest.importorskip("networkx")
    K = h.field
    pts = K.projective_points(h.n)
    aniso = [pts[:, i] for i in range(pts.shape[1]) if not K.s_is_zero(h.value(pts[:, i], pts[:, i]))]
    g = nx.Graph()
    g.add_nodes_from(range(len(aniso)))
    scal = list(K.scalars())
    for i, j in itertools.combinations(range(len(aniso)), 2):
        a, b = aniso[i], aniso[j]
        span = [K.add(K.smul(x, a), K.smul(y, b)) for x, y in itertools.product(scal, repeat=2)]
        iso = [v for v in span if not K.all_zero(v) and K.s_is_zero(h.value(v, v))]
        if any(not K.s_is_zero(h.value(v, w)) for v in iso for w in iso):
            g.add_edge(i, j)
    return nx.number_connected_components(g), len(aniso)


@pytest.mark.parametrize("q2,n", [(4, 2), (4, 3), (9, 2), (9, 3)])
def test_delta_graph_against_networkx(q2, n):
    h = SesquiForm.standard(GF(q2), n)
    g = delta_graph(h)
    comps, verts = delta_oracle(h)
    assert g.vertices.shape[1] == verts
    assert g.components == comps
    assert len(g.tree) == verts - comps


def test_delta_graph_disconnected_over_gf4():
    # the scaling step making h(u,u) - h(u,v) nonzero has no room over GF(2)
    g = delta_graph(SesquiForm.standard(GF(4), 3))
    assert g.vertices.shape[1] == 12 and g.components == 4


@pytest.mark.parametrize("q2,n", [(4, 2), (4, 3), (9, 2), (9, 3)])
def test_reflections_span_unitary_algebra(q2, n):
    c = spanning_reflection_basis(SesquiForm.standard(GF(q2), n))
    assert len(c.elements) == n * n
    assert c.spans and c.rank == c.u_dim == n * n


def test_real_mu_gives_dependent_set():
    K = GF(9)
    c = spanning_reflection_basis(SesquiForm.standard(K, 3), mu=K.one)
    assert not c.spans and c.rank == 6


@pytest.mark.parametrize("gram", [
    [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
    [["0", "t", "0"], ["t+1", "0", "0"], ["0", "0", "1"]],
])
def test_polarity_round_trip(gram):
    K = GF(4)
    c = polarity_case(K, K.asarray(gram))
    assert c["proportional"] and c["fixed_equals_unitary"]
    assert c["tau"] == "frobenius" and c["epsilon"] == "-1"
    assert all(c["checks"].values())


def test_polarity_over_gf9_recovers_gram():
    K = GF(9)
    G0 = K.asarray([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    A = sl(3, K)
    G = build_geometry(A)
    theta = SemilinearInvolution(K, G0)
    R = realize_form(extract_polarity(G, induced_permutation(G, A, theta), theta))
    assert proportional(K, R.form.gram, G0)
    assert not proportional(K, R.form.gram, K.identity(3))


def test_identity_action_is_not_a_polarity():
    G = build_geometry(sl(3, GF(4)))
    with pytest.raises(PolarityError):
        extract_polarity(G, list(range(G.num_points)))
