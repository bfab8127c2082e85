import itertools

import pytest

from extremal.fields import GF
from extremal.geometry import (GeometryError, GeometryGraph, build_geometry, classify_partition, flag_model,
                               incidence_via_cliques, match_geometries, maximal_cliques, projective_lines)
from extremal.lie import sl
from extremal.linalg import Subspace, pair


def gauss_binom(n, k, q):
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def flag_oracle(n, q):
    """Points, lines and line size of the flag geometry from Gaussian binomials.

    A line of either pencil is fixed by a flag ``point < codim-2 space`` or
    ``line < hyperplane``; both families have the same size.
    """
    points = gauss_binom(n, 1, q) * gauss_binom(n - 1, 1, q)
    family = gauss_binom(n, 1, q) * gauss_binom(n - 1, 2, q) if n > 3 else gauss_binom(n, 1, q)
    return points, 2 * family, q + 1


@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 2), (3, 4)])
def test_geometry_counts_against_oracle(n, q):
    G = build_geometry(sl(n, GF(q)))
    pts, lines, size = flag_oracle(n, q)
    assert G.num_points == pts
    assert len(G.lines) == lines
    assert G.line_sizes() == {size: lines}


def test_sl32_summary():
    s = build_geometry(sl(3, GF(2))).summary()
    assert s["points"] == 21 and s["lines"] == 14
    assert s["line_sizes"] == {"3": 14} and s["lines_per_point"] == {"2": 21}


def test_flag_model_gf4():
    M = flag_model(3, GF(4))
    assert M.num_points == 105 and len(M.lines) == 42
    assert M.line_sizes() == {5: 42}


def test_brute_geometry_equals_parametric():
    A = sl(3, GF(2))
    assert build_geometry(A, "brute").summary() == build_geometry(A).summary()


@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 2), (3, 5)])
def test_match_with_flag_model(n, q):
    G = build_geometry(sl(n, GF(q)))
    M = flag_model(n, GF(q))
    iso = match_geometries(G, M)
    assert iso is not None
    image = {tuple(sorted(iso[i] for i in line)) for line in G.lines}
    assert image == set(M.lines)


def test_match_rejects_non_isomorphic():
    M = flag_model(3, GF(2))
    assert match_geometries(M, flag_model(3, GF(3))) is None
    broken = GeometryGraph(M.field, M.num_points, M.lines[:-1], M.labels)
    assert match_geometries(broken, M) is None


def test_degenerate_pi_rejected():
    F = GF(3)
    with pytest.raises(GeometryError):
        flag_model(3, F, Subspace(F, 3, F.asarray([[1, 0, 0]])))


def test_projective_lines_gf3():
    pts, lines = projective_lines(GF(3), 3)
    assert pts.shape[1] == 13 and len(lines) == 13
    assert all(len(l) == 4 for l in lines)


@pytest.mark.parametrize("n,q,cliques,size,part", [(3, 2, 14, 3, 7), (4, 2, 30, 7, 15), (3, 3, 26, 4, 13)])
def test_clique_partition(n, q, cliques, size, part):
    G = build_geometry(sl(n, GF(q)))
    cl = maximal_cliques(G)
    assert len(cl) == cliques and {len(c) for c in cl} == {size}
    P = classify_partition(cl, G)
    assert P.names == ("P_bar", "H_bar")
    assert [len(p) for p in P.parts] == [part, part]


def test_cliques_recover_incidence():
    F = GF(3)
    G = flag_model(3, F)
    P = classify_partition(maximal_cliques(G), G)
    for cp, ch in itertools.product(*P.parts):
        lp = G.labels[next(iter(cp.members))]
        lh = G.labels[next(iter(ch.members))]
        incident = F.s_is_zero(pair(F, lh.phi, lp.v))
        assert incidence_via_cliques(cp, ch, P) == incident
    a, b = P.parts[0][:2]
    with pytest.raises(GeometryError):
        incidence_via_cliques(a, b, P)


def test_json_and_dot_export():
    G = build_geometry(sl(3, GF(2)))
    data = G.to_json()
    assert data["schema"] == "extremal.geometry/1"
    assert len(data["points"]) == 21 and len(data["lines"]) == 14
    dot = G.to_dot()
    assert dot.startswith("graph") and dot.count(" -- ") == 42


def test_sl2_edges_follow_the_form():
    # two flags are sl2-adjacent iff each point lies off the other hyperplane
    F = GF(2)
    G = build_geometry(sl(3, F))
    for a, b in G.sl2_edges:
        s, t = G.labels[a], G.labels[b]
        assert not F.s_is_zero(pair(F, s.phi, t.v)) and not F.s_is_zero(pair(F, t.phi, s.v))
    assert len(G.sl2_edges) == 168 // 2
