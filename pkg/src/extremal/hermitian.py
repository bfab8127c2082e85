"""Sesquilinear forms, unitary and symplectic algebras, and polarity recovery.

Conventions: ``h(v, w) = v^tau^T G w`` is linear in the second argument and
``h(v, .)`` is the row vector ``v^tau^T G``, so the element ``v (x) h(v, .)``
has matrix ``v v^tau^T G``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .fields import Field, FieldError
from .geometry import GeometryGraph, classify_partition, maximal_cliques
from .linalg import Subspace, _key, inverse, kernel, normalize_rows, rank, solve
from .lie import (Flag, LieAlgebra, LieElement, enumeration_cap, exp_conjugation, flatten_over,
                  generate, outer, point_key, unflatten_over)

SIGMA = "sigma"
IDENTITY = "id"


class DegenerateFormError(ValueError):
    pass


class NoIsotropicVectorError(ValueError):
    pass


class PolarityError(ValueError):
    pass


def skew_scalar(K: Field) -> tuple:
    """``delta = t - t^sigma``, a nonzero element with ``delta^sigma = -delta``."""
    return K.s_sub(K.gen, K.s_sigma(K.gen))


@dataclass(frozen=True, eq=False)
class SesquiForm:
    """Non-degenerate form with ``h(v, w) = eps * h(w, v)^tau`` (``tau`` is ``'sigma'`` or ``'id'``)."""

    field: Field
    gram: np.ndarray
    eps: tuple
    tau: str = SIGMA

    def __post_init__(self):
        K = self.field
        G = K.asarray(self.gram)
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "eps", K.scalar(self.eps))
        if G.ndim != 3 or G.shape[1] != G.shape[2]:
            raise ValueError("Gram matrix must be square")
        if self.tau not in (SIGMA, IDENTITY):
            raise ValueError(f"unknown involution {self.tau!r}")
        if self.tau == SIGMA and not K.has_involution:
            raise FieldError(f"{K} carries no involution")
        if rank(K, G) < G.shape[1]:
            raise DegenerateFormError("Gram matrix is singular")
        if not K.equal(G, K.smul(self.eps, self._tau(K.transpose(G)))):
            raise ValueError("h(v,w) = eps h(w,v)^tau fails on the basis")
        if K.s_mul(self.eps, self._tau_s(self.eps)) != K.one:
            raise ValueError("eps^tau must equal eps^-1")

    @classmethod
    def skew_hermitian(cls, field: Field, gram) -> "SesquiForm":
        return cls(field, gram, field.scalar(-1), SIGMA)

    @classmethod
    def alternating(cls, field: Field, gram) -> "SesquiForm":
        form = cls(field, gram, field.scalar(-1), IDENTITY)
        if not field.all_zero(np.diagonal(form.gram, axis1=1, axis2=2)):
            raise ValueError("an alternating form needs a zero diagonal")
        return form

    @classmethod
    def standard(cls, field: Field, n: int) -> "SesquiForm":
        """``delta * I`` with ``delta = t - t^sigma``."""
        return cls.skew_hermitian(field, field.smul(skew_scalar(field), field.identity(n)))

    @classmethod
    def standard_symplectic(cls, field: Field, n: int) -> "SesquiForm":
        if n % 2:
            raise DegenerateFormError("alternating forms need even dimension")
        G = field.zeros((n, n))
        for i in range(0, n, 2):
            field.set(G, (i, i + 1), 1)
            field.set(G, (i + 1, i), -1)
        return cls.alternating(field, G)

    @property
    def n(self) -> int:
        return self.gram.shape[1]

    @property
    def is_alternating(self) -> bool:
        return self.tau == IDENTITY and self.field.all_zero(np.diagonal(self.gram, axis1=1, axis2=2)) \
            and self.eps == self.field.scalar(-1)

    def _tau(self, a):
        return self.field.sigma(a) if self.tau == SIGMA else a

    def _tau_s(self, s):
        return self.field.s_sigma(s) if self.tau == SIGMA else s

    def functional(self, v: np.ndarray) -> np.ndarray:
        """``h(v, .)`` as a row vector (batched over leading axes)."""
        K = self.field
        return K.einsum("...a,ab->...b", self._tau(v), self.gram)

    def value(self, v: np.ndarray, w: np.ndarray) -> tuple:
        K = self.field
        return K.get(K.einsum("a,a->", self.functional(v), w), ())

    def values(self, V: np.ndarray, W: np.ndarray) -> np.ndarray:
        """``h(v_i, w_j)`` for batches ``(k, a, n)``, ``(k, b, n)``."""
        return self.field.einsum("ia,ja->ij", self.functional(V), W)

    def diag_values(self, V: np.ndarray) -> np.ndarray:
        return self.field.einsum("ia,ia->i", self.functional(V), V)

    def element(self, v: np.ndarray) -> LieElement:
        v = self.field.asarray(v)
        phi = self.functional(v)
        return LieElement(self.field, outer(self.field, v, phi), [(v, phi)])

    def scaled(self, c) -> "SesquiForm":
        K = self.field
        c = K.scalar(c)
        eps = K.s_mul(self.eps, K.s_div(c, self._tau_s(c)))
        return SesquiForm(K, K.smul(c, self.gram), eps, self.tau)

    def to_json(self) -> dict:
        K = self.field
        return {"field": str(K), "gram": K.format_array(self.gram), "eps": K.format_scalar(self.eps),
                "tau": self.tau}

    @classmethod
    def from_json(cls, data: dict) -> "SesquiForm":
        from .fields import parse_field
        K = parse_field(data["field"])
        return cls(K, K.asarray(data["gram"]), K.parse_scalar(data["eps"]), data.get("tau", SIGMA))


# -- trace values and isotropy ----------------------------------------------------

def in_trace_set(h: SesquiForm, x: tuple) -> bool:
    """Is ``x`` of the form ``lam - lam^tau``?"""
    K = h.field
    if h.tau == IDENTITY:
        return K.s_is_zero(x)
    return K.s_in_base(K.s_div(x, skew_scalar(K)))


def _polarization_vectors(h: SesquiForm) -> np.ndarray:
    K = h.field
    n = h.n
    eye = K.identity(n)
    vecs = [eye[:, i] for i in range(n)]
    mults = [K.one] + ([K.gen] if K.degree == 2 else [])
    for i, j in itertools.combinations(range(n), 2):
        for mu in mults:
            vecs.append(K.add(eye[:, i], K.smul(mu, eye[:, j])))
    return np.stack(vecs, axis=1)


def is_trace_valued(h: SesquiForm) -> bool:
    """Every ``h(v, v)`` lies in the trace set, checked on the basis and its polarisation closure.

    ``h(v,v)`` for ``v = sum c_i b_i`` is ``sum N(c_i) h(b_i,b_i)`` plus terms
    ``a - a^tau``, and the trace set is a subspace over the fixed field, so
    these vectors decide the question.
    """
    K = h.field
    d = h.diag_values(_polarization_vectors(h))
    return all(in_trace_set(h, K.get(d, i)) for i in range(d.shape[1]))


def _require_finite(h: SesquiForm, bound: int | None):
    K = h.field
    if not K.is_finite:
        return False
    bound = enumeration_cap() if bound is None else bound
    if K.order ** h.n > bound:
        from .lie import EnumerationBoundError
        raise EnumerationBoundError(f"{K.order}^{h.n} vectors exceed the bound {bound}")
    return True


def isotropic_points(h: SesquiForm, bound: int | None = None, height: int = 1) -> np.ndarray:
    """Canonical isotropic representatives: all of them over finite fields, a height-bounded search otherwise."""
    K = h.field
    if _require_finite(h, bound):
        pts = K.projective_points(h.n)
    else:
        rng = range(-height, height + 1)
        coords = [c for c in itertools.product(rng, repeat=K.degree)]
        vecs = [v for v in itertools.product(coords, repeat=h.n) if any(any(c) for c in v)]
        pts = normalize_rows(K, K.asarray([[tuple(c) for c in v] for v in vecs]))
        pts = _unique_rows(K, pts)
    iso = K.is_zero(h.diag_values(pts))
    return pts[:, iso]


def _unique_rows(K: Field, rows: np.ndarray) -> np.ndarray:
    seen = {}
    for i in range(rows.shape[1]):
        seen.setdefault(_key(K, rows[:, i]), i)
    return rows[:, sorted(seen.values())]


def _hyperbolic_partner(h: SesquiForm, v: np.ndarray, w: np.ndarray) -> np.ndarray | None:
    """An isotropic ``w + mu v`` for isotropic ``v`` and ``h(v,w) != 0`` (solved over the fixed field)."""
    K = h.field
    hww, hwv, hvw = h.value(w, w), h.value(w, v), h.value(v, w)
    if h.tau == IDENTITY:
        # h(w,w) + mu (h(w,v) + h(v,w)) = 0
        coef = K.s_add(hwv, hvw)
        if K.s_is_zero(coef):
            return w if K.s_is_zero(hww) else None
        mu = K.s_neg(K.s_div(hww, coef))
        return K.add(w, K.smul(mu, v))
    # mu = a + b t with a, b in F: linear over F in (a, b)
    F = K.base
    cols = []
    for basis in (K.one, K.gen):
        val = K.s_add(K.s_mul(basis, hwv), K.s_mul(K.s_sigma(basis), hvw))
        cols.append(val)
    M = F.zeros((K.degree, 2))
    b = F.zeros(K.degree)
    for r in range(K.degree):
        for c in range(2):
            M[0, r, c] = cols[c][r]
        b[0, r] = K.s_neg(hww)[r]
    sol = solve(F, M, b)
    if sol is None:
        return None
    mu = (sol[0, 0], sol[0, 1])
    return K.add(w, K.smul(mu, v))


def isotropic_span(h: SesquiForm, bound: int | None = None, height: int = 1) -> Subspace:
    """Span of the isotropic vectors.

    Finite fields: full enumeration.  Otherwise one isotropic vector is found
    by a height-bounded search and extended along hyperbolic 2-spaces; the
    result is a lower bound that equals ``V`` whenever the extensions succeed.
    """
    K = h.field
    pts = isotropic_points(h, bound, height)
    if pts.shape[1] == 0:
        raise NoIsotropicVectorError("no isotropic vector found")
    if K.is_finite:
        return Subspace(K, h.n, pts)
    v0 = pts[:, 0]
    eye = K.identity(h.n)
    vals = h.values(v0[:, None], eye)
    nz = [i for i in range(h.n) if not K.s_is_zero(K.get(vals, (0, i)))]
    found = [pts[:, i] for i in range(pts.shape[1])]
    for i in range(h.n):
        w = eye[:, i] if i in nz else K.add(eye[:, i], eye[:, nz[0]])
        partner = _hyperbolic_partner(h, v0, w)
        if partner is not None:
            found.append(partner)
    return Subspace.span(K, found)


def hyperbolic_criterion(h: SesquiForm, bound: int | None = None) -> tuple[bool, dict | None]:
    """For isotropic ``v`` and any ``w`` with ``h(v,w) != 0``: is ``<v,w>`` hyperbolic?

    Over finite fields all pairs are checked; ``<v,w>`` is hyperbolic exactly
    when some ``w + lam v`` is isotropic.  Returns a counterexample otherwise.
    """
    K = h.field
    if not _require_finite(h, bound):
        pts = isotropic_points(h, bound)
        if pts.shape[1] == 0:
            raise NoIsotropicVectorError("no isotropic vector found")
        v0 = pts[:, 0]
        eye = K.identity(h.n)
        for i in range(h.n):
            w = eye[:, i]
            if not K.s_is_zero(h.value(v0, w)) and _hyperbolic_partner(h, v0, w) is None:
                return False, {"v": K.format_array(v0), "w": K.format_array(w)}
        return True, None
    allp = K.projective_points(h.n)
    iso = allp[:, K.is_zero(h.diag_values(allp))]
    if iso.shape[1] == 0:
        raise NoIsotropicVectorError("no isotropic vector found")
    hvw = h.values(iso, allp)                                     # (I, P)
    hwv = h.values(allp, iso).swapaxes(1, 2)                      # h(w, v) as (I, P)
    hww = h.diag_values(allp)                                     # (P,)
    lam = K.elements()                                            # (q,)
    lam_t = h._tau(lam)
    # h(w + lam v, w + lam v) = h(w,w) + lam h(w,v) + lam^tau h(v,w)
    val = K.add(K.add(hww[:, None, :, None], K.mul(lam[:, None, None, :], hwv[:, :, :, None])),
                K.mul(lam_t[:, None, None, :], hvw[:, :, :, None]))
    has_iso = K.is_zero(val).any(axis=-1)
    relevant = ~K.is_zero(hvw)
    bad = relevant & ~has_iso
    if bad.any():
        i, j = (int(t) for t in np.argwhere(bad)[0])
        return False, {"v": K.format_array(iso[:, i]), "w": K.format_array(allp[:, j])}
    return True, None


@dataclass
class DeltaGraph:
    connected: bool
    vertices: np.ndarray
    tree: list[tuple[int, int]]
    components: int

    def certificate(self) -> dict:
        return {"connected": self.connected, "vertices": self.vertices.shape[1],
                "components": self.components, "spanning_tree": [list(e) for e in self.tree]}


def _hyperbolic_table(h: SesquiForm) -> np.ndarray:
    """``table[haa, hab, hbb]``: does ``<a, b>`` with these Gram values span a hyperbolic 2-space?"""
    K = h.field
    q = K.order
    lam = K.elements()
    lam_t = h._tau(lam)
    els = K.elements()
    A, B, C = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    haa, hab, hbb = (K.from_index(X.ravel()) for X in (A, B, C))
    hba = K.smul(h.eps, h._tau(hab))
    # isotropic combinations a + lam b and, separately, b itself
    def h_ab(l1, l2):  # h(a + l1 b, a + l2 b) with l1 already tau-twisted
        t = K.add(haa[:, :, None, None], K.mul(l2[:, None, None, :], hab[:, :, None, None]))
        t = K.add(t, K.mul(l1[:, None, :, None], hba[:, :, None, None]))
        return K.add(t, K.mul(K.mul(l1[:, None, :, None], l2[:, None, None, :]), hbb[:, :, None, None]))
    vals = h_ab(lam_t, lam)                                        # (T, q, q)
    iso = K.is_zero(np.diagonal(vals, axis1=2, axis2=3))           # a + lam b isotropic
    pair_nz = ~K.is_zero(vals)
    hyper = (iso[:, :, None] & iso[:, None, :] & pair_nz).any(axis=(1, 2))
    # b isotropic paired with an isotropic a + lam b
    b_iso = K.is_zero(hbb)
    hb_comb = K.add(hba[:, :, None], K.mul(lam[:, None, :], hbb[:, :, None]))   # h(b, a + lam b)
    hyper |= b_iso & (iso & ~K.is_zero(hb_comb)).any(axis=1)
    return hyper.reshape(q, q, q)


def delta_graph(h: SesquiForm, bound: int | None = None) -> DeltaGraph:
    """Graph on anisotropic points, adjacent when they span a hyperbolic 2-space; BFS spanning tree."""
    K = h.field
    if not _require_finite(h, bound):
        raise ValueError("the Delta graph is only built over finite fields")
    pts = K.projective_points(h.n)
    aniso = pts[:, ~K.is_zero(h.diag_values(pts))]
    m = aniso.shape[1]
    if m <= 1:
        return DeltaGraph(True, aniso, [], m)
    table = _hyperbolic_table(h)
    d = K.to_index(h.diag_values(aniso))
    G = K.to_index(h.values(aniso, aniso))
    adj = table[d[:, None], G, d[None, :]]
    np.fill_diagonal(adj, False)
    seen = np.zeros(m, bool)
    tree: list[tuple[int, int]] = []
    components = 0
    for root in range(m):
        if seen[root]:
            continue
        components += 1
        seen[root] = True
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for w in np.nonzero(adj[u] & ~seen)[0]:
                    seen[w] = True
                    tree.append((int(u), int(w)))
                    nxt.append(int(w))
            frontier = nxt
    return DeltaGraph(components == 1, aniso, tree, components)


def delta_graph_connected(h: SesquiForm, bound: int | None = None) -> tuple[bool, dict]:
    g = delta_graph(h, bound)
    return g.connected, g.certificate()


# -- unitary and symplectic algebras --------------------------------------------------

def _matrix_units(K: Field, F: Field, n: int) -> np.ndarray:
    """Basis of ``K^{n x n}`` over ``F`` in :func:`flatten_over` order, shape ``(k, m, n, n)``."""
    N = n * n if F == K else K.degree * n * n
    return unflatten_over(K, F, F.identity(N), n)


def _solution_algebra(h: SesquiForm, traceless: bool) -> tuple[Field, np.ndarray]:
    """Matrices ``X`` with ``X^tau^T G + G X = 0`` (and ``tr X = 0``) over the fixed field."""
    K = h.field
    F = K.base if h.tau == SIGMA else K
    n = h.n
    E = _matrix_units(K, F, n)                                      # (k, m, n, n)
    G = h.gram
    lhs = K.add(K.einsum("mba,bc->mac", h._tau(E), G), K.einsum("ab,mbc->mac", G, E))
    rows = flatten_over(K, F, lhs)                                  # (kF, m, N)
    if traceless:
        tr = K.sum(np.diagonal(E, axis1=2, axis2=3), -1)            # (k, m)
        tr_f = tr[..., None] if F == K else np.moveaxis(tr, 0, -1)[None]       # (kF, m, k)
        rows = np.concatenate([rows, tr_f], axis=-1)
    ker = kernel(F, np.swapaxes(rows, 1, 2))
    return F, unflatten_over(K, F, ker, n)


def isotropic_family(h: SesquiForm, bound: int | None = None):
    K = h.field

    def points():
        for i in range(pts.shape[1]):
            v = pts[:, i]
            el = h.element(v)
            yield Flag(K, v, el.decomposition[0][1]), el
    pts = isotropic_points(h, bound) if K.is_finite else np.zeros((K.degree, 0, h.n), dtype=K.dtype)
    return points


@dataclass
class FormAlgebras:
    """The linear-condition algebra, the transvection-generated one, and whether they agree."""

    form: SesquiForm
    full: LieAlgebra
    generated: LieAlgebra | None
    equal: bool

    def summary(self) -> dict:
        return {"dim_full": self.full.dim, "dim_generated": None if self.generated is None else self.generated.dim,
                "scalars": str(self.full.scalars), "equal": self.equal}


def _same_space(A: LieAlgebra, B: LieAlgebra) -> bool:
    F = A.scalars
    return Subspace(F, A._flat.shape[-1], A._flat) == Subspace(F, B._flat.shape[-1], B._flat)


def _form_algebras(h: SesquiForm, kind: str, bound: int | None) -> FormAlgebras:
    K = h.field
    F, mats = _solution_algebra(h, traceless=True)
    if mats.shape[1] == 0:
        raise ValueError("solution space is zero")
    family = isotropic_family(h, bound) if K.is_finite else None
    name = f"{kind}({h.n},{K})"
    full = LieAlgebra(K, h.n, mats, F, family=family, name=name)
    try:
        iso = isotropic_points(h, bound)
    except Exception:  # pragma: no cover - bound exceeded
        iso = K.zeros((0, h.n))
    gens = [h.element(iso[:, i]) for i in range(iso.shape[1])]
    if not K.is_finite:
        span = isotropic_span(h, bound)
        gens = [h.element(r) for r in span.rows() if K.s_is_zero(h.value(r, r))] or gens
    generated = generate(K, h.n, gens, F, family=family, name=name + "-gen") if gens else None
    equal = generated is not None and _same_space(full, generated)
    return FormAlgebras(h, full, generated, equal)


def build_unitary(h: SesquiForm, bound: int | None = None) -> FormAlgebras:
    """``fsu(V,h)`` by linear conditions over the fixed field, and the algebra of the ``v (x) h(v,.)``, ``h(v,v)=0``."""
    if h.tau == IDENTITY:
        return build_symplectic(h, bound)
    return _form_algebras(h, "su", bound)


def build_symplectic(f: SesquiForm, bound: int | None = None) -> FormAlgebras:
    if not f.is_alternating:
        raise ValueError("build_symplectic needs an alternating form")
    return _form_algebras(f, "sp", bound)


def unitary_dimension_full(h: SesquiForm) -> int:
    """``dim u(V,h)`` (no trace condition)."""
    return _solution_algebra(h, traceless=False)[1].shape[1]


@dataclass
class SpanningCertificate:
    basis: np.ndarray                # diagonalising basis v_1..v_n (rows)
    elements: list[LieElement]
    rank: int
    u_dim: int
    spans: bool
    mu: tuple


def diagonal_basis(h: SesquiForm) -> np.ndarray:
    """Orthogonal basis of anisotropic vectors (Gram-Schmidt pivoting on anisotropic vectors)."""
    K = h.field
    basis = []
    W = Subspace.full(K, h.n)
    while W.dim:
        cand = _polarization_vectors_in(h, W)
        d = h.diag_values(cand)
        nz = np.nonzero(~K.is_zero(d))[0]
        if len(nz) == 0:
            raise DegenerateFormError("no anisotropic vector in a non-degenerate subspace")
        v = cand[:, int(nz[0])]
        basis.append(v)
        # W <- W intersect v^perp
        coeff = h.values(v[:, None], W.basis)                      # (k, 1, dimW)
        ker = kernel(K, coeff)
        W = Subspace(K, h.n, K.einsum("ij,jn->in", ker, W.basis)) if ker.shape[1] else Subspace(K, h.n)
    return np.stack(basis, axis=1)


def _polarization_vectors_in(h: SesquiForm, W: Subspace) -> np.ndarray:
    K = h.field
    rows = W.rows()
    vecs = list(rows)
    mults = [K.one] + ([K.gen] if K.degree == 2 else [])
    for i, j in itertools.combinations(range(len(rows)), 2):
        for mu in mults:
            vecs.append(K.add(rows[i], K.smul(mu, rows[j])))
    return np.stack(vecs, axis=1)


def spanning_reflection_basis(h: SesquiForm, mu=None) -> SpanningCertificate:
    """The ``n^2`` elements ``v_i (x) h(v_i,.)``, ``(v_j+v_l) (x) ...``, ``(v_j + mu v_l) (x) ...``.

    Certifies their rank over the fixed field against ``dim u(V,h) = n^2``.
    Passing ``mu`` with ``mu^sigma = mu`` gives the dependent negative control.
    """
    K = h.field
    if h.tau != SIGMA:
        raise ValueError("needs a skew-Hermitian form")
    mu = K.gen if mu is None else K.scalar(mu)
    B = diagonal_basis(h)
    n = h.n
    vecs = [B[:, i] for i in range(n)]
    for j, l in itertools.combinations(range(n), 2):
        vecs.append(K.add(B[:, j], B[:, l]))
    for j, l in itertools.combinations(range(n), 2):
        vecs.append(K.add(B[:, j], K.smul(mu, B[:, l])))
    elements = [h.element(v) for v in vecs]
    F = K.base
    mats = np.stack([e.matrix for e in elements], axis=1)
    r = rank(F, flatten_over(K, F, mats))
    u_dim = unitary_dimension_full(h)
    _, umats = _solution_algebra(h, traceless=False)
    inside = Subspace(F, 2 * n * n, flatten_over(K, F, umats))
    in_u = all(inside.contains(flatten_over(K, F, e.matrix)) for e in elements)
    return SpanningCertificate(B, elements, r, u_dim, in_u and r == u_dim == n * n, mu)


# -- semilinear involutions and polarities ------------------------------------------------

class SemilinearInvolution:
    """``theta(X) = -G^{-1} X^{sigma T} G`` on ``sl(V)``; its fixed points form ``u(V,h)``."""

    def __init__(self, field: Field, gram: np.ndarray):
        self.field = field
        self.gram = field.asarray(gram)
        self.gram_inv = inverse(field, self.gram)

    def __call__(self, mats: np.ndarray) -> np.ndarray:
        K = self.field
        t = K.conj_transpose(mats)
        t = K.einsum("ab,...bc->...ac", self.gram_inv, t)
        return K.neg(K.einsum("...ab,bc->...ac", t, self.gram))


def induced_permutation(G: GeometryGraph, A: LieAlgebra, action: Callable[[np.ndarray], np.ndarray]) -> list[int]:
    """Permutation of the points of ``G`` (built from ``A``) induced by a map on matrices."""
    if G.points is None:
        raise ValueError("geometry carries no algebra elements")
    F = A.scalars
    index = {p.key: i for i, p in enumerate(G.points)}
    mats = np.stack([p.element.matrix for p in G.points], axis=1)
    X = normalize_rows(F, A.coords_of_matrices(action(mats)))
    out = []
    for i in range(X.shape[1]):
        k = point_key(F, X[:, i])
        if k not in index:
            raise PolarityError("the action does not preserve the extremal points")
        out.append(index[k])
    return out


def fixed_subalgebra(A: LieAlgebra, action: Callable[[np.ndarray], np.ndarray], name: str = "") -> LieAlgebra:
    """``{x in A : action(x) = x}`` over the fixed field, for a semilinear ``action``."""
    K = A.field
    if A.scalars != K or K.degree != 2:
        raise ValueError("needs an algebra over a quadratic field")
    F = K.base
    t = A.field.gen
    scaled = np.concatenate([A.mats, K.smul(t, A.mats)], axis=1)     # F-basis of A
    diff = K.sub(action(scaled), scaled)
    rows = flatten_over(K, F, diff)                                   # (1, 2d, N)
    ker = kernel(F, np.swapaxes(rows, 1, 2))
    mats = K.einsum("rm,mab->rab", K.embed(ker), scaled) if ker.shape[1] else K.zeros((0, A.n, A.n))
    return LieAlgebra(K, A.n, mats, F, name=name or f"fix({A.name})")


@dataclass
class PolaritySpec:
    """Point -> hyperplane table extracted from the clique swap, plus the element-level action if known."""

    field: Field
    n: int
    points: np.ndarray               # (k, m, n) canonical point vectors
    hyperplanes: np.ndarray          # (k, m, n) canonical functionals
    absolute: list[int]              # indices of points with p in p^sigma
    element_action: Callable[[np.ndarray], np.ndarray] | None = None

    def to_json(self) -> dict:
        K = self.field
        return {"field": str(K), "n": self.n,
                "table": [{"point": K.format_array(self.points[:, i]),
                           "hyperplane": K.format_array(self.hyperplanes[:, i])}
                          for i in range(self.points.shape[1])],
                "absolute_points": len(self.absolute)}


def _check_automorphism(G: GeometryGraph, perm: list[int]) -> None:
    P = G.num_points
    if sorted(perm) != list(range(P)):
        raise PolarityError("action is not a permutation of the points")
    if any(perm[perm[i]] != i for i in range(P)):
        raise PolarityError("action is not an involution")
    lines = set(G.lines)
    for l in G.lines:
        img = tuple(sorted(perm[i] for i in l))
        if img not in lines:
            raise PolarityError("action does not map lines to lines")
        if img == l:
            raise PolarityError("action fixes a line")
    if not any(perm[i] == i for i in range(P)):
        raise PolarityError("action fixes no point")


def extract_polarity(G: GeometryGraph, perm: list[int],
                     element_action: Callable[[np.ndarray], np.ndarray] | None = None) -> PolaritySpec:
    """Read the quasi-polarity ``p -> H`` with ``H_bar = p_bar^sigma`` off the clique structure."""
    _check_automorphism(G, perm)
    if any(l is None for l in G.labels):
        raise PolarityError("points need flag labels")
    part = classify_partition(maximal_cliques(G), G)
    if part.names != ("P_bar", "H_bar"):
        raise PolarityError("could not identify the point and hyperplane cliques")
    hyper_cliques = {c.members: c for c in part.parts[1]}
    point_cliques = {c.members: c for c in part.parts[0]}
    K = G.field
    pts, hyps, images = [], [], {}
    for c in part.parts[0]:
        img = frozenset(perm[i] for i in c.members)
        if img not in hyper_cliques:
            raise PolarityError("image of a point clique is not a hyperplane clique")
        lab_p = G.labels[next(iter(c.members))]
        lab_h = G.labels[next(iter(img))]
        pts.append(lab_p.v)
        hyps.append(lab_h.phi)
        images[c.members] = img
    for c in part.parts[1]:
        if frozenset(perm[i] for i in c.members) not in point_cliques:
            raise PolarityError("image of a hyperplane clique is not a point clique")
    # quasi-polarity: p in q^sigma iff q in p^sigma
    plist = list(images)
    for a in plist:
        for b in plist:
            if bool(a & images[b]) != bool(images[a] & b):
                raise PolarityError("induced map is not a quasi-polarity")
    P = np.stack(pts, axis=1)
    H = np.stack(hyps, axis=1)
    absolute = [i for i in range(P.shape[1]) if K.s_is_zero(K.get(K.einsum("ia,ia->i", H, P), i))]
    return PolaritySpec(K, P.shape[-1], P, H, absolute, element_action)


@dataclass
class RealizedForm:
    form: SesquiForm
    raw_gram: np.ndarray
    raw_eps: tuple
    tau: str
    scale: tuple | None
    checks: dict = dc_field(default_factory=dict)

    def report(self) -> dict:
        K = self.form.field
        return {"tau": "frobenius" if self.tau == SIGMA and K.is_finite else
                ("conjugation" if self.tau == SIGMA else "identity"),
                "epsilon": "-1" if self.form.eps == K.scalar(-1) else K.format_scalar(self.form.eps),
                "raw_epsilon": K.format_scalar(self.raw_eps),
                "scale": None if self.scale is None else K.format_scalar(self.scale),
                "gram": K.format_array(self.form.gram), "checks": self.checks}


def _gram_for(P: PolaritySpec, tau: str) -> np.ndarray | None:
    K = P.field
    n = P.n
    tw = K.sigma(P.points) if tau == SIGMA else P.points
    rows = []
    for i in range(P.points.shape[1]):
        ker = kernel(K, P.hyperplanes[:, i][:, None])              # vectors of H_i
        # (v^tau)^T G w = sum_{a,b} v_a^tau w_b G_ab
        rows.append(K.mul(tw[:, i][:, None, :, None], ker[:, :, None, :]).reshape(K.degree, -1, n * n))
    M = np.concatenate(rows, axis=1)
    sol = kernel(K, M)
    if sol.shape[1] == 0:
        return None
    if sol.shape[1] > 1:
        raise PolarityError("Gram matrix is not determined up to a scalar")
    return sol[:, 0].reshape(K.degree, n, n)


def _proportionality(K: Field, A: np.ndarray, B: np.ndarray) -> tuple | None:
    """``c`` with ``A = c B`` or ``None``."""
    nz = np.argwhere(~K.is_zero(B))
    if len(nz) == 0:
        return None
    idx = tuple(int(t) for t in nz[0])
    c = K.s_div(K.get(A, idx), K.get(B, idx))
    return c if K.equal(A, K.smul(c, B)) else None


def proportional(K: Field, A: np.ndarray, B: np.ndarray) -> bool:
    return _proportionality(K, A, B) is not None


def realize_form(P: PolaritySpec, v0: np.ndarray | None = None) -> RealizedForm:
    """Sesquilinear form realising the quasi-polarity, scaled so that ``v0 (x) h(v0,.)`` is fixed.

    ``tau`` is tried as ``sigma`` then the identity; ``eps`` is read off
    ``G = eps G^{tau T}``.  With the element action available, the scaled form
    is checked against the exp-stability computation and the description of
    the fixed extremal elements.
    """
    K = P.field
    found = None
    for tau in (SIGMA, IDENTITY):
        G = _gram_for(P, tau)
        if G is not None:
            found = (tau, G)
            break
    if found is None:
        raise PolarityError("no sesquilinear form realises the map")
    tau, G = found
    twist = K.sigma if tau == SIGMA else (lambda a: a)
    eps = _proportionality(K, G, twist(K.transpose(G)))
    if eps is None:
        raise PolarityError("recovered form is not reflexive")
    if v0 is None:
        if not P.absolute:
            raise PolarityError("no absolute point to scale at")
        v0 = P.points[:, P.absolute[0]]
    v0 = K.asarray(v0)
    raw = SesquiForm(K, G, eps, tau)
    if not K.s_is_zero(raw.value(v0, v0)):
        raise PolarityError("v0 is not isotropic")
    checks: dict = {}
    scale = None
    form = raw
    theta = P.element_action
    if theta is not None:
        Y0 = raw.element(v0).matrix
        kappa = _proportionality(K, theta(Y0), Y0)
        if kappa is None:
            raise PolarityError("v0 (x) h(v0,.) is not mapped into its own point")
        for mu in (K.one, K.gen):
            c = K.s_add(mu, K.s_mul(kappa, K.s_sigma(mu)))
            if not K.s_is_zero(c):
                break
        scale = c
        form = raw.scaled(c)
        checks.update(_lemma_checks(P, form, v0, theta))
    checks["eps_is_minus_one"] = form.eps == K.scalar(-1)
    checks["tau_is_sigma"] = tau == SIGMA
    return RealizedForm(form, G, eps, tau, scale, checks)


def _lemma_checks(P: PolaritySpec, h: SesquiForm, v0: np.ndarray, theta) -> dict:
    K = h.field
    x = h.element(v0)
    out = {"v0_element_fixed": K.equal(theta(x.matrix), x.matrix)}
    # exp-stability: exp(x, 1)(w (x) h(w,.)) = u (x) h(u,.) with u = w + h(v0,w) v0
    pts = P.points
    iso = [i for i in P.absolute]
    ws = [pts[:, i] for i in iso if not K.s_is_zero(h.value(v0, pts[:, i]))]
    exp_ok = bool(ws)
    for w in ws[:8]:
        y = h.element(w)
        z = exp_conjugation(x, 1, y)
        u = K.add(w, K.smul(h.value(v0, w), v0))
        exp_ok &= K.equal(z.matrix, h.element(u).matrix) and K.equal(theta(z.matrix), z.matrix)
    out["exp_stable"] = exp_ok
    # fixed extremal points are exactly the isotropic points, each v (x) h(v,.) fixed on the nose
    iso_keys = {_key(K, normalize_rows(K, pts[:, i][:, None])[:, 0])
                for i in range(pts.shape[1]) if K.s_is_zero(h.value(pts[:, i], pts[:, i]))}
    abs_keys = {_key(K, pts[:, i]) for i in P.absolute}
    mats = np.stack([h.element(pts[:, i]).matrix for i in P.absolute], axis=1) if P.absolute else None
    fixed = mats is not None and K.equal(theta(mats), mats)
    out["fixed_points_are_isotropic"] = iso_keys == abs_keys and fixed
    out["not_symplectic"] = len(abs_keys) < pts.shape[1]
    return out
