"""Lie algebras of finitary matrices generated by infinitesimal transvections.

A :class:`LieAlgebra` stores a basis of ``n x n`` matrices over a matrix field
``K`` that spans an algebra over a scalar field ``F`` (either ``K`` itself or
the fixed field of its involution, as for unitary algebras).  Everything that
only depends on the abstract algebra (extremality, Premet identities, ideals,
the center) is computed in basis coordinates through the structure constants,
so the same code runs on algebras whose structure constants were altered on
purpose.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .fields import Field, FieldScalar, parse_field
from .linalg import (DimensionError, Subspace, _key, inverse, normalize_rows, pair, rref,
                     solve)

DEFAULT_ENUM_CAP = 2 ** 24
ENUM_CAP_ENV = "EXTREMAL_ENUM_CAP"


def enumeration_cap() -> int:
    value = os.environ.get(ENUM_CAP_ENV)
    return int(value) if value else DEFAULT_ENUM_CAP


class NotExtremalError(ValueError):
    pass


class EnumerationBoundError(RuntimeError):
    pass


class Extremality(str, enum.Enum):
    PURE = "pure_extremal"
    SANDWICH = "sandwich"
    NOT_EXTREMAL = "not_extremal"


def flatten_over(field: Field, scalars: Field, mats: np.ndarray) -> np.ndarray:
    """Write ``(k, ..., n, n)`` matrices over ``field`` as coordinate vectors over ``scalars``.

    When ``scalars`` is the fixed field the coordinate order is (basis of
    ``field`` over ``scalars``, row, column).
    """
    n = mats.shape[-1]
    if scalars == field:
        return mats.reshape(*mats.shape[:-2], n * n)
    moved = np.moveaxis(mats, 0, -3)
    return moved.reshape(*moved.shape[:-3], field.degree * n * n)[None]


def unflatten_over(field: Field, scalars: Field, vecs: np.ndarray, n: int) -> np.ndarray:
    if scalars == field:
        return vecs.reshape(*vecs.shape[:-1], n, n)
    arr = vecs[0].reshape(*vecs.shape[1:-1], field.degree, n, n)
    return np.moveaxis(arr, -3, 0)


class LieElement:
    """An ``n x n`` matrix over a field, optionally with a rank-one decomposition ``sum v_i (x) phi_i``."""

    __slots__ = ("field", "matrix", "decomposition")

    def __init__(self, field: Field, matrix: np.ndarray,
                 decomposition: Sequence[tuple[np.ndarray, np.ndarray]] | None = None):
        if matrix.ndim != 3 or matrix.shape[1] != matrix.shape[2] or matrix.shape[0] != field.degree:
            raise DimensionError(f"expected a square matrix array, got shape {matrix.shape}")
        self.field = field
        self.matrix = matrix
        self.decomposition = None if decomposition is None else [tuple(t) for t in decomposition]

    @classmethod
    def from_terms(cls, field: Field, terms: Sequence[tuple[np.ndarray, np.ndarray]]) -> "LieElement":
        terms = [(field.asarray(v), field.asarray(phi)) for v, phi in terms]
        if not terms:
            raise ValueError("at least one rank-one term is needed")
        return cls(field, expand(field, terms), terms)

    @classmethod
    def zero(cls, field: Field, n: int) -> "LieElement":
        return cls(field, field.zeros((n, n)), [])

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def is_zero(self) -> bool:
        return self.field.all_zero(self.matrix)

    def trace(self) -> tuple:
        return self.field.get(self.field.sum(np.diagonal(self.matrix, axis1=1, axis2=2), -1), ())

    def expand(self) -> np.ndarray:
        if self.decomposition is None:
            raise ValueError("element carries no rank-one decomposition")
        if not self.decomposition:
            return self.field.zeros((self.n, self.n))
        return expand(self.field, self.decomposition)

    def __add__(self, other: "LieElement") -> "LieElement":
        _check_pair(self, other)
        dec = None
        if self.decomposition is not None and other.decomposition is not None:
            dec = self.decomposition + other.decomposition
        return LieElement(self.field, self.field.add(self.matrix, other.matrix), dec)

    def __neg__(self) -> "LieElement":
        dec = None if self.decomposition is None else \
            [(self.field.neg(v), phi) for v, phi in self.decomposition]
        return LieElement(self.field, self.field.neg(self.matrix), dec)

    def __sub__(self, other: "LieElement") -> "LieElement":
        return self + (-other)

    def scale(self, c) -> "LieElement":
        dec = None if self.decomposition is None else \
            [(self.field.smul(c, v), phi) for v, phi in self.decomposition]
        return LieElement(self.field, self.field.smul(c, self.matrix), dec)

    def __rmul__(self, c) -> "LieElement":
        return self.scale(c)

    def bracket(self, other: "LieElement") -> "LieElement":
        return bracket(self, other)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.field.einsum("ij,j->i", self.matrix, v)

    def __eq__(self, other):
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.field == other.field and self.field.equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.field, _key(self.field, self.matrix)))

    def __repr__(self):
        return f"LieElement({self.field}, {self.field.format_array(self.matrix)})"

    def to_json(self) -> dict:
        out = {"field": str(self.field), "matrix": self.field.format_array(self.matrix)}
        if self.decomposition is not None:
            out["decomposition"] = [[self.field.format_array(v), self.field.format_array(phi)]
                                    for v, phi in self.decomposition]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LieElement":
        field = parse_field(data["field"])
        dec = data.get("decomposition")
        if dec is not None:
            dec = [(field.asarray(v), field.asarray(phi)) for v, phi in dec]
        el = cls(field, field.asarray(data["matrix"]), dec)
        if dec and not field.equal(el.expand(), el.matrix):
            raise ValueError("decomposition does not expand to the stored matrix")
        return el


def _check_pair(a: LieElement, b: LieElement) -> None:
    if a.field != b.field or a.n != b.n:
        raise DimensionError("elements live in different algebras")


def outer(field: Field, v: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """The matrix of ``w -> phi(w) v``."""
    return field.mul(v[:, :, None], phi[:, None, :])


def expand(field: Field, terms) -> np.ndarray:
    out = None
    for v, phi in terms:
        m = outer(field, v, phi)
        out = m if out is None else field.add(out, m)
    return out


def bracket(a: LieElement, b: LieElement) -> LieElement:
    """``ab - ba``; rank-one decompositions are propagated term by term."""
    _check_pair(a, b)
    f = a.field
    m = f.sub(f.matmul(a.matrix, b.matrix), f.matmul(b.matrix, a.matrix))
    dec = None
    if a.decomposition is not None and b.decomposition is not None:
        dec = []
        for v, phi in a.decomposition:
            for w, psi in b.decomposition:
                c1 = pair(f, phi, w)
                c2 = pair(f, psi, v)
                if not f.s_is_zero(c1):
                    dec.append((f.smul(c1, v), psi))
                if not f.s_is_zero(c2):
                    dec.append((f.smul(f.s_neg(c2), w), phi))
    return LieElement(f, m, dec)


@dataclass(frozen=True, eq=False)
class TransvectionSpec:
    """Data ``(v, phi)`` with ``phi(v) = 0`` describing ``t_{v,phi}: w -> phi(w) v``."""

    field: Field
    v: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        f = self.field
        object.__setattr__(self, "v", f.asarray(self.v))
        object.__setattr__(self, "phi", f.asarray(self.phi))
        if self.v.shape != self.phi.shape:
            raise DimensionError("vector and functional lengths differ")
        if f.all_zero(self.v) or f.all_zero(self.phi):
            raise ValueError("transvection data must be nonzero")
        if not f.s_is_zero(pair(f, self.phi, self.v)):
            raise ValueError("phi(v) != 0: this is a reflection, not a transvection")

    @property
    def n(self) -> int:
        return self.v.shape[-1]

    def element(self) -> LieElement:
        return LieElement(self.field, outer(self.field, self.v, self.phi), [(self.v, self.phi)])


def transvection(field: Field, v, phi) -> LieElement:
    return TransvectionSpec(field, v, phi).element()


def as_transvection(x) -> TransvectionSpec | None:
    """The transvection data of ``x`` if it is a single rank-one term with ``phi(v) = 0``."""
    if isinstance(x, TransvectionSpec):
        return x
    if isinstance(x, LieElement) and x.decomposition is not None and len(x.decomposition) == 1:
        v, phi = x.decomposition[0]
        try:
            return TransvectionSpec(x.field, v, phi)
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class Flag:
    """Incident point-hyperplane pair ``(<v>, ker phi)`` with canonical representatives."""

    field: Field
    v: np.ndarray = dc_field(compare=False)
    phi: np.ndarray = dc_field(compare=False)
    key: tuple = dc_field(default=None)

    def __post_init__(self):
        v = normalize_rows(self.field, self.v[:, None])[:, 0]
        phi = normalize_rows(self.field, self.phi[:, None])[:, 0]
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "key", (_key(self.field, v), _key(self.field, phi)))

    @property
    def point_key(self):
        return self.key[0]

    @property
    def hyperplane_key(self):
        return self.key[1]

    def to_json(self) -> dict:
        return {"point": self.field.format_array(self.v), "hyperplane": self.field.format_array(self.phi)}


@dataclass(frozen=True, eq=False)
class ExtremalPoint:
    """Projective class of an extremal element, stored by its canonical coordinate vector."""

    coords: np.ndarray
    element: LieElement
    key: tuple
    label: Flag | None = None


PointFamily = Callable[[], Iterable[tuple[Flag | None, LieElement]]]


class LieAlgebra:
    """A finite-dimensional Lie algebra of matrices with a fixed basis.

    ``field`` is the field of matrix entries; ``scalars`` the field the
    algebra is a vector space over.  Construction checks that the basis is
    independent and closed under the bracket.
    """

    def __init__(self, field: Field, n: int, basis: Sequence[LieElement] | np.ndarray,
                 scalars: Field | None = None, generators: Sequence[LieElement] = (),
                 family: PointFamily | None = None, contains_reflections: bool = False,
                 name: str = "", structure: np.ndarray | None = None):
        self.field = field
        self.scalars = scalars or field
        if self.scalars != field and not (field.degree == 2 and self.scalars == field.base):
            raise ValueError(f"{self.scalars} is neither {field} nor its fixed field")
        self.n = n
        if isinstance(basis, np.ndarray):
            self.mats = basis
        else:
            self.mats = np.stack([b.matrix for b in basis], axis=1) if len(basis) else field.zeros((0, n, n))
        self.generators = list(generators)
        self.family = family
        self.contains_reflections = contains_reflections
        self.name = name
        flat = self.flatten(self.mats)
        R, piv = rref(self.scalars, flat)
        if len(piv) != self.dim:
            raise ValueError("basis matrices are linearly dependent")
        self._flat = flat
        self._pivots = piv
        self._pinv = inverse(self.scalars, flat[:, :, piv]) if self.dim else self.scalars.zeros((0, 0))
        if structure is None:
            structure = self._compute_structure()
        self.structure = structure
        for g in self.generators:
            if not self.contains(g):
                raise ValueError("a generator lies outside the span of the basis")

    # -- basics -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    @property
    def basis(self) -> list[LieElement]:
        return [LieElement(self.field, self.mats[:, i]) for i in range(self.dim)]

    def __repr__(self):
        return f"LieAlgebra({self.name or 'anonymous'}, dim={self.dim}, over {self.scalars})"

    def flatten(self, mats: np.ndarray) -> np.ndarray:
        """Matrices ``(k, ..., n, n)`` to scalar-field vectors ``(kF, ..., N)``."""
        return flatten_over(self.field, self.scalars, mats)

    def unflatten(self, vecs: np.ndarray) -> np.ndarray:
        return unflatten_over(self.field, self.scalars, vecs, self.n)

    def coords_of_matrices(self, mats: np.ndarray, check: bool = True) -> np.ndarray:
        """Basis coordinates ``(kF, ..., d)`` of matrices ``(k, ..., n, n)``."""
        F = self.scalars
        flat = self.flatten(mats)
        c = F.einsum("...i,ij->...j", flat[..., self._pivots], self._pinv)
        if check:
            back = F.einsum("...i,ij->...j", c, self._flat)
            if np.any(back != flat):
                raise ValueError("element is not in the algebra")
        return c

    def coords(self, x: LieElement) -> np.ndarray:
        if x.field != self.field or x.n != self.n:
            raise DimensionError("element does not live in this algebra's ambient space")
        return self.coords_of_matrices(x.matrix)

    def contains(self, x: LieElement) -> bool:
        try:
            self.coords(x)
        except ValueError:
            return False
        return True

    def matrices_of(self, coords: np.ndarray) -> np.ndarray:
        F = self.scalars
        flat = F.einsum("...i,ij->...j", coords, self._flat)
        return self.unflatten(flat)

    def element(self, coords: np.ndarray) -> LieElement:
        return LieElement(self.field, self.matrices_of(coords))

    def scalar_to_matrix_field(self, s: tuple) -> tuple:
        if self.scalars == self.field:
            return s
        return self.field.scalar(FieldScalar(self.scalars, self.scalars.scalar(s)))

    def _compute_structure(self) -> np.ndarray:
        K = self.field
        A = self.mats
        prod = K.einsum("iab,jbc->ijac", A, A)
        comm = K.sub(prod, np.swapaxes(prod, 1, 2))
        try:
            return self.coords_of_matrices(comm)
        except ValueError as exc:
            raise ValueError("basis is not closed under the bracket") from exc

    def with_structure(self, structure: np.ndarray, name: str = "") -> "LieAlgebra":
        """Copy sharing the basis but using the given structure constants (for negative controls)."""
        return LieAlgebra(self.field, self.n, self.mats, self.scalars, self.generators, self.family,
                          self.contains_reflections, name or self.name + "*", structure=structure)

    # -- coordinate level operations -------------------------------------
    def bracket_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        F = self.scalars
        t = F.einsum("...i,ijk->...jk", a, self.structure)
        return F.einsum("...jk,...j->...k", t, b)

    def ad(self, a: np.ndarray) -> np.ndarray:
        """Rows ``[a, b_j]`` in coordinates; shape ``(kF, ..., d, d)``."""
        return self.scalars.einsum("...i,ijk->...jk", a, self.structure)

    @cached_property
    def gram(self) -> np.ndarray:
        """Extremal form ``g(b_i, b_j) = -tr(b_i b_j)`` on the basis, over the scalar field."""
        K = self.field
        tr = K.neg(K.einsum("iab,jba->ij", self.mats, self.mats))
        if self.scalars != K:
            tr = K.restrict(tr)
        return tr

    def form(self, a: np.ndarray, b: np.ndarray) -> tuple:
        F = self.scalars
        return F.get(F.einsum("i,i->", F.einsum("i,ij->j", a, self.gram), b), ())

    def identity_check(self, check_jacobi: bool = True) -> bool:
        """Antisymmetry and Jacobi on all basis triples."""
        F = self.scalars
        C = self.structure
        if not F.all_zero(F.add(C, np.swapaxes(C, 1, 2))):
            return False
        if not check_jacobi:
            return True
        # [[b_i,b_j],b_k] summed cyclically
        t = F.einsum("ijl,lkm->ijkm", C, C)
        cyc = F.add(F.add(t, np.transpose(t, (0, 2, 3, 1, 4))), np.transpose(t, (0, 3, 1, 2, 4)))
        return F.all_zero(cyc)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "schema": "extremal.algebra/1",
            "name": self.name,
            "field": str(self.field),
            "scalars": str(self.scalars),
            "n": self.n,
            "contains_reflections": self.contains_reflections,
            "generators": [g.to_json() for g in self.generators],
            "basis": [self.field.format_array(self.mats[:, i]) for i in range(self.dim)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LieAlgebra":
        if data.get("schema") != "extremal.algebra/1":
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        field = parse_field(data["field"])
        scalars = parse_field(data["scalars"])
        basis = [LieElement(field, field.asarray(m)) for m in data["basis"]]
        gens = [LieElement.from_json(g) for g in data.get("generators", [])]
        return cls(field, data["n"], basis, scalars, gens,
                   contains_reflections=data.get("contains_reflections", False), name=data.get("name", ""))


def generate(field: Field, n: int, generators: Sequence[LieElement], scalars: Field | None = None,
             family: PointFamily | None = None, name: str = "", contains_reflections: bool = False,
             max_rounds: int = 64) -> LieAlgebra:
    """The Lie algebra generated by ``generators`` over ``scalars`` (bracket closure of the span)."""
    scalars = scalars or field
    probe = LieAlgebra(field, n, [], scalars)
    mats = np.stack([g.matrix for g in generators], axis=1)
    space = Subspace(scalars, probe.flatten(mats).shape[-1], probe.flatten(mats))
    for _ in range(max_rounds):
        cur = probe.unflatten(space.basis)
        prod = field.einsum("iab,jbc->ijac", cur, cur)
        comm = field.sub(prod, np.swapaxes(prod, 1, 2))
        d = cur.shape[1]
        flat = probe.flatten(comm).reshape(scalars.degree, d * d, -1)
        new = space + Subspace(scalars, space.n, flat)
        if new.dim == space.dim:
            break
        space = new
    else:  # pragma: no cover
        raise RuntimeError("bracket closure did not stabilise")
    return LieAlgebra(field, n, probe.unflatten(space.basis), scalars, generators, family,
                      contains_reflections, name)


# -- standard constructions ---------------------------------------------------

def unit_vector(field: Field, n: int, i: int) -> np.ndarray:
    v = field.zeros(n)
    v[0, i] = field.one[0]
    return v


def all_flags(field: Field, n: int) -> Iterator[Flag]:
    """Incident pairs (point, hyperplane) of PG(n-1, q) with canonical representatives."""
    pts = field.projective_points(n)
    for i in range(pts.shape[1]):
        v = pts[:, i]
        for j in range(pts.shape[1]):
            phi = pts[:, j]
            if field.s_is_zero(pair(field, phi, v)):
                yield Flag(field, v, phi)


def flag_family(field: Field, n: int) -> PointFamily:
    def points():
        for fl in all_flags(field, n):
            yield fl, LieElement(field, outer(field, fl.v, fl.phi), [(fl.v, fl.phi)])
    return points


def sl(n: int, field: Field) -> LieAlgebra:
    """``sl(V) = fsl(V, V*)`` generated by the elementary transvections ``e_i (x) phi_j``."""
    gens = [transvection(field, unit_vector(field, n, i), unit_vector(field, n, j))
            for i in range(n) for j in range(n) if i != j]
    return generate(field, n, gens, family=flag_family(field, n) if field.is_finite else None,
                    name=f"sl({n},{field})")


def fsl(field: Field, n: int, Pi: Subspace | None = None) -> LieAlgebra:
    """``fsl(V, Pi)``; in finite dimension ``ann_V(Pi) = 0`` forces ``Pi = V*``."""
    if Pi is not None:
        if Pi.n != n:
            raise DimensionError("Pi lives in the wrong dual space")
        if Pi.dim != n:
            raise ValueError("ann_V(Pi) is nonzero: degenerate Pi")
    return sl(n, field)


def fgl(field: Field, n: int) -> LieAlgebra:
    """Generated by transvections and reflections ``e_i (x) phi_j``: all of ``gl(V)``."""
    gens = [LieElement.from_terms(field, [(unit_vector(field, n, i), unit_vector(field, n, j))])
            for i in range(n) for j in range(n)]
    return generate(field, n, gens, name=f"gl({n},{field})", contains_reflections=True)


# -- extremality ---------------------------------------------------------------

@dataclass
class IdentityResiduals:
    """Pass flags for [x,[x,y]] = 2 g_x(y) x and the two Premet identities, with first witnesses."""

    eq1: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    witnesses: dict

    @property
    def ok(self) -> np.ndarray:
        return self.eq1 & self.p1 & self.p2


def _identity_terms(A: LieAlgebra, X: np.ndarray):
    F = A.scalars
    C = A.structure
    M = A.ad(X)                                        # [x, b_j]
    D = F.einsum("...ja,...ak->...jk", M, M)           # [x,[x,b_j]]
    T = F.einsum("...ia,abk->...ibk", M, C)
    P1L = F.einsum("...ibk,...jb->...ijk", T, M)       # [[x,b_i],[x,b_j]]
    W = F.einsum("...ja,iak->...ijk", M, C)            # [b_i,[x,b_j]]
    P2L = F.einsum("...ija,...ak->...ijk", W, M)       # [x,[b_i,[x,b_j]]]
    return M, D, P1L, P2L


def verify_identities(A: LieAlgebra, X: np.ndarray, G: np.ndarray, chunk: int = 256) -> IdentityResiduals:
    """Check ``[x,[x,y]] = 2 g_x(y) x`` and (P1), (P2) for all basis pairs.

    ``X`` holds element coordinates ``(kF, m, d)``, ``G`` the values of each
    ``g_x`` on the basis ``(kF, m, d)``.
    """
    F = A.scalars
    C = A.structure
    two = F.scalar(2)
    m = X.shape[1]
    e1 = np.ones(m, bool)
    p1 = np.ones(m, bool)
    p2 = np.ones(m, bool)
    witnesses: dict = {}
    for s in range(0, m, chunk):
        Xc, Gc = X[:, s:s + chunk], G[:, s:s + chunk]
        M, D, P1L, P2L = _identity_terms(A, Xc)
        # 2 g_x(b_j) x
        rhs1 = F.smul(two, F.mul(Gc[..., :, None], Xc[..., None, :]))
        gyz = F.einsum("ijl,...l->...ij", C, Gc)                     # g_x([b_i,b_j])
        gx = F.mul(gyz[..., None], Xc[..., None, None, :])
        gz_xy = F.mul(Gc[..., None, :, None], M[..., :, None, :])   # g_x(b_j) [x,b_i]
        gy_xz = F.mul(Gc[..., :, None, None], M[..., None, :, :])   # g_x(b_i) [x,b_j]
        rhs_p1 = F.sub(F.add(gx, gz_xy), gy_xz)
        rhs_p2 = F.sub(F.sub(gx, gz_xy), gy_xz)
        for flags, lhs, rhs, name in ((e1, D, rhs1, "eq1"), (p1, P1L, rhs_p1, "P1"),
                                      (p2, P2L, rhs_p2, "P2")):
            bad = np.any((lhs != rhs).reshape(lhs.shape[0], lhs.shape[1], -1), axis=(0, 2))
            flags[s:s + chunk] &= ~bad
            if bad.any() and name not in witnesses:
                b = int(np.argmax(bad))
                diff = np.any(lhs[:, b] != rhs[:, b], axis=0)
                where = tuple(int(t) for t in np.argwhere(diff)[0])
                witnesses[name] = {"element": s + b, "basis_indices": where[:-1]}
    return IdentityResiduals(e1, p1, p2, witnesses)


def transvection_functional(A: LieAlgebra, t: TransvectionSpec) -> np.ndarray:
    """Closed form ``g_t(b_j) = -phi(b_j v)`` on the basis, over the scalar field."""
    K = A.field
    bv = K.einsum("jab,b->ja", A.mats, t.v)
    vals = K.neg(K.einsum("ja,a->j", bv, t.phi))
    return K.restrict(vals) if A.scalars != K else vals


def extremal_functional(x: LieElement | np.ndarray, A: LieAlgebra) -> tuple[Extremality, np.ndarray | None]:
    """Classify ``x`` and return a functional ``g_x`` (basis values) when it is extremal.

    ``g_x`` is found by solving the defining identity together with both Premet identities
    as one linear system, so characteristic 2 needs no special casing.
    """
    F = A.scalars
    X = A.coords(x) if isinstance(x, LieElement) else x
    if F.all_zero(X):
        raise ValueError("x = 0 is never extremal")
    d = A.dim
    C = A.structure
    M, D, P1L, P2L = _identity_terms(A, X)
    if F.all_zero(D) and F.all_zero(P1L) and F.all_zero(P2L):
        return Extremality.SANDWICH, F.zeros(d)
    eye = F.identity(d)
    two = F.scalar(2)
    # unknown g_l; rows indexed by (j, m) and (i, j, m)
    c1 = F.smul(two, F.mul(eye[..., :, None, :], X[..., None, :, None]))       # (j, m, l)
    cx = F.mul(C[..., None, :], X[..., None, None, :, None])                   # (i, j, m, l)
    dj = F.mul(eye[..., None, :, None, :], M[..., :, None, :, None])           # d_lj M[i,m]
    di = F.mul(eye[..., :, None, None, :], M[..., None, :, :, None])           # d_li M[j,m]
    cP1 = F.sub(F.add(cx, dj), di)
    cP2 = F.sub(F.sub(cx, dj), di)
    k = F.degree
    coef = np.concatenate([c1.reshape(k, -1, d), cP1.reshape(k, -1, d), cP2.reshape(k, -1, d)], axis=1)
    rhs = np.concatenate([D.reshape(k, -1), P1L.reshape(k, -1), P2L.reshape(k, -1)], axis=1)
    live = ~(F.is_zero(coef).all(axis=-1) & F.is_zero(rhs))
    coef, rhs = coef[:, live], rhs[:, live]
    if np.any(F.is_zero(coef).all(axis=-1)):
        return Extremality.NOT_EXTREMAL, None
    g = solve(F, coef, rhs)
    if g is None:
        return Extremality.NOT_EXTREMAL, None
    return Extremality.PURE, g


def is_extremal(x: LieElement | np.ndarray, A: LieAlgebra) -> Extremality:
    return extremal_functional(x, A)[0]


def extremal_form(x, y: LieElement, A: LieAlgebra | None = None) -> FieldScalar:
    """The extremal form ``g(x, y)``.

    For a transvection ``t_{v,phi}`` this is ``-phi(y(v))`` in every
    characteristic; other extremal ``x`` need the ambient algebra.
    """
    t = as_transvection(x)
    if t is not None:
        K = t.field
        val = K.s_neg(pair(K, t.phi, y.apply(t.v)))
        if A is not None and A.scalars != K:
            if not K.s_in_base(val):
                raise ValueError("form value outside the scalar field")
            return FieldScalar(A.scalars, A.scalars.scalar(val[0]))
        return FieldScalar(K, val)
    if A is None:
        raise NotExtremalError("non-transvection arguments need the ambient algebra")
    X = A.coords(x)
    if is_extremal(X, A) == Extremality.NOT_EXTREMAL:
        raise NotExtremalError("x is not extremal")
    return FieldScalar(A.scalars, A.form(X, A.coords(y)))


def exp_map(x, lam, y: LieElement, A: LieAlgebra | None = None) -> LieElement:
    """``exp(x, lam) y = y + lam [x,y] + lam^2 g(x,y) x`` for pure extremal ``x``."""
    xe = x.element() if isinstance(x, TransvectionSpec) else x
    if as_transvection(x) is None:
        if A is None:
            raise NotExtremalError("non-transvection x needs the ambient algebra")
        if is_extremal(xe, A) != Extremality.PURE:
            raise NotExtremalError("exp needs a pure extremal element")
    K = xe.field
    scal = A.scalars if A is not None else K
    lam_s = scal.scalar(lam)
    lam_k = A.scalar_to_matrix_field(lam_s) if A is not None else lam_s
    g = extremal_form(x, y, A)
    g_k = A.scalar_to_matrix_field(g.coords) if A is not None else g.coords
    lx = bracket(xe, y)
    out = K.add(y.matrix, K.smul(lam_k, lx.matrix))
    out = K.add(out, K.smul(K.s_mul(K.s_mul(lam_k, lam_k), g_k), xe.matrix))
    return LieElement(K, out)


def exp_conjugation(x: LieElement, lam, y: LieElement) -> LieElement:
    """``(I + lam X) Y (I - lam X)``; equals ``exp(x, lam) y`` when ``X^2 = 0``."""
    K = x.field
    lam = K.scalar(lam)
    I = K.identity(x.n)
    up = K.add(I, K.smul(lam, x.matrix))
    down = K.sub(I, K.smul(lam, x.matrix))
    return LieElement(K, K.matmul(K.matmul(up, y.matrix), down))


# -- pair classification ---------------------------------------------------------

def classify_pair(x: LieElement, y: LieElement, A: LieAlgebra) -> str:
    """Case ``'a'``..``'e'`` of the pair proposition for pure extremal ``x, y``."""
    F = A.scalars
    X, Y = A.coords(x), A.coords(y)
    for z in (X, Y):
        if extremal_functional(z, A)[0] != Extremality.PURE:
            raise NotExtremalError("classify_pair needs pure extremal inputs")
    if Subspace(F, A.dim, np.stack([X, Y], axis=1)).dim == 1:
        return "a"
    Z = A.bracket_coords(X, Y)
    if F.all_zero(Z):
        return "b" if is_extremal(F.add(X, Y), A) != Extremality.NOT_EXTREMAL else "c"
    if not F.s_is_zero(A.form(X, Y)):
        return "e"
    if is_extremal(Z, A) != Extremality.NOT_EXTREMAL:
        return "d"
    raise ValueError("pair fits none of the cases (a)-(e)")  # pragma: no cover


def classify_transvection_pair(s: TransvectionSpec, t: TransvectionSpec) -> str:
    """Closed-form case for two transvections, from incidences only.

    ``[v(x)phi, w(x)psi] = phi(w) v(x)psi - psi(v) w(x)phi`` and
    ``g = -psi(v) phi(w)`` decide everything.
    """
    K = s.field
    fl_s, fl_t = Flag(K, s.v, s.phi), Flag(K, t.v, t.phi)
    if fl_s.key == fl_t.key:
        return "a"
    a = not K.s_is_zero(pair(K, s.phi, t.v))
    b = not K.s_is_zero(pair(K, t.phi, s.v))
    if a and b:
        return "e"
    if a or b:
        return "d"
    same_point = fl_s.point_key == fl_t.point_key
    same_hyp = fl_s.hyperplane_key == fl_t.hyperplane_key
    return "b" if (same_point or same_hyp) else "c"


# -- enumeration of extremal points ---------------------------------------------------

def canonical(F: Field, X: np.ndarray) -> np.ndarray:
    return normalize_rows(F, X)


def _projective_chunks(F: Field, d: int, chunk: int) -> Iterator[np.ndarray]:
    q = F.order
    one = F.scalar(1)
    for lead in range(d):
        tail = d - lead - 1
        total = q ** tail
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            out = F.zeros((len(idx), d))
            for c, val in enumerate(one):
                out[c, :, lead] = val
            for j in range(tail):
                digit = (idx // q ** (tail - 1 - j)) % q
                out[:, :, lead + 1 + j] = F.from_index(digit)
            yield out


def _double_bracket_filter(A: LieAlgebra, X: np.ndarray) -> np.ndarray:
    """Mask of canonical ``x`` with ``[x,[x,b_j]]`` in ``F x`` for every basis vector."""
    F = A.scalars
    M = A.ad(X)
    D = F.einsum("...ja,...ak->...jk", M, M)
    lead = np.argmax(~F.is_zero(X), axis=-1)
    lam = np.take_along_axis(D, lead[None, :, None, None], axis=-1)  # x[lead] == 1
    resid = F.sub(D, F.mul(lam, X[:, :, None, :]))
    return F.is_zero(resid).all(axis=(-1, -2))


def point_key(F: Field, x: np.ndarray) -> tuple:
    return _key(F, x)


def enumerate_extremal(A: LieAlgebra, mode: str = "parametric", bound: int | None = None,
                       include_sandwiches: bool = False) -> list[ExtremalPoint]:
    """Extremal points of ``A`` by brute scan of the span or from the construction's family."""
    F = A.scalars
    if mode == "brute":
        if not F.is_finite:
            raise EnumerationBoundError("brute enumeration needs a finite scalar field")
        bound = enumeration_cap() if bound is None else bound
        if F.order ** A.dim > bound:
            raise EnumerationBoundError(f"|F|^dim = {F.order}^{A.dim} exceeds the bound {bound}")
        out = []
        for X in _projective_chunks(F, A.dim, 4096):
            mask = _double_bracket_filter(A, X)
            for i in np.nonzero(mask)[0]:
                x = X[:, i]
                status = is_extremal(x, A)
                if status == Extremality.PURE or (include_sandwiches and status == Extremality.SANDWICH):
                    out.append(ExtremalPoint(x, A.element(x), point_key(F, x)))
        return out
    if mode == "parametric":
        if A.family is None:
            raise ValueError("algebra has no parametric point family")
        seen: dict = {}
        labels, mats = [], []
        for label, el in A.family():
            labels.append(label)
            mats.append(el.matrix)
        if not mats:
            return []
        X = canonical(F, A.coords_of_matrices(np.stack(mats, axis=1)))
        for i, label in enumerate(labels):
            key = point_key(F, X[:, i])
            if key not in seen:
                seen[key] = ExtremalPoint(X[:, i], A.element(X[:, i]), key, label)
        return list(seen.values())
    raise ValueError(f"unknown enumeration mode {mode!r}")


# -- ideals, center, simplicity ------------------------------------------------------------

def center(A: LieAlgebra) -> Subspace:
    """``{a : [a, b_i] = 0 for all i}`` in basis coordinates."""
    F = A.scalars
    d = A.dim
    flat = A.structure.reshape(F.degree, d, d * d)
    # a^T C = 0  <=>  C^T a = 0
    from .linalg import kernel
    return Subspace(F, d, kernel(F, np.swapaxes(flat, 1, 2)))


def ideal_closure(A: LieAlgebra, seed: LieElement | np.ndarray) -> Subspace:
    F = A.scalars
    d = A.dim
    s = A.coords(seed) if isinstance(seed, LieElement) else seed
    space = Subspace(F, d, s[:, None])
    while True:
        new = F.einsum("ri,ijk->rjk", space.basis, A.structure).reshape(F.degree, -1, d)
        grown = space + Subspace(F, d, new)
        if grown.dim == space.dim:
            return space
        space = grown


def is_simple(A: LieAlgebra) -> bool:
    """Trivial center, nonabelian, and every basis vector generates the whole algebra as an ideal."""
    if A.dim == 0 or center(A).dim != 0:
        return False
    F = A.scalars
    if F.all_zero(A.structure):
        return False
    eye = F.identity(A.dim)
    return all(ideal_closure(A, eye[:, i]).dim == A.dim for i in range(A.dim))
