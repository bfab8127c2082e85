"""Finite truncations of the directed set of pairs ``(U, Phi)`` and the ``sl(I)`` local system.

The ambient space is ``V = F^n`` with ``Pi = V*``.  An index ``I = (U, Phi)``
pairs a subspace of vectors with a subspace of functionals of the same
dimension ``m`` such that the pairing ``Phi x U -> F`` is nondegenerate,
``m >= 3`` and the characteristic does not divide ``m``.  Then ``sl(I)``
is a copy of ``sl_m`` with trivial center.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import Field, FieldScalar
from .lie import LieAlgebra, LieElement, center, generate, transvection
from .linalg import DimensionError, Subspace, annihilator, inverse, rank

MIN_DIM = 3


class InvalidIndexError(ValueError):
    pass


class AmbientTooSmallError(ValueError):
    pass


class NotScalarError(ValueError):
    pass


def _pairing(U: Subspace, Phi: Subspace) -> np.ndarray:
    """Matrix ``phi_i(u_j)`` on the echelon bases."""
    F = U.field
    return F.einsum("ia,ja->ij", Phi.basis, U.basis)


def index_defects(U: Subspace, Phi: Subspace) -> list[str]:
    F = U.field
    out = []
    if U.dim != Phi.dim:
        out.append(f"dim U = {U.dim} but dim Phi = {Phi.dim}")
    if U.dim < MIN_DIM:
        out.append(f"dimension {U.dim} < {MIN_DIM}")
    p = F.characteristic
    if p and U.dim % p == 0:
        out.append(f"dimension {U.dim} divisible by the characteristic {p}")
    if U.dim == Phi.dim and U.dim and rank(F, _pairing(U, Phi)) < U.dim:
        out.append("ann_U(Phi) is nonzero")
    return out


@dataclass(frozen=True, eq=False)
class DirectedIndex:
    U: Subspace
    Phi: Subspace

    def __post_init__(self):
        if self.U.field != self.Phi.field or self.U.n != self.Phi.n:
            raise DimensionError("U and Phi live over different ambient spaces")
        bad = index_defects(self.U, self.Phi)
        if bad:
            raise InvalidIndexError("; ".join(bad))

    @property
    def field(self) -> Field:
        return self.U.field

    @property
    def n(self) -> int:
        return self.U.n

    @property
    def dim(self) -> int:
        return self.U.dim

    def __eq__(self, other):
        return isinstance(other, DirectedIndex) and self.U == other.U and self.Phi == other.Phi

    def __hash__(self):
        return hash((self.U, self.Phi))

    def dual_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Basis ``u_j`` of ``U`` and ``phi_i`` of ``Phi`` with ``phi_i(u_j) = delta_ij``."""
        F = self.field
        P = _pairing(self.U, self.Phi)
        return self.U.basis, F.einsum("ij,ja->ia", inverse(F, P), self.Phi.basis)

    def to_json(self) -> dict:
        F = self.field
        return {"dim": self.dim, "U": F.format_array(self.U.basis[:, :]), "Phi": F.format_array(self.Phi.basis)}


def leq(I: DirectedIndex, J: DirectedIndex) -> bool:
    if I.field != J.field or I.n != J.n:
        raise DimensionError("indices over different ambient spaces")
    return I.U <= J.U and I.Phi <= J.Phi


def _unit(F: Field, n: int, k: int) -> np.ndarray:
    e = F.zeros(n)
    e[0, k] = F.one[0]
    return e


def _first_support(F: Field, x: np.ndarray) -> int:
    return int(np.argmax(~F.is_zero(x)))


def _complete(U: Subspace, Phi: Subspace) -> tuple[Subspace, Subspace, list[str]]:
    """Smallest-step enlargement of ``(U, Phi)`` to a valid index; returns the steps taken."""
    F, n = U.field, U.n
    steps: list[str] = []
    while True:
        P = _pairing(U, Phi)
        # vectors of U killed by Phi, functionals of Phi killing U
        left = annihilator(Subspace(F, U.dim, P)) if Phi.dim else Subspace.full(F, U.dim)
        right = annihilator(Subspace(F, Phi.dim, np.swapaxes(P, 1, 2))) if U.dim else Subspace.full(F, Phi.dim)
        if left.dim:
            u = F.einsum("j,ja->a", left.basis[:, 0], U.basis)
            k = _first_support(F, u)
            Phi = Phi.extend([_unit(F, n, k)])
            steps.append(f"phi += e*_{k}")
        elif right.dim:
            phi = F.einsum("i,ia->a", right.basis[:, 0], Phi.basis)
            k = _first_support(F, phi)
            U = U.extend([_unit(F, n, k)])
            steps.append(f"u += e_{k}")
        else:
            break
    p = F.characteristic
    while U.dim < MIN_DIM or (p and U.dim % p == 0):
        if U.dim == n:
            raise AmbientTooSmallError(f"no room in dimension {n} to enlarge an index of dimension {U.dim}")
        # u in ann(Phi) and phi in ann(U) with phi(u) = 1
        u = annihilator(Phi).basis[:, 0]
        cands = annihilator(U).basis
        vals = F.einsum("ia,a->i", cands, u)
        i = int(np.argmax(~F.is_zero(vals)))
        phi = F.smul(F.s_inv(F.get(vals, (i,))), cands[:, i])
        U, Phi = U.extend([u]), Phi.extend([phi])
        steps.append("(u, phi) with phi(u) = 1")
    return U, Phi, steps


def join(I1: DirectedIndex, I2: DirectedIndex) -> DirectedIndex:
    """An index above both ``I1`` and ``I2``."""
    if I1.field != I2.field or I1.n != I2.n:
        raise DimensionError("indices over different ambient spaces")
    U, Phi, _ = _complete(I1.U + I2.U, I1.Phi + I2.Phi)
    return DirectedIndex(U, Phi)


def index_containing(field: Field, vectors: Sequence[np.ndarray], functionals: Sequence[np.ndarray],
                     n: int) -> DirectedIndex:
    U, Phi, _ = _complete(Subspace.span(field, vectors, n), Subspace.span(field, functionals, n))
    return DirectedIndex(U, Phi)


def sl_of_index(I: DirectedIndex) -> LieAlgebra:
    """Generated by ``t_{u_i, phi_j}``, ``i != j``, for a dual pair of bases."""
    F = I.field
    Ub, Pb = I.dual_basis()
    m = I.dim
    gens = [transvection(F, Ub[:, i], Pb[:, j]) for i in range(m) for j in range(m) if i != j]
    return generate(F, I.n, gens, name=f"sl(I) dim U={m}")


def sl_contains(A: LieAlgebra, x: LieElement) -> bool:
    return A.contains(x)


def conjugate_index(I: DirectedIndex, g: np.ndarray) -> DirectedIndex:
    """``(gU, Phi g^{-1})``; matches ``x -> g x g^{-1}`` on ``sl(I)``."""
    F = I.field
    gi = inverse(F, g)
    U = Subspace(F, I.n, F.einsum("ab,jb->ja", g, I.U.basis))
    Phi = Subspace(F, I.n, F.einsum("ja,ab->jb", I.Phi.basis, gi))
    return DirectedIndex(U, Phi)


def random_transvection(F: Field, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    q = F.order
    while True:
        v = F.from_index(rng.integers(0, q, n))
        phi = F.from_index(rng.integers(0, q, n))
        if F.all_zero(v) or F.all_zero(phi):
            continue
        if F.s_is_zero(F.get(F.sum(F.mul(v, phi), -1), ())):
            return v, phi


def random_index(F: Field, n: int, m: int, rng: np.random.Generator) -> DirectedIndex:
    q = F.order
    while True:
        U = Subspace(F, n, F.from_index(rng.integers(0, q, (m, n))))
        Phi = Subspace(F, n, F.from_index(rng.integers(0, q, (m, n))))
        if not index_defects(U, Phi):
            return DirectedIndex(U, Phi)


def local_cover_check(n: int, field: Field, samples: int = 5, terms: int = 3, seed: int = 0) -> dict:
    """Each sampled sum of transvections lies in ``sl(I)`` for a join of per-term indices."""
    rng = np.random.default_rng(seed)
    report = {"schema": "extremal.local/1", "field": str(field), "n": n, "seed": seed, "samples": []}
    ok = True
    for s in range(samples):
        pieces = [random_transvection(field, n, rng) for _ in range(terms)]
        x = LieElement.from_terms(field, pieces)
        chain = [index_containing(field, [v], [phi], n) for v, phi in pieces]
        W = chain[0]
        dims = [W.dim]
        for nxt in chain[1:]:
            W = join(W, nxt)
            dims.append(W.dim)
        inside = sl_of_index(W).contains(x)
        tight = index_containing(field, [v for v, _ in pieces], [phi for _, phi in pieces], n)
        tight_inside = sl_of_index(tight).contains(x)
        ok &= inside and tight_inside
        report["samples"].append({"terms": len(pieces), "chain_dims": dims, "witness": W.to_json(),
                                  "contained": inside, "tight_witness": tight.to_json(),
                                  "tight_contained": tight_inside})
    report["ok"] = ok
    return report


# -- compatibility of isomorphisms -----------------------------------------------

def _bracket(F: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return F.sub(F.matmul(a, b), F.matmul(b, a))


def _preserves_brackets(F: Field, f: Callable, mats: np.ndarray) -> bool:
    img = f(mats)
    d = mats.shape[1]
    for i in range(d):
        for j in range(i + 1, d):
            if not F.equal(f(_bracket(F, mats[:, i], mats[:, j])[:, None])[:, 0],
                           _bracket(F, img[:, i], img[:, j])):
                return False
    return True


def compatibility_scalar(I: DirectedIndex, J: DirectedIndex, domain_I: LieAlgebra,
                         iso_I: Callable[[np.ndarray], np.ndarray],
                         iso_J: Callable[[np.ndarray], np.ndarray]) -> FieldScalar:
    """The scalar ``lambda`` with ``iso_I = lambda * iso_J`` on ``g_I``; certified to equal 1.

    ``domain_I`` is ``g_I``; both maps act on matrices.  They must be
    bracket-preserving and agree up to one scalar, which ``lambda^2 = lambda``
    then pins to 1.
    """
    if not leq(I, J):
        raise ValueError("I is not below J")
    F = domain_I.field
    mats = domain_I.mats
    for name, f in (("iso_I", iso_I), ("iso_J", iso_J)):
        if not _preserves_brackets(F, f, mats):
            raise NotScalarError(f"{name} does not preserve brackets")
    a, b = iso_I(mats), iso_J(mats)
    slI = sl_of_index(I)
    if not all(slI.contains(LieElement(F, a[:, i])) for i in range(a.shape[1])):
        raise NotScalarError("iso_I does not land in sl(I)")
    # psi = iso_I o iso_J^{-1} on sl(I); scalar iff a = lam * b
    nz = np.argwhere(~F.is_zero(b))
    if len(nz) == 0:
        raise NotScalarError("iso_J vanishes on g_I")
    idx = tuple(int(t) for t in nz[0])
    lam = F.s_div(F.get(a, idx), F.get(b, idx))
    if not F.equal(a, F.smul(lam, b)):
        raise NotScalarError("psi is not a scalar map: the isomorphisms move extremal points")
    # psi([x,y]) = lam [x,y] and [psi x, psi y] = lam^2 [x,y]
    d = b.shape[1]
    for i in range(d):
        for j in range(i + 1, d):
            c = _bracket(F, b[:, i], b[:, j])
            if not F.all_zero(c):
                if not F.equal(F.smul(lam, c), F.smul(F.s_mul(lam, lam), c)):
                    raise NotScalarError("lambda^2 != lambda")
                break
        else:
            continue
        break
    if lam != F.one:
        raise NotScalarError(f"lambda = {F.format_scalar(lam)}")
    return FieldScalar(F, lam)


def conjugation(F: Field, g: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    gi = inverse(F, g)

    def act(mats: np.ndarray) -> np.ndarray:
        return F.einsum("ab,...bc->...ac", g, F.einsum("...ab,bc->...ac", mats, gi))
    return act


def random_invertible(F: Field, n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        g = F.from_index(rng.integers(0, F.order, (n, n)))
        if rank(F, g) == n:
            return g


def trivial_center(A: LieAlgebra) -> bool:
    return center(A).dim == 0
