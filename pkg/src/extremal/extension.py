"""Scalar extension of a Lie algebra along a quadratic Galois extension.

The extended algebra keeps the basis of the base algebra; only the scalars
grow.  The Galois involution then acts by conjugating coordinates, and its
fixed points are the base algebra again.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable

import numpy as np

from .fields import Field
from .hermitian import fixed_subalgebra, _same_space
from .lie import (Extremality, LieAlgebra, LieElement, all_flags, extremal_functional,
                  is_simple, outer, point_key, canonical)
from .linalg import Subspace, kernel


class ExtensionError(ValueError):
    pass


def _flag_family_in(A: LieAlgebra):
    """Rank-one transvections of ``PG(n-1, K)`` that lie in ``A``."""
    K = A.field

    def points():
        flags = list(all_flags(K, A.n))
        if not flags:
            return
        mats = np.stack([outer(K, f.v, f.phi) for f in flags], axis=1)
        flat = A.flatten(mats)
        c = K.einsum("...i,ij->...j", flat[..., A._pivots], A._pinv)
        back = K.einsum("...i,ij->...j", c, A._flat)
        inside = (back == flat).all(axis=(0, -1))
        for i in np.nonzero(inside)[0]:
            f = flags[i]
            yield f, LieElement(K, mats[:, i], [(f.v, f.phi)])
    return points


@dataclass
class ExtendedAlgebra:
    """``A (x)_F K`` realised on the matrices of ``A``, with coefficient conjugation as ``sigma``."""

    base: LieAlgebra
    field: Field
    lie: LieAlgebra
    checks: dict = dc_field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.lie.dim

    def sigma(self, coords: np.ndarray) -> np.ndarray:
        """``(x (x) lam)^sigma = x (x) lam^sigma`` extended linearly."""
        return self.field.sigma(coords)

    def sigma_matrices(self, mats: np.ndarray) -> np.ndarray:
        return self.lie.matrices_of(self.sigma(self.lie.coords_of_matrices(mats)))

    def tensor(self, x: np.ndarray, lam) -> np.ndarray:
        """Coordinates of ``x (x) lam`` for base coordinates ``x``."""
        K = self.field
        return K.smul(K.scalar(lam), K.embed(x))

    def form(self, a: np.ndarray, b: np.ndarray) -> tuple:
        return self.lie.form(a, b)

    def extremal_form(self, x: np.ndarray, y: np.ndarray) -> tuple:
        """``g(x, y)`` for extremal ``x`` read off the identity solve, not the trace."""
        status, g = extremal_functional(x, self.lie)
        if status != Extremality.PURE:
            raise ValueError(f"x is {status.value}")
        K = self.field
        return K.get(K.einsum("i,i->", g, y), ())

    def fixed_subalgebra(self) -> LieAlgebra:
        return fixed_subalgebra(self.lie, self.sigma_matrices, name=f"fix({self.lie.name})")

    def summary(self) -> dict:
        return {"base": self.base.name, "base_dim": self.base.dim, "field": str(self.field),
                "dim": self.dim, **self.checks}


def extend(A: LieAlgebra, K: Field) -> ExtendedAlgebra:
    """Extend the scalars of ``A`` from ``F`` to the quadratic extension ``K`` of ``F``."""
    F = A.scalars
    if K.degree != 2 or K.base != F:
        raise ExtensionError(f"{K} is not a quadratic extension of {F}")
    if A.field == K:
        mats = A.mats
    elif A.field == F:
        mats = K.embed(A.mats)
    else:
        raise ExtensionError(f"matrices over {A.field} cannot be viewed over {K}")
    try:
        lie = LieAlgebra(K, A.n, mats, K, name=f"{A.name}(x){K}")
    except ValueError as exc:
        raise ExtensionError("the basis of A is not independent over K") from exc
    lie.family = _flag_family_in(lie) if K.is_finite else None
    checks = {
        "same_structure": bool(np.all(lie.structure == K.embed(A.structure))),
        "same_gram": bool(np.all(lie.gram == K.embed(A.gram))),
    }
    return ExtendedAlgebra(A, K, lie, checks)


# -- checks -------------------------------------------------------------------------

def radical_of_form(E: ExtendedAlgebra | LieAlgebra) -> Subspace:
    """Kernel of the Gram matrix of the extremal form, in basis coordinates."""
    A = E.lie if isinstance(E, ExtendedAlgebra) else E
    F = A.scalars
    return Subspace(F, A.dim, kernel(F, A.gram))


def check_simple(E: ExtendedAlgebra | LieAlgebra) -> bool:
    return is_simple(E.lie if isinstance(E, ExtendedAlgebra) else E)


def sigma_checks(E: ExtendedAlgebra, points: Iterable | None = None) -> dict:
    """Involution, bracket preservation over ``F``, descent to the base, and stability of the extremal set."""
    K, A = E.field, E.lie
    d = A.dim
    eye = K.identity(d)
    Fbasis = np.concatenate([eye, K.smul(K.gen, eye)], axis=1)      # F-basis of the coordinates
    s = E.sigma(Fbasis)
    involution = K.equal(E.sigma(s), Fbasis)
    lhs = E.sigma(A.bracket_coords(Fbasis[:, :, None], Fbasis[:, None, :]))
    rhs = A.bracket_coords(s[:, :, None], s[:, None, :])
    brackets = K.equal(lhs, rhs)
    fixed = E.fixed_subalgebra()
    base = E.base
    ref = LieAlgebra(K, base.n, E.lie.mats, K.base, name=base.name)
    descent = fixed.dim == base.dim and _same_space(fixed, ref)
    out = {"involution": involution, "bracket_preserving": brackets, "fixed_is_base": descent}
    if points is not None:
        pts = list(points)
        keys = {p.key for p in pts}
        X = np.stack([p.coords for p in pts], axis=1) if pts else K.zeros((0, d))
        Y = canonical(K, E.sigma(X))
        out["extremal_set_stable"] = all(point_key(K, Y[:, i]) in keys for i in range(Y.shape[1]))
    return out


def form_scaling_check(E: ExtendedAlgebra, pairs: Iterable[tuple[np.ndarray, np.ndarray]],
                       scalars: Iterable[tuple]) -> tuple[bool, dict | None]:
    """``g^(x (x) lam, y (x) mu) = g(x, y) lam mu`` on the given base pairs; first witness on failure."""
    K = E.field
    scal = list(scalars)
    for x, y in pairs:
        g = K.get(K.embed(np.array(E.base.form(x, y), dtype=x.dtype)), ())
        for lam in scal:
            for mu in scal:
                if K.s_is_zero(lam):
                    continue
                got = E.extremal_form(E.tensor(x, lam), E.tensor(y, mu))
                want = K.s_mul(g, K.s_mul(lam, mu))
                if got != want:
                    return False, {"x": K.format_array(K.embed(x)), "y": K.format_array(K.embed(y)),
                                   "lam": K.format_scalar(lam), "mu": K.format_scalar(mu),
                                   "got": K.format_scalar(got), "want": K.format_scalar(want)}
    return True, None


def coefficient_sigma_matches(E: ExtendedAlgebra, action) -> bool:
    """Coefficient conjugation agrees with a given semilinear map on the basis matrices over ``F``."""
    K = E.field
    mats = np.concatenate([E.lie.mats, K.smul(K.gen, E.lie.mats)], axis=1)
    return K.equal(E.sigma_matrices(mats), action(mats))


__all__ = ["ExtendedAlgebra", "ExtensionError", "extend", "radical_of_form", "check_simple",
           "sigma_checks", "form_scaling_check", "coefficient_sigma_matches"]
