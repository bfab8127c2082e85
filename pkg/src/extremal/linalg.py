"""Exact linear algebra over :class:`~extremal.fields.Field` arrays.

Matrices are field arrays of shape ``(k, rows, cols)``; vectors and
functionals are ``(k, n)``.  A functional acts on a vector through the dual
pairing ``phi(v) = sum_i phi_i v_i``.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .fields import Field


class DimensionError(ValueError):
    pass


def rref(field: Field, M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form and pivot columns of ``M``."""
    A = field.reduce(np.array(M, copy=True))
    _, r, c = A.shape
    pivots: list[int] = []
    row = 0
    for col in range(c):
        if row == r:
            break
        nz = ~field.is_zero(A[:, row:, col])
        if not nz.any():
            continue
        piv = row + int(np.argmax(nz))
        if piv != row:
            A[:, [row, piv]] = A[:, [piv, row]]
        inv = field.s_inv(field.get(A, (row, col)))
        A[:, row] = field.smul(inv, A[:, row])
        factors = A[:, :, col].copy()
        factors[:, row] = 0
        active = ~field.is_zero(factors)
        if active.any():
            A[:, active] = field.sub(A[:, active],
                                     field.mul(factors[:, active, None], A[:, row][:, None, :]))
        pivots.append(col)
        row += 1
    return A, pivots


def rank(field: Field, M: np.ndarray) -> int:
    if M.shape[1] == 0 or M.shape[2] == 0:
        return 0
    return len(rref(field, M)[1])


def kernel(field: Field, M: np.ndarray) -> np.ndarray:
    """Basis (as rows) of ``{x : M x = 0}``; shape ``(k, nullity, cols)``."""
    _, r, c = M.shape
    if r == 0:
        return field.identity(c)
    R, pivots = rref(field, M)
    free = [j for j in range(c) if j not in set(pivots)]
    out = field.zeros((len(free), c))
    for i, f in enumerate(free):
        out[0, i, f] = field.scalar(1)[0]
        for prow, pcol in enumerate(pivots):
            out[:, i, pcol] = field.neg(R[:, prow, f])
    return out


def solve(field: Field, M: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution ``x`` of ``M x = b`` (free variables set to zero), or ``None``."""
    if M.shape[1] != b.shape[1]:
        raise DimensionError("right-hand side length does not match the row count")
    aug = np.concatenate([M, b[:, :, None]], axis=2)
    R, pivots = rref(field, aug)
    c = M.shape[2]
    if c in pivots:
        return None
    x = field.zeros(c)
    for prow, pcol in enumerate(pivots):
        x[:, pcol] = R[:, prow, c]
    return x


def solve_many(field: Field, M: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Solve ``M X = B`` for a matrix ``B`` of shape ``(k, rows, m)``; ``None`` if any column fails."""
    m = B.shape[2]
    aug = np.concatenate([M, B], axis=2)
    R, pivots = rref(field, aug)
    c = M.shape[2]
    if any(p >= c for p in pivots):
        return None
    X = field.zeros((c, m))
    for prow, pcol in enumerate(pivots):
        X[:, pcol] = R[:, prow, c:]
    return X


def inverse(field: Field, M: np.ndarray) -> np.ndarray:
    n = M.shape[1]
    if M.shape[2] != n:
        raise DimensionError("inverse of a non-square matrix")
    X = solve_many(field, M, field.identity(n))
    if X is None or rank(field, M) < n:
        raise ZeroDivisionError("matrix is singular")
    return X


def pair(field: Field, phi: np.ndarray, v: np.ndarray) -> tuple:
    """Dual pairing ``phi(v)`` as a scalar tuple."""
    return field.get(field.sum(field.mul(phi, v), -1), ())


def _key(field: Field, arr: np.ndarray):
    if field.is_finite:
        return (arr.shape, arr.tobytes())
    return (arr.shape, tuple(arr.ravel().tolist()))


class Subspace:
    """A subspace of ``field^n`` stored by its unique reduced row-echelon basis."""

    __slots__ = ("field", "n", "basis", "pivots", "_key")

    def __init__(self, field: Field, n: int, rows: np.ndarray | None = None):
        self.field = field
        self.n = n
        if rows is None or rows.shape[1] == 0:
            self.basis = field.zeros((0, n))
            self.pivots: list[int] = []
        else:
            if rows.shape[2] != n:
                raise DimensionError(f"rows of length {rows.shape[2]} in ambient dimension {n}")
            R, piv = rref(field, rows)
            self.basis = R[:, : len(piv)]
            self.pivots = piv
        self._key = _key(field, self.basis)

    @classmethod
    def span(cls, field: Field, vectors: Sequence[np.ndarray] | np.ndarray, n: int | None = None):
        if isinstance(vectors, np.ndarray) and vectors.ndim == 3:
            return cls(field, vectors.shape[2], vectors)
        vectors = list(vectors)
        if not vectors:
            if n is None:
                raise DimensionError("ambient dimension needed for an empty span")
            return cls(field, n)
        return cls(field, vectors[0].shape[-1], np.stack(vectors, axis=1))

    @classmethod
    def full(cls, field: Field, n: int):
        return cls(field, n, field.identity(n))

    @classmethod
    def zero(cls, field: Field, n: int):
        return cls(field, n)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def __len__(self):
        return self.dim

    def rows(self) -> list[np.ndarray]:
        return [self.basis[:, i] for i in range(self.dim)]

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.field == other.field and self.n == other.n and self._key == other._key

    def __hash__(self):
        return hash((self.field, self.n, self._key))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, n={self.n}, field={self.field})"

    def reduce_vector(self, v: np.ndarray) -> np.ndarray:
        """Remainder of ``v`` after eliminating the pivot coordinates."""
        if self.dim == 0:
            return v
        coeff = v[:, self.pivots]
        return self.field.sub(v, self.field.einsum("i,ij->j", coeff, self.basis))

    def contains(self, v: np.ndarray) -> bool:
        if v.shape[-1] != self.n:
            raise DimensionError("vector length does not match the ambient dimension")
        return self.field.all_zero(self.reduce_vector(v))

    __contains__ = contains

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """Coefficients of ``v`` in :attr:`basis`; ``v`` must lie in the subspace."""
        if not self.contains(v):
            raise ValueError("vector is not in the subspace")
        return v[:, self.pivots].copy()

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(r) for r in self.rows())

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace(self.field, self.n, np.concatenate([self.basis, other.basis], axis=1))

    def intersection(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return annihilator(annihilator(self) + annihilator(other))

    def extend(self, vectors: Sequence[np.ndarray]) -> "Subspace":
        return self + Subspace.span(self.field, vectors, self.n)

    def complement_basis(self) -> np.ndarray:
        """Standard basis vectors completing :attr:`basis` to a basis of the ambient space."""
        free = [j for j in range(self.n) if j not in set(self.pivots)]
        out = self.field.zeros((len(free), self.n))
        for i, j in enumerate(free):
            out[0, i, j] = self.field.one[0]
        return out

    def _check(self, other):
        if self.field != other.field or self.n != other.n:
            raise DimensionError("subspaces live in different ambient spaces")

    def vectors(self) -> np.ndarray:
        """All vectors of the subspace (finite fields only), shape ``(k, q^dim, n)``."""
        coeffs = self.field.vectors(self.dim)
        return self.field.einsum("ai,ij->aj", coeffs, self.basis)

    def projective_points(self) -> np.ndarray:
        """Canonical representatives of the 1-spaces (first nonzero coordinate 1)."""
        coeffs = self.field.projective_points(self.dim)
        pts = self.field.einsum("ai,ij->aj", coeffs, self.basis)
        return normalize_rows(self.field, pts)


def normalize_rows(field: Field, rows: np.ndarray) -> np.ndarray:
    """Scale each nonzero row so that its first nonzero coordinate is 1."""
    out = rows.copy()
    nz = ~field.is_zero(rows)
    has = nz.any(axis=-1)
    first = np.argmax(nz, axis=-1)
    idx = np.nonzero(has)[0]
    if len(idx) == 0:
        return out
    lead = rows[:, idx, first[idx]]
    inv = field.inv(lead)
    out[:, idx] = field.mul(inv[:, :, None], rows[:, idx])
    return out


def annihilator(space: Subspace, ambient: int | None = None) -> Subspace:
    """``{v : phi(v) = 0 for all phi in space}`` (also usable from vectors to functionals)."""
    if ambient is not None and ambient != space.n:
        raise DimensionError(f"space has ambient dimension {space.n}, expected {ambient}")
    if space.dim == 0:
        return Subspace.full(space.field, space.n)
    return Subspace(space.field, space.n, kernel(space.field, space.basis))


def iter_rows(arr: np.ndarray) -> Iterator[np.ndarray]:
    for i in range(arr.shape[1]):
        yield arr[:, i]
