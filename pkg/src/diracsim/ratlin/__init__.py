"""Exact rational dense linear algebra and the lattice of linear/affine subspaces.

Everything downstream (symplectic geometry, Dirac structures, constraint
chains, circuit analysis) reduces to the operations in this module.  All
arithmetic is exact: values are :class:`fractions.Fraction`, rank decisions
are decidable facts, and equal subspaces have bit-identical canonical bases.

The canonical representation of a subspace is the reduced column-echelon form
of its basis, so subspace equality is a plain data comparison.  Row reduction
is delegated to an integer Gauss-Jordan kernel with a compiled (Cython) and a
pure-Python implementation; see :func:`kernel_backend`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from ._backend import kernel_backend, reduce_int_rows

Rational = Fraction

__all__ = [
    "Rational",
    "RationalMatrix",
    "Subspace",
    "AffineSubspace",
    "EMPTY",
    "SingularMatrixError",
    "rref",
    "kernel",
    "subspace_sum",
    "intersect",
    "annihilator",
    "preimage",
    "image",
    "affine_intersect",
    "solve_affine",
    "solve_multi",
    "invert",
    "kernel_backend",
    "vdot",
    "vadd",
    "vsub",
    "vscale",
    "zero_vec",
    "unit_vec",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class SingularMatrixError(ValueError):
    """Raised when a matrix that must be invertible is singular."""


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


# ---------------------------------------------------------------------------
# vectors (plain tuples of Fractions)

def vdot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ValueError("vector length mismatch")
    total = ZERO
    for x, y in zip(a, b):
        if x and y:
            total = total + x * y
    return total


def vadd(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vscale(c: Fraction, a: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(c * x for x in a)


def zero_vec(n: int) -> tuple[Fraction, ...]:
    return (ZERO,) * n


def unit_vec(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(ONE if j == i else ZERO for j in range(n))


# ---------------------------------------------------------------------------
# matrices

@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of Fractions, stored as a tuple of row tuples."""

    rows: int
    cols: int
    data: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "RationalMatrix":
        data = tuple(tuple(_frac(x) for x in row) for row in rows)
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        for row in data:
            if len(row) != ncols:
                raise ValueError("inconsistent row width")
        return cls(nrows, ncols, data)

    @classmethod
    def from_cols(cls, ncols_ambient: int, cols: Iterable[Iterable]) -> "RationalMatrix":
        cols = [tuple(_frac(x) for x in c) for c in cols]
        if not cols:
            return cls(ncols_ambient, 0, tuple(() for _ in range(ncols_ambient)))
        return cls.from_rows(zip(*cols)).reshaped_check(ncols_ambient)

    def reshaped_check(self, nrows: int) -> "RationalMatrix":
        if self.rows != nrows:
            raise ValueError("column length does not match ambient dimension")
        return self

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, tuple(unit_vec(n, i) for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls(nrows, ncols, tuple(zero_vec(ncols) for _ in range(nrows)))

    @classmethod
    def diagonal(cls, entries: Sequence) -> "RationalMatrix":
        n = len(entries)
        return cls(n, n, tuple(
            tuple(_frac(entries[i]) if i == j else ZERO for j in range(n))
            for i in range(n)))

    @property
    def entries(self) -> tuple[Fraction, ...]:
        """Row-major flat view of the entries."""
        return tuple(x for row in self.data for x in row)

    def entry(self, i: int, j: int) -> Fraction:
        return self.data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.data[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.data)

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows,
                              tuple(zip(*self.data)) if self.rows else
                              tuple(() for _ in range(self.cols)))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError("matrix dimension mismatch")
        ot = other.transpose()
        return RationalMatrix(self.rows, other.cols, tuple(
            tuple(vdot(r, c) for c in ot.data) for r in self.data))

    def matvec(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        if self.cols != len(v):
            raise ValueError("matrix/vector dimension mismatch")
        return tuple(vdot(r, v) for r in self.data)

    def rmatvec(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """v^T @ self, as a vector of length cols."""
        if self.rows != len(v):
            raise ValueError("matrix/vector dimension mismatch")
        return tuple(vdot(v, self.col(j)) for j in range(self.cols))

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("matrix dimension mismatch")
        return RationalMatrix(self.rows, self.cols, tuple(
            vadd(a, b) for a, b in zip(self.data, other.data)))

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("matrix dimension mismatch")
        return RationalMatrix(self.rows, self.cols, tuple(
            vsub(a, b) for a, b in zip(self.data, other.data)))

    def scale(self, c) -> "RationalMatrix":
        c = _frac(c)
        return RationalMatrix(self.rows, self.cols, tuple(
            vscale(c, r) for r in self.data))

    def __neg__(self) -> "RationalMatrix":
        return self.scale(-1)

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return RationalMatrix(self.rows, self.cols + other.cols, tuple(
            a + b for a, b in zip(self.data, other.data)))

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return RationalMatrix(self.rows + other.rows, self.cols,
                              self.data + other.data)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self.data[i][j] == self.data[j][i]
            for i in range(self.rows) for j in range(i))

    def is_skew(self) -> bool:
        return self.rows == self.cols and all(
            self.data[i][j] == -self.data[j][i]
            for i in range(self.rows) for j in range(i + 1))

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)


# ---------------------------------------------------------------------------
# row reduction

def _to_int_rows(M: RationalMatrix) -> list[list[int]]:
    rows = []
    for row in M.data:
        den = 1
        for x in row:
            xd = x.denominator
            if xd != 1:
                den = den * xd // gcd(den, xd)
        if den == 1:
            ints = [x.numerator for x in row]
        else:
            ints = [x.numerator * (den // x.denominator) for x in row]
        g = 0
        for a in ints:
            if a:
                g = gcd(g, a)
                if g == 1:
                    break
        if g > 1:
            ints = [a // g for a in ints]
        rows.append(ints)
    return rows


def rref(M: RationalMatrix) -> tuple[RationalMatrix, tuple[int, ...], int]:
    """Unique reduced row-echelon form of M with pivot columns and rank."""
    rows = _to_int_rows(M)
    pivots = reduce_int_rows(rows, M.cols)
    rank = len(pivots)
    out = []
    for r in range(rank):
        piv = Fraction(rows[r][pivots[r]])
        out.append(tuple(Fraction(x) / piv for x in rows[r]))
    for _ in range(rank, M.rows):
        out.append(zero_vec(M.cols))
    return RationalMatrix(M.rows, M.cols, tuple(out)), tuple(pivots), rank


def _echelon_rows(M: RationalMatrix) -> tuple[list[tuple[Fraction, ...]], tuple[int, ...]]:
    """Nonzero rows of the RREF of M, with pivot columns."""
    red, pivots, rank = rref(M)
    return [red.data[i] for i in range(rank)], pivots


def invert(M: RationalMatrix) -> RationalMatrix:
    if M.rows != M.cols:
        raise SingularMatrixError("only square matrices can be inverted")
    n = M.rows
    aug = M.hstack(RationalMatrix.identity(n))
    red, pivots, rank = rref(aug)
    if rank != n or any(p >= n for p in pivots):
        raise SingularMatrixError("matrix is singular")
    return RationalMatrix(n, n, tuple(row[n:] for row in red.data[:n]))


def solve_affine(M: RationalMatrix, d: Sequence[Fraction]):
    """Solve M x = d exactly.

    Returns ``(particular, kernel_subspace)`` with the particular solution
    having zero free coordinates, or ``None`` if the system is inconsistent.
    """
    if M.rows != len(d):
        raise ValueError("rhs length mismatch")
    aug = M.hstack(RationalMatrix(M.rows, 1, tuple(((_frac(x)),) for x in d)))
    red, pivots, rank = rref(aug)
    if any(p == M.cols for p in pivots):
        return None
    x = [ZERO] * M.cols
    for r, p in enumerate(pivots):
        x[p] = red.data[r][M.cols]
    return tuple(x), kernel(M)


def solve_multi(M: RationalMatrix, B: RationalMatrix):
    """Particular solutions of M X = B, one rref for all columns.

    Returns the cols(M) x cols(B) solution matrix with zero free coordinates,
    or ``None`` if any column is inconsistent.
    """
    if M.rows != B.rows:
        raise ValueError("rhs row count mismatch")
    aug = M.hstack(B)
    red, pivots, rank = rref(aug)
    if any(p >= M.cols for p in pivots):
        return None
    out = [[ZERO] * B.cols for _ in range(M.cols)]
    for r, p in enumerate(pivots):
        row = red.data[r]
        for j in range(B.cols):
            out[p][j] = row[M.cols + j]
    return RationalMatrix.from_rows(out)


# ---------------------------------------------------------------------------
# subspaces

@dataclass(frozen=True)
class Subspace:
    """Linear subspace of Q^n in canonical (reduced column-echelon) form.

    ``basis`` holds the basis vectors as columns; each column has a leading 1
    at its pivot coordinate and every other basis column vanishes there, so
    equal subspaces compare equal as data.
    """

    ambient_dim: int
    basis: RationalMatrix
    pivots: tuple[int, ...]
    canonical: bool = True

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        vecs = [tuple(_frac(x) for x in v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ValueError("vector length does not match ambient dimension")
        if not vecs:
            return cls.zero(ambient_dim)
        rows, pivots = _echelon_rows(RationalMatrix.from_rows(vecs))
        basis = RationalMatrix(ambient_dim, len(rows),
                               tuple(tuple(r[i] for r in rows)
                                     for i in range(ambient_dim)))
        return cls(ambient_dim, basis, pivots)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RationalMatrix(ambient_dim, 0,
                                               tuple(() for _ in range(ambient_dim))), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RationalMatrix.identity(ambient_dim),
                   tuple(range(ambient_dim)))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def basis_vectors(self) -> list[tuple[Fraction, ...]]:
        return [self.basis.col(j) for j in range(self.dim)]

    def contains(self, v: Sequence[Fraction]) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def reduce(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Residual of v after subtracting its component along the basis.

        Zeroes the pivot coordinates; the result is zero iff v lies in the
        subspace.
        """
        if len(v) != self.ambient_dim:
            raise ValueError("vector length does not match ambient dimension")
        w = list(v)
        for j, p in enumerate(self.pivots):
            c = w[p]
            if c:
                col = self.basis.col(j)
                for i in range(self.ambient_dim):
                    if col[i]:
                        w[i] -= c * col[i]
        return tuple(w)

    def coordinates(self, v: Sequence[Fraction]):
        """Coefficients of v in the canonical basis, or None if v is outside."""
        w = list(v)
        coeffs = [ZERO] * self.dim
        for j, p in enumerate(self.pivots):
            c = w[p]
            coeffs[j] = c
            if c:
                col = self.basis.col(j)
                for i in range(self.ambient_dim):
                    if col[i]:
                        w[i] -= c * col[i]
        if any(x != 0 for x in w):
            return None
        return tuple(coeffs)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis_vectors())

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)


def kernel(M: RationalMatrix) -> Subspace:
    """Null space {v : M v = 0}, canonical."""
    red, pivots, rank = rref(M)
    n = M.cols
    free = [j for j in range(n) if j not in set(pivots)]
    vecs = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -red.data[r][f]
        vecs.append(v)
    return Subspace.span(n, vecs)


def subspace_sum(U: Subspace, W: Subspace) -> Subspace:
    if U.ambient_dim != W.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    return Subspace.span(U.ambient_dim, U.basis_vectors() + W.basis_vectors())


def intersect(U: Subspace, W: Subspace) -> Subspace:
    """Largest subspace contained in both, via the stacked kernel."""
    if U.ambient_dim != W.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if U.dim == 0 or W.dim == 0:
        return Subspace.zero(U.ambient_dim)
    stacked = U.basis.hstack(-W.basis)
    ker = kernel(stacked)
    vecs = [U.basis.matvec(t[:U.dim]) for t in ker.basis_vectors()]
    return Subspace.span(U.ambient_dim, vecs)


def annihilator(U: Subspace) -> Subspace:
    """Covectors vanishing on U, in the dual coordinates."""
    return kernel(U.basis.transpose())


def image(L: RationalMatrix, U: Subspace) -> Subspace:
    """Image L(U) as a subspace of the codomain."""
    if L.cols != U.ambient_dim:
        raise ValueError("map domain does not match ambient dimension")
    return Subspace.span(L.rows, [L.matvec(v) for v in U.basis_vectors()])


def preimage(L: RationalMatrix, W: Subspace) -> Subspace:
    """{x : L x in W}, canonical."""
    if L.rows != W.ambient_dim:
        raise ValueError("map codomain does not match ambient dimension")
    ann = annihilator(W)
    if ann.dim == 0:
        return Subspace.full(L.cols)
    rows = RationalMatrix.from_rows([a for a in ann.basis_vectors()])
    return kernel(rows @ L)


# ---------------------------------------------------------------------------
# affine subspaces

class _EmptySet:
    """The empty affine solution set; a first-class result, not an error."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"

    @property
    def is_empty(self) -> bool:
        return True


EMPTY = _EmptySet()


@dataclass(frozen=True)
class AffineSubspace:
    """Affine subspace base_point + direction, with a unique representation.

    The base point is normalized to have zero entries at the direction's
    pivot coordinates, so two equal affine subspaces are equal as data.
    """

    base_point: tuple[Fraction, ...]
    direction: Subspace

    @classmethod
    def make(cls, base_point: Sequence, direction: Subspace) -> "AffineSubspace":
        x = tuple(_frac(v) for v in base_point)
        if len(x) != direction.ambient_dim:
            raise ValueError("base point length does not match ambient dimension")
        w = list(x)
        for j, p in enumerate(direction.pivots):
            c = w[p]
            if c:
                col = direction.basis.col(j)
                for i in range(direction.ambient_dim):
                    if col[i]:
                        w[i] -= c * col[i]
        return cls(tuple(w), direction)

    @classmethod
    def full(cls, n: int) -> "AffineSubspace":
        return cls(zero_vec(n), Subspace.full(n))

    @classmethod
    def point(cls, x: Sequence) -> "AffineSubspace":
        x = tuple(_frac(v) for v in x)
        return cls(x, Subspace.zero(len(x)))

    @property
    def ambient_dim(self) -> int:
        return self.direction.ambient_dim

    @property
    def dim(self) -> int:
        return self.direction.dim

    @property
    def is_empty(self) -> bool:
        return False

    def contains(self, x: Sequence[Fraction]) -> bool:
        return self.direction.contains(vsub(x, self.base_point))


def affine_intersect(A: AffineSubspace, constraints) -> AffineSubspace | _EmptySet:
    """Intersect A with affine equations (covector, value); EMPTY if inconsistent.

    Each constraint is a pair ``(c, r)`` demanding ``c . x = r`` on points of A.
    """
    constraints = [(tuple(_frac(x) for x in c), _frac(r)) for c, r in constraints]
    for c, _ in constraints:
        if len(c) != A.ambient_dim:
            raise ValueError("constraint covector length mismatch")
    if not constraints:
        return A
    B = A.direction.basis
    rows = [B.rmatvec(c) for c, _ in constraints]
    rhs = [r - vdot(c, A.base_point) for c, r in constraints]
    sol = solve_affine(RationalMatrix.from_rows(rows) if rows else
                       RationalMatrix.zeros(0, A.dim), rhs)
    if sol is None:
        return EMPTY
    t0, ker = sol
    base = vadd(A.base_point, B.matvec(t0))
    vecs = [B.matvec(t) for t in ker.basis_vectors()]
    return AffineSubspace.make(base, Subspace.span(A.ambient_dim, vecs))
