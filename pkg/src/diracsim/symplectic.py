"""Linear symplectic and presymplectic geometry over the rationals.

Flat/sharp operators, omega-orthogonals, pullbacks, the canonical basis of a
subspace annihilator with its normal-form pairing matrix, and the solvability
theory of i_X omega = beta restricted to a subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .ratlin import (
    EMPTY,
    AffineSubspace,
    RationalMatrix,
    Subspace,
    annihilator,
    intersect,
    invert,
    kernel,
    solve_affine,
    vdot,
)

__all__ = [
    "SymplecticSpace",
    "PresymplecticForm",
    "CanonicalConstraintBasis",
    "omega_orthogonal",
    "pullback",
    "canonical_basis",
    "solve_presymplectic",
    "skew_orthogonal",
]


@dataclass(frozen=True)
class SymplecticSpace:
    """Even-dimensional space with a skew, invertible form matrix.

    Convention: omega(v, w) = v^T . omega . w, flat(v) = omega^T v, and the
    standard block form is [[0, I], [-I, 0]] in ordered coordinates
    (q_1..q_n, p_1..p_n), so omega(e_q, e_p) = +1.
    """

    dim: int
    omega: RationalMatrix
    _sharp_matrix: RationalMatrix = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.omega.rows != self.dim or self.omega.cols != self.dim:
            raise ValueError("form matrix shape does not match dimension")
        if not self.omega.is_skew():
            raise ValueError("form matrix must be skew-symmetric")
        if self._sharp_matrix is None:
            object.__setattr__(self, "_sharp_matrix",
                               invert(self.omega.transpose()))

    @classmethod
    def standard(cls, n_pairs: int) -> "SymplecticSpace":
        n = n_pairs
        ident = RationalMatrix.identity(n)
        zero = RationalMatrix.zeros(n, n)
        top = zero.hstack(ident)
        bottom = (-ident).hstack(zero)
        return cls(2 * n, top.vstack(bottom))

    def pairing(self, v: Sequence[Fraction], w: Sequence[Fraction]) -> Fraction:
        return vdot(v, self.omega.matvec(w))

    def flat(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Covector flat(v) with flat(v)(w) = omega(v, w)."""
        return self.omega.transpose().matvec(v)

    def sharp(self, a: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Inverse of flat; sharp(flat(v)) = v."""
        return self._sharp_matrix.matvec(a)

    @property
    def poisson_tensor(self) -> RationalMatrix:
        """J with {F, G} = dF^T . J . dG; equals the matrix of sharp."""
        return self._sharp_matrix


@dataclass(frozen=True)
class PresymplecticForm:
    """Skew form on a carrier subspace, in carrier-basis coordinates."""

    carrier: Subspace
    form: RationalMatrix

    def __post_init__(self):
        if self.form.rows != self.carrier.dim or self.form.cols != self.carrier.dim:
            raise ValueError("form shape does not match carrier dimension")
        if not self.form.is_skew():
            raise ValueError("form must be skew-symmetric")

    @property
    def rank(self) -> int:
        from .ratlin import rref
        return rref(self.form)[2]

    def kernel_coords(self) -> Subspace:
        return kernel(self.form)

    def kernel_ambient(self) -> Subspace:
        """Kernel of the form as a subspace of the ambient space."""
        B = self.carrier.basis
        vecs = [B.matvec(t) for t in self.kernel_coords().basis_vectors()]
        return Subspace.span(self.carrier.ambient_dim, vecs)


@dataclass(frozen=True)
class CanonicalConstraintBasis:
    """Basis alpha_1..alpha_r of an annihilator with normal-form pairing.

    The pairing matrix [alpha_i(X_j)] with X_j = sharp(alpha_j) has identity
    blocks +-I_s in the first 2s rows and zeros afterwards; X_{2s+1}..X_r span
    the intersection of the subspace with its omega-orthogonal.
    """

    alphas: tuple[tuple[Fraction, ...], ...]
    hamiltonian_fields: tuple[tuple[Fraction, ...], ...]
    s: int

    @property
    def r(self) -> int:
        return len(self.alphas)

    def pairing_matrix(self, space: SymplecticSpace) -> RationalMatrix:
        return RationalMatrix.from_rows(
            [[vdot(a, x) for x in self.hamiltonian_fields] for a in self.alphas])


def omega_orthogonal(space: SymplecticSpace, W: Subspace) -> Subspace:
    """W^Omega = {v : omega(v, w) = 0 for all w in W}."""
    if W.ambient_dim != space.dim:
        raise ValueError("subspace does not live in the symplectic space")
    return skew_orthogonal(space.omega, W)


def skew_orthogonal(form: RationalMatrix, W: Subspace) -> Subspace:
    """Orthogonal of W with respect to an arbitrary (possibly degenerate) skew form."""
    if W.dim == 0:
        return Subspace.full(W.ambient_dim)
    rows = RationalMatrix.from_rows(
        [form.matvec(w) for w in W.basis_vectors()])
    # omega(v, w) = -omega(w, v): the kernel is the same either way.
    return kernel(rows)


def pullback(space: SymplecticSpace, V: Subspace) -> PresymplecticForm:
    """Pullback of the symplectic form to V, in V-basis coordinates."""
    B = V.basis
    return PresymplecticForm(V, B.transpose() @ space.omega @ B)


def _symplectic_partition(space_pairing, vectors):
    """Skew Gram-Schmidt: split vectors into pairs (a_i, b_i) and a radical.

    Processes vectors in input order, pivoting on the first nonzero pairing;
    returns (a_list, b_list, null_list) with pairing(a_i, b_j) = delta_ij and
    the radical vectors pairing to zero with everything in the span.
    """
    from .ratlin import vscale, vsub, vadd

    work = list(vectors)
    a_list: list = []
    b_list: list = []
    null_list: list = []

    def reduce_against_pairs(u):
        for a, b in zip(a_list, b_list):
            cb = space_pairing(u, b)
            ca = space_pairing(u, a)
            if cb:
                u = vsub(u, vscale(cb, a))
            if ca:
                u = vadd(u, vscale(ca, b))
        return u

    while work:
        u = reduce_against_pairs(work.pop(0))
        if all(x == 0 for x in u):
            continue
        partner = None
        for idx, w in enumerate(work):
            if space_pairing(u, w) != 0:
                partner = idx
                break
        if partner is None:
            null_list.append(u)
            continue
        v = reduce_against_pairs(work.pop(partner))
        c = space_pairing(u, v)
        b_vec = vscale(Fraction(1) / c, v)
        a_list.append(u)
        b_list.append(b_vec)
    return a_list, b_list, null_list


def canonical_basis(space: SymplecticSpace, V: Subspace) -> CanonicalConstraintBasis:
    """Normal-form basis of the annihilator of V (and of V^Omega via sharp).

    For V the full space the basis is empty with s = 0.
    """
    if V.ambient_dim != space.dim:
        raise ValueError("subspace does not live in the symplectic space")
    ann = annihilator(V)
    xs = [space.sharp(a) for a in ann.basis_vectors()]
    a_list, b_list, null_list = _symplectic_partition(space.pairing, xs)
    fields = tuple(a_list + b_list + null_list)
    alphas = tuple(space.flat(x) for x in fields)
    return CanonicalConstraintBasis(alphas, fields, len(a_list))


def solve_presymplectic(space: SymplecticSpace, V: Subspace,
                        beta: Sequence[Fraction]):
    """Solutions X in V of i_X omega = beta|V, omega the pullback to V.

    Returns the affine solution set in the ambient space, or EMPTY exactly
    when beta does not annihilate the kernel of the pullback form.
    """
    if len(beta) != space.dim:
        raise ValueError("covector length mismatch")
    form = pullback(space, V)
    B = V.basis
    d = [vdot(beta, b) for b in V.basis_vectors()]
    # omega(X, b_j) with X = B t reads sum_i t_i omega_ij, i.e. form^T t = d.
    sol = solve_affine(form.form.transpose(), d)
    solvable = sol is not None
    # Existence criterion: beta must vanish on V^omega = ker(pullback).
    ker_amb = form.kernel_ambient()
    criterion = all(vdot(beta, v) == 0 for v in ker_amb.basis_vectors())
    assert solvable == criterion
    if not solvable:
        return EMPTY
    t0, ker_coords = sol
    base = B.matvec(t0)
    vecs = [B.matvec(t) for t in ker_coords.basis_vectors()]
    return AffineSubspace.make(base, Subspace.span(space.dim, vecs))
