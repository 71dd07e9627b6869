"""Constraint classification on a symplectic space and Dirac brackets.

Quadratic observables (polynomials of degree <= 2) are closed under the
canonical Poisson bracket and under Dirac brackets built from affine
second-class constraints, so energies, constraints and every bracket the
engine needs have exact closed forms.

The classification splits an affine constraint set into first/second class
parts adapted to the primary constraints, builds the bracket matrix and its
inverse, the abridged total and extended energies, and the leaf-independent
Dirac-bracket dynamics of foliated constraint sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratlin import (
    EMPTY,
    AffineSubspace,
    RationalMatrix,
    Subspace,
    invert,
    rref,
    solve_affine,
    unit_vec,
    vadd,
    vdot,
    vscale,
    vsub,
    zero_vec,
)
from .symplectic import SymplecticSpace

__all__ = [
    "QuadraticObservable",
    "ConstraintSet",
    "ClassifiedConstraints",
    "DiracBracketContext",
    "LinearFieldExact",
    "MultiplierBundle",
    "ClassificationError",
    "poisson_bracket",
    "bracket_matrix",
    "classify",
    "dirac_bracket",
    "f_chi",
    "multiplier_bundle",
    "abridged_total_energy",
    "extended_energy",
    "leaf_family",
    "foliated_field",
    "coordinate_bracket_matrix",
]

ZERO = Fraction(0)


class ClassificationError(ValueError):
    """Rank or regularity assumptions of the classification are violated."""


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


@dataclass(frozen=True)
class QuadraticObservable:
    """F(x) = 1/2 x^T Q x + l.x + c with Q symmetric."""

    quadratic: RationalMatrix
    linear: tuple[Fraction, ...]
    constant: Fraction

    def __post_init__(self):
        n = len(self.linear)
        if self.quadratic.rows != n or self.quadratic.cols != n:
            raise ValueError("quadratic part shape mismatch")
        if not self.quadratic.is_symmetric():
            raise ValueError("quadratic part must be symmetric")

    @classmethod
    def affine(cls, linear: Sequence, constant=0) -> "QuadraticObservable":
        lin = tuple(_frac(x) for x in linear)
        return cls(RationalMatrix.zeros(len(lin), len(lin)), lin, _frac(constant))

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "QuadraticObservable":
        return cls.affine(unit_vec(dim, i))

    @classmethod
    def zero(cls, dim: int) -> "QuadraticObservable":
        return cls.affine(zero_vec(dim))

    @property
    def dim(self) -> int:
        return len(self.linear)

    @property
    def is_affine(self) -> bool:
        return self.quadratic.is_zero()

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        qx = self.quadratic.matvec(x)
        return vdot(x, qx) / 2 + vdot(self.linear, x) + self.constant

    def gradient(self, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return vadd(self.quadratic.matvec(x), self.linear)

    def __add__(self, other: "QuadraticObservable") -> "QuadraticObservable":
        return QuadraticObservable(self.quadratic + other.quadratic,
                                   vadd(self.linear, other.linear),
                                   self.constant + other.constant)

    def __sub__(self, other: "QuadraticObservable") -> "QuadraticObservable":
        return QuadraticObservable(self.quadratic - other.quadratic,
                                   vsub(self.linear, other.linear),
                                   self.constant - other.constant)

    def scale(self, c) -> "QuadraticObservable":
        c = _frac(c)
        return QuadraticObservable(self.quadratic.scale(c),
                                   vscale(c, self.linear), c * self.constant)

    def __mul__(self, other: "QuadraticObservable") -> "QuadraticObservable":
        if not (self.is_affine and other.is_affine):
            raise ValueError("product would exceed degree 2")
        n = self.dim
        if all(x == 0 for x in self.linear):
            return other.scale(self.constant)
        if all(x == 0 for x in other.linear):
            return self.scale(other.constant)
        quad = RationalMatrix(n, n, tuple(
            tuple(self.linear[i] * other.linear[j] + other.linear[i] * self.linear[j]
                  for j in range(n)) for i in range(n)))
        lin = vadd(vscale(self.constant, other.linear),
                   vscale(other.constant, self.linear))
        return QuadraticObservable(quad, lin, self.constant * other.constant)

    def shift(self, value) -> "QuadraticObservable":
        return QuadraticObservable(self.quadratic, self.linear,
                                   self.constant + _frac(value))

    def vanishes_on(self, A: AffineSubspace) -> bool:
        """Exact test for an affine observable vanishing on an affine set."""
        if not self.is_affine:
            raise ValueError("only affine observables supported")
        if self(A.base_point) != 0:
            return False
        return all(vdot(self.linear, v) == 0
                   for v in A.direction.basis_vectors())


def poisson_bracket(F: QuadraticObservable, G: QuadraticObservable,
                    space: SymplecticSpace) -> QuadraticObservable:
    """Canonical bracket {F, G}(x) = dF(x) . sharp(dG(x)), in closed form.

    Degree bookkeeping keeps the cost low: the quadratic part exists only
    when both arguments are genuinely quadratic.
    """
    if F.dim != space.dim or G.dim != space.dim:
        raise ValueError("observable dimension mismatch")
    n = space.dim
    J = space.poisson_tensor
    qf, qg = F.quadratic, G.quadratic
    lf, lg = F.linear, G.linear
    f_aff, g_aff = F.is_affine, G.is_affine
    const = vdot(lf, J.matvec(lg))
    if f_aff and g_aff:
        return QuadraticObservable.affine(zero_vec(n), const)
    lin = zero_vec(n)
    if not f_aff:
        lin = vadd(lin, qf.matvec(J.matvec(lg)))
    if not g_aff:
        lin = vsub(lin, qg.matvec(J.matvec(lf)))
    if f_aff or g_aff:
        return QuadraticObservable(RationalMatrix.zeros(n, n), lin, const)
    m = (qf @ J) @ qg
    quad = m + m.transpose()
    return QuadraticObservable(quad, lin, const)


@dataclass(frozen=True)
class LinearFieldExact:
    """Exact affine vector field xdot = M x + m."""

    matrix: RationalMatrix
    offset: tuple[Fraction, ...]

    @property
    def dim(self) -> int:
        return len(self.offset)

    def __call__(self, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return vadd(self.matrix.matvec(x), self.offset)


# ---------------------------------------------------------------------------
# constraint sets

class ConstraintSet:
    """Affine constraints on a symplectic space with the foliated layout.

    Constraints are ordered (primary 0..a'-1, secondary a'..a-1,
    leaf-defining a..b-1); for the classical single-leaf case a = b.  The
    primary leaf is cut by the primary and leaf-defining constraints together,
    so multipliers range over that joint index set.
    """

    def __init__(self, ambient: SymplecticSpace,
                 phis: Sequence[QuadraticObservable],
                 primary_count: int, secondary_end: int | None = None):
        b = len(phis)
        a = b if secondary_end is None else secondary_end
        if not (0 <= primary_count <= a <= b):
            raise ClassificationError("invalid layout (a', a, b)")
        for phi in phis:
            if phi.dim != ambient.dim:
                raise ClassificationError("constraint dimension mismatch")
            if not phi.is_affine:
                raise ClassificationError(
                    "only affine constraints are supported (quadratic "
                    "constraints would make the bracket matrix point-dependent)")
        grads = RationalMatrix.from_rows([phi.linear for phi in phis])
        if b and rref(grads)[2] != b:
            raise ClassificationError("constraint differentials are dependent")
        self.ambient = ambient
        self.phis = list(phis)
        self.primary_count = primary_count
        self.secondary_end = a

    @property
    def count(self) -> int:
        return len(self.phis)

    @property
    def layout(self) -> tuple[int, int, int]:
        return (self.primary_count, self.secondary_end, self.count)

    @property
    def primary_indices(self) -> list[int]:
        a_p, a, b = self.layout
        return list(range(a_p)) + list(range(a, b))

    def zero_set(self) -> AffineSubspace | type(EMPTY):
        from .ratlin import affine_intersect
        full = AffineSubspace.full(self.ambient.dim)
        return affine_intersect(
            full, [(phi.linear, -phi.constant) for phi in self.phis])


def bracket_matrix(cs: ConstraintSet) -> tuple[RationalMatrix, int, int]:
    """Matrix of mutual brackets with its rank 2s and primary-row rank s'."""
    b = cs.count
    consts = [[poisson_bracket(cs.phis[i], cs.phis[j], cs.ambient).constant
               for j in range(b)] for i in range(b)]
    phi = RationalMatrix.from_rows(consts) if b else RationalMatrix.zeros(0, 0)
    two_s = rref(phi)[2] if b else 0
    prim = cs.primary_indices
    if prim:
        prim_rows = RationalMatrix.from_rows([consts[i] for i in prim])
        s_prime = rref(prim_rows)[2]
    else:
        s_prime = 0
    return phi, two_s, s_prime


def _greedy_rows(candidates: list[int], rows: list[Sequence[Fraction]],
                 target_rank: int, seed_rows: list[Sequence[Fraction]]) -> list[int]:
    """Pick candidate indices (largest index first) whose rows extend the seed
    rows to target_rank independent rows."""
    chosen: list[int] = []
    current = list(seed_rows)
    base_rank = (rref(RationalMatrix.from_rows(current))[2] if current else 0)
    for idx in sorted(candidates, reverse=True):
        if base_rank == target_rank:
            break
        trial = current + [rows[idx]]
        r = rref(RationalMatrix.from_rows(trial))[2]
        if r > base_rank:
            chosen.append(idx)
            current = trial
            base_rank = r
    if base_rank != target_rank:
        raise ClassificationError("cannot reach the required bracket rank")
    return sorted(chosen)


@dataclass
class ClassifiedConstraints:
    """First/second-class split adapted to the primary constraints."""

    constraint_set: ConstraintSet
    psi_prime: list[QuadraticObservable]
    psi_dprime: list[QuadraticObservable]
    chi_prime: list[QuadraticObservable]
    chi_dprime: list[QuadraticObservable]
    chi_prime_indices: list[int]
    chi_dprime_indices: list[int]
    psi_prime_indices: list[int]
    psi_dprime_indices: list[int]
    alpha_coeffs: dict[int, tuple[Fraction, ...]]
    s: int
    s_prime: int
    c_matrix: RationalMatrix
    c_inverse: RationalMatrix

    @property
    def chis(self) -> list[QuadraticObservable]:
        return self.chi_prime + self.chi_dprime

    @property
    def psis(self) -> list[QuadraticObservable]:
        return self.psi_prime + self.psi_dprime

    def context(self) -> "DiracBracketContext":
        return DiracBracketContext(self.constraint_set.ambient, self.chis,
                                   self.c_matrix, self.c_inverse)


def classify(cs: ConstraintSet) -> ClassifiedConstraints:
    """Split into (psi', psi'', chi', chi'') adapted to the primary constraints.

    chi'/psi' are built from primary constraints only; every psi bracket-
    commutes with every phi (exactly, since the brackets are constants); the
    chi bracket matrix is invertible.
    """
    phi, two_s, s_prime = bracket_matrix(cs)
    s = two_s // 2
    rows = [phi.row(i) for i in range(cs.count)]
    prim = cs.primary_indices
    sec = [i for i in range(cs.count) if i not in set(prim)]

    chi_p_idx = _greedy_rows(prim, rows, s_prime, [])
    chi_pp_idx = _greedy_rows(sec, rows, two_s,
                              [rows[i] for i in chi_p_idx])

    chi_rows_idx = chi_p_idx + chi_pp_idx
    alpha_coeffs: dict[int, tuple[Fraction, ...]] = {}
    psi_p: list[QuadraticObservable] = []
    psi_pp: list[QuadraticObservable] = []
    psi_p_idx: list[int] = []
    psi_pp_idx: list[int] = []

    def combine(i: int, pool: list[int]) -> QuadraticObservable:
        # psi_i = phi_i + alpha_k chi_k with {psi_i, phi_l} = 0 for all l:
        # solve rows[i] + sum_k alpha_k rows[pool_k] = 0.
        if not pool:
            if any(x != 0 for x in rows[i]):
                raise ClassificationError("rank assumptions violated")
            alpha_coeffs[i] = ()
            return cs.phis[i]
        cols = RationalMatrix.from_rows([rows[k] for k in pool]).transpose()
        sol = solve_affine(cols, vscale(Fraction(-1), rows[i]))
        if sol is None:
            raise ClassificationError("rank assumptions violated")
        alpha, _ = sol
        alpha_coeffs[i] = alpha
        out = cs.phis[i]
        for a_k, k in zip(alpha, pool):
            if a_k:
                out = out + cs.phis[k].scale(a_k)
        return out

    for i in prim:
        if i in chi_p_idx:
            continue
        psi_p.append(combine(i, chi_p_idx))
        psi_p_idx.append(i)
    for i in sec:
        if i in chi_pp_idx:
            continue
        psi_pp.append(combine(i, chi_rows_idx))
        psi_pp_idx.append(i)

    chis = [cs.phis[i] for i in chi_rows_idx]
    c_matrix = RationalMatrix.from_rows(
        [[rows[i][j] for j in chi_rows_idx] for i in chi_rows_idx])
    try:
        c_inverse = invert(c_matrix) if chis else RationalMatrix.zeros(0, 0)
    except Exception as exc:  # pragma: no cover - guarded by rank theory
        raise ClassificationError("second-class bracket matrix singular") from exc

    cls = ClassifiedConstraints(
        constraint_set=cs,
        psi_prime=psi_p, psi_dprime=psi_pp,
        chi_prime=[cs.phis[i] for i in chi_p_idx],
        chi_dprime=[cs.phis[i] for i in chi_pp_idx],
        chi_prime_indices=chi_p_idx, chi_dprime_indices=chi_pp_idx,
        psi_prime_indices=psi_p_idx, psi_dprime_indices=psi_pp_idx,
        alpha_coeffs=alpha_coeffs, s=s, s_prime=s_prime,
        c_matrix=c_matrix, c_inverse=c_inverse)

    # Every psi must bracket-commute with every constraint, exactly.
    for psi in cls.psis:
        for phi_l in cs.phis:
            assert poisson_bracket(psi, phi_l, cs.ambient).constant == 0
    grads = RationalMatrix.from_rows(
        [o.linear for o in cls.psis + cls.chis])
    if cs.count and rref(grads)[2] != cs.count:
        raise ClassificationError("classified differentials are dependent")
    return cls


# ---------------------------------------------------------------------------
# Dirac brackets

@dataclass(frozen=True)
class DiracBracketContext:
    """Second-class constraints chi with the inverse bracket matrix."""

    ambient: SymplecticSpace
    chis: tuple[QuadraticObservable, ...]
    c_matrix: RationalMatrix
    c_inverse: RationalMatrix

    def __init__(self, ambient, chis, c_matrix=None, c_inverse=None):
        chis = tuple(chis)
        if c_matrix is None:
            k = len(chis)
            c_matrix = RationalMatrix.from_rows(
                [[poisson_bracket(chis[i], chis[j], ambient).constant
                  for j in range(k)] for i in range(k)]) if k else RationalMatrix.zeros(0, 0)
        if c_inverse is None:
            c_inverse = invert(c_matrix) if chis else RationalMatrix.zeros(0, 0)
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "chis", chis)
        object.__setattr__(self, "c_matrix", c_matrix)
        object.__setattr__(self, "c_inverse", c_inverse)

    def leaf(self, C_values: Sequence) -> AffineSubspace | type(EMPTY):
        """The leaf {chi_i = C_i} as an affine subspace."""
        from .ratlin import affine_intersect
        C = [_frac(c) for c in C_values]
        full = AffineSubspace.full(self.ambient.dim)
        return affine_intersect(
            full, [(chi.linear, c - chi.constant)
                   for chi, c in zip(self.chis, C, strict=True)])


def dirac_bracket(ctx: DiracBracketContext, F: QuadraticObservable,
                  G: QuadraticObservable) -> QuadraticObservable:
    """{F, G}_(chi) = {F, G} - {F, chi_i} c^{ij} {chi_j, G}, closed form."""
    out = poisson_bracket(F, G, ctx.ambient)
    k = len(ctx.chis)
    if not k:
        return out
    f_br = [poisson_bracket(F, chi, ctx.ambient) for chi in ctx.chis]
    g_br = [poisson_bracket(chi, G, ctx.ambient) for chi in ctx.chis]
    for i in range(k):
        for j in range(k):
            cij = ctx.c_inverse.entry(i, j)
            if cij:
                out = out - (f_br[i] * g_br[j]).scale(cij)
    return out


def f_chi(ctx: DiracBracketContext, F: QuadraticObservable) -> QuadraticObservable:
    """F_chi = F - chi_i c^{ij} {chi_j, F}; agrees with F on the leaf."""
    out = F
    k = len(ctx.chis)
    br = [poisson_bracket(chi, F, ctx.ambient) for chi in ctx.chis]
    for i in range(k):
        for j in range(k):
            cij = ctx.c_inverse.entry(i, j)
            if cij:
                out = out - (ctx.chis[i] * br[j]).scale(cij)
    return out


def coordinate_bracket_matrix(ctx: DiracBracketContext) -> RationalMatrix:
    """Dirac brackets {y^i, y^j}_(chi) of the coordinate observables.

    Constant entries since the chis are affine; computed in one closed form
    J + (J X) c^{-1} (J X)^T with X the matrix of chi gradients.
    """
    n = ctx.ambient.dim
    J = ctx.ambient.poisson_tensor
    if not ctx.chis:
        return J
    X = RationalMatrix.from_rows([chi.linear for chi in ctx.chis]).transpose()
    jx = J @ X
    return J + (jx @ ctx.c_inverse) @ jx.transpose()


# ---------------------------------------------------------------------------
# multipliers and energies

@dataclass(frozen=True)
class MultiplierBundle:
    """Affine solution lambda(x) of the constraint-preservation system.

    ``base`` maps each primary index to an affine observable; free directions
    are constant vectors over the primary indices, d_lambda many.
    """

    primary_indices: tuple[int, ...]
    base: tuple[QuadraticObservable, ...]
    free_directions: tuple[tuple[Fraction, ...], ...]

    @property
    def d_lambda(self) -> int:
        return len(self.free_directions)


def _affine_in_span(h: QuadraticObservable,
                    phis: Sequence[QuadraticObservable]) -> bool:
    """Whether affine h is a constant-coefficient combination of the phis.

    For a nonempty zero set this is exactly "h vanishes where all phis do".
    """
    if not phis:
        return h.constant == 0 and all(x == 0 for x in h.linear)
    cols = RationalMatrix.from_rows(
        [list(phi.linear) + [phi.constant] for phi in phis]).transpose()
    return solve_affine(cols, list(h.linear) + [h.constant]) is not None


def multiplier_bundle(cs: ConstraintSet, energy: QuadraticObservable):
    """Solve {E, phi_j}(x) + lambda^i {phi_i, phi_j} = 0 over primary indices.

    Returns a MultiplierBundle with lambda as affine functions of x, or EMPTY
    when the system is inconsistent on the constraint set (energy
    preservation fails along a first-class direction).
    """
    prim = cs.primary_indices
    b = cs.count
    n = cs.ambient.dim
    phi, _, s_prime = bracket_matrix(cs)
    # Equations indexed by j, unknowns lambda^i over prim: M lambda = g(x).
    M = RationalMatrix.from_rows(
        [[phi.entry(i, j) for i in prim] for j in range(b)])
    # M lambda = -g with g_j = {E, phi_j}; with Phi skew this is the
    # closed form lambda = Phi^{-1} g on the invertible block.
    g = [poisson_bracket(energy, cs.phis[j], cs.ambient) for j in range(b)]
    rhs = RationalMatrix.from_rows(
        [[-x for x in g_j.linear] + [-g_j.constant] for g_j in g])
    aug = M.hstack(rhs)
    red, pivots, rank = rref(aug)
    k = len(prim)
    base = [QuadraticObservable.zero(n) for _ in prim]
    for r, p in enumerate(pivots):
        if p >= k:
            # Residual row: an affine function that must vanish on the
            # constraint set, else no multipliers exist.
            row = red.row(r)
            h = QuadraticObservable.affine(row[k:k + n], row[k + n])
            if not _affine_in_span(h, cs.phis):
                return EMPTY
            continue
        row = red.row(r)
        base[p] = QuadraticObservable.affine(row[k:k + n], row[k + n])
    from .ratlin import kernel
    free = kernel(M).basis_vectors()
    assert len(free) == k - s_prime
    return MultiplierBundle(tuple(prim), tuple(base), tuple(free))


def abridged_total_energy(cls: ClassifiedConstraints,
                          energy: QuadraticObservable,
                          lambda_values: Sequence) -> QuadraticObservable:
    """E_AT = E + lambda'^i phi_i over the non-chi' primary constraints."""
    cs = cls.constraint_set
    free_prim = [i for i in cs.primary_indices if i not in set(cls.chi_prime_indices)]
    lam = [_frac(v) for v in lambda_values]
    if len(lam) != len(free_prim):
        raise ValueError(f"expected {len(free_prim)} multipliers, got {len(lam)}")
    out = energy
    for v, i in zip(lam, free_prim):
        if v:
            out = out + cs.phis[i].scale(v)
    return out


def _solve_mu_prime(cls: ClassifiedConstraints,
                    energy: QuadraticObservable) -> list[QuadraticObservable]:
    """mu' from {E, chi_i} + mu'^j {chi'_j, chi_i} = 0, i over all chis."""
    cs = cls.constraint_set
    n = cs.ambient.dim
    chis = cls.chis
    k = len(cls.chi_prime)
    if not k:
        return []
    M = RationalMatrix.from_rows(
        [[poisson_bracket(cp, chi, cs.ambient).constant
          for cp in cls.chi_prime] for chi in chis])
    g = [poisson_bracket(energy, chi, cs.ambient) for chi in chis]
    rhs = RationalMatrix.from_rows(
        [[-x for x in g_i.linear] + [-g_i.constant] for g_i in g])
    aug = M.hstack(rhs)
    red, pivots, _ = rref(aug)
    mu = [QuadraticObservable.zero(n) for _ in range(k)]
    for r, p in enumerate(pivots):
        row = red.row(r)
        if p >= k:
            h = QuadraticObservable.affine(row[k:k + n], row[k + n])
            if not _affine_in_span(h, cs.phis):
                raise ClassificationError(
                    "energy does not preserve the constraint set")
            continue
        mu[p] = QuadraticObservable.affine(row[k:k + n], row[k + n])
    return mu


def total_energy(cls: ClassifiedConstraints, energy: QuadraticObservable,
                 lambda_values: Sequence) -> QuadraticObservable:
    """E_T = E + lambda'^i psi'_i + mu'^j chi'_j with mu' solved globally."""
    lam = [_frac(v) for v in lambda_values]
    if len(lam) != len(cls.psi_prime):
        raise ValueError(f"expected {len(cls.psi_prime)} multipliers, got {len(lam)}")
    out = energy
    for v, psi in zip(lam, cls.psi_prime):
        if v:
            out = out + psi.scale(v)
    for mu, chi in zip(_solve_mu_prime(cls, energy), cls.chi_prime):
        out = out + (chi * mu)
    return out


def extended_energy(cls: ClassifiedConstraints, energy: QuadraticObservable,
                    lambda_values: Sequence,
                    lambda_dprime_values: Sequence) -> QuadraticObservable:
    """E_E = E_T + lambda''^i psi''_i; equals E_T when psi'' is empty."""
    lam2 = [_frac(v) for v in lambda_dprime_values]
    if len(lam2) != len(cls.psi_dprime):
        raise ValueError(f"expected {len(cls.psi_dprime)} multipliers, got {len(lam2)}")
    out = total_energy(cls, energy, lambda_values)
    for v, psi in zip(lam2, cls.psi_dprime):
        if v:
            out = out + psi.scale(v)
    return out


def leaf_family(ctx: DiracBracketContext, C_values: Sequence):
    """Context built from chi - C; identical brackets, shifted leaf.

    Returns (shifted context, leaf affine subspace).  For affine chis every C
    is valid since the bracket matrix is constant.
    """
    C = [_frac(c) for c in C_values]
    if len(C) != len(ctx.chis):
        raise ValueError("offset arity mismatch")
    shifted = DiracBracketContext(
        ctx.ambient, tuple(chi.shift(-c) for chi, c in zip(ctx.chis, C)))
    assert shifted.c_matrix == ctx.c_matrix
    return shifted, ctx.leaf(C)


def foliated_field(cls: ClassifiedConstraints, energy: QuadraticObservable,
                   lambda_values: Sequence) -> LinearFieldExact:
    """Dirac-bracket Hamiltonian field of the abridged total energy.

    Tangent to every leaf of the foliated constraint set: the derivative of
    each constraint along the field vanishes on the union of the leaves.
    """
    cs = cls.constraint_set
    n = cs.ambient.dim
    ctx = cls.context()
    e_at = abridged_total_energy(cls, energy, lambda_values)
    rows = []
    offs = []
    for i in range(n):
        comp = dirac_bracket(ctx, QuadraticObservable.coordinate(n, i), e_at)
        assert comp.is_affine
        rows.append(comp.linear)
        offs.append(comp.constant)
    field = LinearFieldExact(RationalMatrix.from_rows(rows), tuple(offs))
    # Tangency: the leaves are cut by the non-leaf constraints plus leaf
    # offsets, so the derivative of every constraint must vanish wherever the
    # non-leaf constraints do.
    a = cs.secondary_end
    non_leaf = cs.phis[:a]
    for phi in cs.phis:
        deriv = dirac_bracket(ctx, phi, e_at)
        assert deriv.is_affine
        if not _affine_in_span(deriv, non_leaf):
            raise ClassificationError(
                "field is not tangent to the foliated constraint set")
    return field
