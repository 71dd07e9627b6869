"""Linear Dirac structures D in V + V*, their operators, and the constant
nonholonomic structure on the Pontryagin space.

A structure is stored as a canonical n-dimensional subspace of R^{2n}
(coordinates: vector part first, covector part last), which serves the
validity check, the presentation (E_D, omega_D) and both the set-valued flat
operator and the associated orthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratlin import (
    RationalMatrix,
    Subspace,
    annihilator,
    kernel,
    solve_affine,
    solve_multi,
    vdot,
    zero_vec,
)
from .symplectic import PresymplecticForm

__all__ = [
    "LinearDiracStructure",
    "DiracPresentation",
    "check_dirac",
    "from_distribution_and_form",
    "project",
    "d_flat",
    "d_orthogonal",
    "nonholonomic_dirac",
    "graph_structure",
]


def _pairing_gram(n: int, space: Subspace) -> RationalMatrix:
    """Gram matrix of the symmetric pairing <<(v1,a1),(v2,a2)>> on a basis."""
    k = space.dim
    entries = []
    for i in range(k):
        gi = space.basis.col(i)
        row = []
        for j in range(k):
            gj = space.basis.col(j)
            row.append(vdot(gi[n:], gj[:n]) + vdot(gj[n:], gi[:n]))
        entries.append(row)
    return (RationalMatrix.from_rows(entries)
            if k else RationalMatrix.zeros(0, 0))


def check_dirac(n: int, candidate: Subspace) -> tuple[bool, dict]:
    """Whether a subspace of R^{2n} is a Dirac structure, with a report.

    True iff dim = n and the symmetric pairing vanishes on all generator
    pairs (maximal isotropy).
    """
    if candidate.ambient_dim != 2 * n:
        raise ValueError("candidate must live in R^{2n}")
    gram = _pairing_gram(n, candidate)
    violations = [(i, j, gram.entry(i, j))
                  for i in range(gram.rows) for j in range(i, gram.cols)
                  if gram.entry(i, j) != 0]
    ok = candidate.dim == n and not violations
    return ok, {"dim": candidate.dim, "expected_dim": n,
                "pairing_violations": violations}


class LinearDiracStructure:
    """Maximally isotropic n-dimensional subspace of V + V*."""

    def __init__(self, ambient_dim: int, space: Subspace, validate: bool = True):
        if validate:
            ok, report = check_dirac(ambient_dim, space)
            if not ok:
                raise ValueError(f"not a Dirac structure: {report}")
        self.ambient_dim = ambient_dim
        self.space = space
        self._presentation: DiracPresentation | None = None

    @classmethod
    def from_generators(cls, ambient_dim: int,
                        pairs: Sequence[tuple[Sequence, Sequence]]) -> "LinearDiracStructure":
        vecs = [tuple(v) + tuple(a) for v, a in pairs]
        return cls(ambient_dim, Subspace.span(2 * ambient_dim, vecs))

    @property
    def dim(self) -> int:
        return self.space.dim

    def __eq__(self, other) -> bool:
        return (isinstance(other, LinearDiracStructure)
                and self.ambient_dim == other.ambient_dim
                and self.space == other.space)

    def __hash__(self):
        return hash((self.ambient_dim, self.space))

    def presentation(self) -> "DiracPresentation":
        if self._presentation is None:
            self._presentation = project(self)
        return self._presentation

    @property
    def e_d(self) -> Subspace:
        return self.presentation().e_d

    @property
    def omega_d(self) -> PresymplecticForm:
        return self.presentation().omega_d

    def kernel_omega_d(self) -> Subspace:
        """ker omega_D as a subspace of the ambient space."""
        return self.omega_d.kernel_ambient()


@dataclass(frozen=True)
class DiracPresentation:
    """Projection E_D on V with the induced presymplectic form on it."""

    e_d: Subspace
    omega_d: PresymplecticForm


def _split_parts(D: LinearDiracStructure) -> tuple[RationalMatrix, RationalMatrix]:
    """Vector-part and covector-part blocks of the generator basis (n x k)."""
    n = D.ambient_dim
    basis = D.space.basis
    vec = RationalMatrix(n, basis.cols, basis.data[:n])
    cov = RationalMatrix(n, basis.cols, basis.data[n:])
    return vec, cov


def project(D: LinearDiracStructure) -> DiracPresentation:
    """Compute (E_D, omega_D); omega_D(v, w) = alpha(w) for any (v, alpha) in D.

    Independence of the alpha choice holds because the alpha-fiber over 0 is
    the annihilator of E_D; asserted below.
    """
    n = D.ambient_dim
    vec_rows, cov_rows = _split_parts(D)
    e_d = Subspace.span(n, [vec_rows.col(j) for j in range(vec_rows.cols)])
    # alpha choices differ by the fiber over 0, which must annihilate E_D.
    fiber0 = [D.space.basis.col(j)[n:] for j in range(D.dim)
              if all(x == 0 for x in D.space.basis.col(j)[:n])]
    ann = annihilator(e_d)
    assert all(ann.contains(a) for a in fiber0)
    sol = solve_multi(vec_rows, e_d.basis)
    assert sol is not None
    alpha_cols = cov_rows @ sol  # column i is an alpha with (e_i, alpha) in D
    form = RationalMatrix.from_rows(
        [[vdot(alpha_cols.col(i), w) for w in e_d.basis_vectors()]
         for i in range(e_d.dim)]
    ) if e_d.dim else RationalMatrix.zeros(0, 0)
    return DiracPresentation(e_d, PresymplecticForm(e_d, form))


def from_distribution_and_form(E: Subspace, omega: PresymplecticForm) -> LinearDiracStructure:
    """The unique Dirac structure with projection E and induced form omega."""
    if omega.carrier != E:
        raise ValueError("form carrier does not match the distribution")
    n = E.ambient_dim
    gens = []
    bt = E.basis.transpose()
    for i, e in enumerate(E.basis_vectors()):
        # alpha with alpha(b_j) = omega_ij for all j.
        sol = solve_affine(bt, omega.form.row(i))
        assert sol is not None
        gens.append(tuple(e) + tuple(sol[0]))
    for a in annihilator(E).basis_vectors():
        gens.append(zero_vec(n) + tuple(a))
    D = LinearDiracStructure(n, Subspace.span(2 * n, gens))
    assert D.e_d == E and D.omega_d.form == omega.form
    return D


def graph_structure(omega_matrix: RationalMatrix) -> LinearDiracStructure:
    """Graph of a presymplectic form on the full space: D = {(v, flat(v))}."""
    n = omega_matrix.rows
    full = Subspace.full(n)
    return from_distribution_and_form(full, PresymplecticForm(full, omega_matrix))


def d_flat(D: LinearDiracStructure, W: Subspace) -> Subspace:
    """Subspace hull of the set-valued flat: all alpha with (X, alpha) in D,
    X in W.

    Computed as the covector part of the slice {d in D : vector part in W},
    in generator coordinates.
    """
    n = D.ambient_dim
    if not D.e_d.contains_subspace(W):
        raise ValueError("W is not contained in E_D")
    vec_rows, cov_rows = _split_parts(D)
    ann_w = annihilator(W)
    if ann_w.dim:
        rows = RationalMatrix.from_rows(ann_w.basis_vectors())
        ker = kernel(rows @ vec_rows)
    else:
        ker = Subspace.full(D.dim)
    alphas = [cov_rows.matvec(t) for t in ker.basis_vectors()]
    return Subspace.span(n, alphas)


def d_orthogonal(D: LinearDiracStructure, W: Subspace) -> Subspace:
    """W^D = {X : alpha(X) = 0 for every alpha in the flat of every Y in W}.

    Computed through the presentation (omega_D-orthogonal of W inside E_D);
    the identity flat(W) = annihilator(W^D) against the direct slice route is
    asserted on every call.
    """
    pres = D.presentation()
    e_d, omega_d = pres.e_d, pres.omega_d
    if not e_d.contains_subspace(W):
        raise ValueError("W is not contained in E_D")
    coords = []
    for w in W.basis_vectors():
        t = e_d.coordinates(w)
        assert t is not None
        coords.append(t)
    if coords:
        rows = RationalMatrix.from_rows(
            [omega_d.form.rmatvec(t) for t in coords])
        ker_t = kernel(rows)
    else:
        ker_t = Subspace.full(e_d.dim)
    out = Subspace.span(D.ambient_dim,
                        [e_d.basis.matvec(t) for t in ker_t.basis_vectors()])
    assert annihilator(out) == d_flat(D, W)
    return out


def nonholonomic_dirac(delta: Subspace) -> LinearDiracStructure:
    """Constant Dirac structure on M = E x E x E* induced by a distribution.

    Generators realize (qdot, vdot, pdot) + (alpha, gamma, beta) with
    qdot in Delta, alpha + pdot in the annihilator of Delta, beta = qdot,
    gamma = 0.  Coordinates are ordered (q, v, p) on the vector side.
    """
    n = delta.ambient_dim
    m = 3 * n
    ann = annihilator(delta)
    gens: list[tuple] = []
    for d in delta.basis_vectors():
        gens.append(tuple(d) + zero_vec(2 * n) + zero_vec(2 * n) + tuple(d))
    for i in range(n):
        v = [Fraction(0)] * (2 * m)
        v[n + i] = Fraction(1)
        gens.append(tuple(v))
    for i in range(n):
        v = [Fraction(0)] * (2 * m)
        v[2 * n + i] = Fraction(1)
        v[m + i] = Fraction(-1)
        gens.append(tuple(v))
    for a in ann.basis_vectors():
        gens.append(zero_vec(m) + tuple(a) + zero_vec(2 * n))
    D = LinearDiracStructure(m, Subspace.span(2 * m, gens))

    # Structural identities of the induced operators, asserted on build:
    # E_D = {qdot in Delta}, flat(E_D) = {gamma = 0, beta in Delta},
    # E_D^D = {qdot = 0, pdot in Delta annihilator}.
    e_d_expected = Subspace.span(m, [tuple(d) + zero_vec(2 * n)
                                     for d in delta.basis_vectors()]
                                 + [zero_vec(n) + tuple(v)
                                    for v in Subspace.full(2 * n).basis_vectors()])
    assert D.e_d == e_d_expected
    flat_expected = Subspace.span(
        m, [tuple(a) + zero_vec(2 * n) for a in Subspace.full(n).basis_vectors()]
        + [zero_vec(2 * n) + tuple(d) for d in delta.basis_vectors()])
    assert d_flat(D, D.e_d) == flat_expected
    orth_expected = Subspace.span(
        m, [zero_vec(n) + tuple(v) + zero_vec(n)
            for v in Subspace.full(n).basis_vectors()]
        + [zero_vec(2 * n) + tuple(a) for a in ann.basis_vectors()])
    assert d_orthogonal(D, D.e_d) == orth_expected
    return D
