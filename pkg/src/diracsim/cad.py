"""Constraint algorithm for constant Dirac dynamical systems.

Runs the decreasing chain of affine constraint sets for a system
(x, xdot) + dE(x) in D with D a constant Dirac structure and E quadratic,
plus the presymplectic special case (graph structures), the Pontryagin-space
builder for quadratic Lagrangians, the solution field on the final constraint
set and the uniqueness diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dirac import LinearDiracStructure, d_flat, d_orthogonal, graph_structure
from .observables import QuadraticObservable
from .ratlin import (
    EMPTY,
    AffineSubspace,
    RationalMatrix,
    Subspace,
    affine_intersect,
    annihilator,
    intersect,
    vdot,
    zero_vec,
)
from .symplectic import skew_orthogonal

__all__ = [
    "QuadraticEnergy",
    "ConstantDiracSystem",
    "CadResult",
    "UniquenessReport",
    "MaxStepsExceeded",
    "cad_run",
    "gotay_nester",
    "euler_lagrange_system",
    "pontryagin_form",
    "solution_field",
    "uniqueness_report",
]

QuadraticEnergy = QuadraticObservable


class MaxStepsExceeded(RuntimeError):
    """The chain failed to stabilize within the step bound (diagnostic)."""


@dataclass(frozen=True)
class ConstantDiracSystem:
    """A constant Dirac structure with a quadratic energy on the same space."""

    ambient_dim: int
    structure: LinearDiracStructure
    energy: QuadraticEnergy

    def __post_init__(self):
        if self.structure.ambient_dim != self.ambient_dim:
            raise ValueError("structure dimension mismatch")
        if self.energy.dim != self.ambient_dim:
            raise ValueError("energy dimension mismatch")


@dataclass(frozen=True)
class CadResult:
    """Chain of constraint sets including the terminal repeated entry.

    ``chain[-1] == chain[-2]`` witnesses stabilization (when not empty);
    ``stop_index`` is the index of the final constraint set.
    """

    chain: tuple[AffineSubspace, ...]
    stop_index: int
    w_c: Subspace | None
    d_c: int | None
    empty: bool
    empty_at: int | None = None

    @property
    def final(self) -> AffineSubspace | None:
        return None if self.empty else self.chain[self.stop_index]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.chain)


def _cut_constraints(energy: QuadraticEnergy, U: Subspace):
    """Affine equations <dE(x), u> = 0 for u in a basis of U."""
    A, b = energy.quadratic, energy.linear
    return [(A.matvec(u), -vdot(b, u)) for u in U.basis_vectors()]


def cad_run(sys: ConstantDiracSystem, max_steps: int | None = None) -> CadResult:
    """Decreasing chain M_{k+1} = {x in M_k : <dE(x), (W_k)^D> = 0}.

    W_k is the intersection of E_D with the direction of M_k; since dE is
    affine and (W_k)^D is a fixed subspace along the affine M_k, every step is
    one exact affine intersection.  Terminates at the first repeat or at an
    empty set.
    """
    n = sys.ambient_dim
    if max_steps is None:
        max_steps = n + 1
    D = sys.structure
    e_d = D.e_d
    ker_omega = D.kernel_omega_d()
    chain = [AffineSubspace.full(n)]
    for k in range(max_steps + 1):
        current = chain[-1]
        w_k = intersect(e_d, current.direction)
        # (W_k)^D evaluates both recursion conditions: the omega_D route is
        # the computation, the set-valued-flat route is asserted against it
        # inside d_orthogonal.
        u_k = d_orthogonal(D, w_k)
        nxt = affine_intersect(current, _cut_constraints(sys.energy, u_k))
        if nxt is EMPTY:
            return CadResult(tuple(chain), stop_index=k, w_c=None, d_c=None,
                             empty=True, empty_at=k + 1)
        chain.append(nxt)
        if nxt == current:
            w_c = w_k
            d_c = intersect(ker_omega, current.direction).dim
            return CadResult(tuple(chain), stop_index=k, w_c=w_c, d_c=d_c,
                             empty=False)
    raise MaxStepsExceeded(f"no stabilization after {max_steps} steps")


def gotay_nester(dim: int, omega,
                 energy: QuadraticEnergy) -> CadResult:
    """Presymplectic recursion <dE(x), (T_x M_k)^omega> = 0 on the full space.

    Identical to the Dirac-structure run on the graph of omega; the equality
    of the two chains is asserted (the one-leaf case of the equivalence
    between the algorithms).  ``omega`` is a form matrix or a presymplectic
    form carried by the full space.
    """
    from .symplectic import PresymplecticForm
    if isinstance(omega, PresymplecticForm):
        if omega.carrier != Subspace.full(dim):
            raise ValueError("the form must be carried by the full space")
        omega = omega.form
    if omega.rows != dim or omega.cols != dim:
        raise ValueError("form shape mismatch")
    chain = [AffineSubspace.full(dim)]
    for _ in range(dim + 1):
        current = chain[-1]
        orth = skew_orthogonal(omega, current.direction)
        nxt = affine_intersect(current, _cut_constraints(energy, orth))
        if nxt is EMPTY:
            result = CadResult(tuple(chain), stop_index=len(chain) - 1,
                               w_c=None, d_c=None, empty=True,
                               empty_at=len(chain))
            break
        chain.append(nxt)
        if nxt == current:
            result = None
            break
    else:
        raise MaxStepsExceeded(f"no stabilization after {dim + 1} steps")

    via_cad = cad_run(ConstantDiracSystem(dim, graph_structure(omega), energy))
    if result is None:
        assert via_cad.chain == tuple(chain)
    else:
        assert via_cad.empty and via_cad.chain == result.chain
    return via_cad


def pontryagin_form(n: int) -> RationalMatrix:
    """dq ^ dp on the (q, v, p) space: velocity directions span the kernel."""
    dim = 3 * n
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(n):
        rows[i][2 * n + i] = Fraction(1)
        rows[2 * n + i][i] = Fraction(-1)
    return RationalMatrix.from_rows(rows)


def euler_lagrange_system(mass: RationalMatrix,
                          stiffness: RationalMatrix) -> ConstantDiracSystem:
    """Pontryagin-space system for L(q, v) = 1/2 v^T M v - 1/2 q^T K q.

    The energy is E(q, v, p) = p.v - L(q, v); on the first constraint set the
    dynamics reproduce qdot = v, pdot = -K q.
    """
    if not mass.is_symmetric() or not stiffness.is_symmetric():
        raise ValueError("mass and stiffness matrices must be symmetric")
    if mass.rows != stiffness.rows:
        raise ValueError("size mismatch")
    n = mass.rows
    dim = 3 * n
    quad = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(n):
        for j in range(n):
            quad[i][j] = stiffness.entry(i, j)
            quad[n + i][n + j] = -mass.entry(i, j)
        quad[n + i][2 * n + i] = Fraction(1)
        quad[2 * n + i][n + i] = Fraction(1)
    energy = QuadraticEnergy(RationalMatrix.from_rows(quad),
                             zero_vec(dim), Fraction(0))
    return ConstantDiracSystem(dim, graph_structure(pontryagin_form(n)), energy)


def solution_field(sys: ConstantDiracSystem, res: CadResult,
                   x: Sequence[Fraction]) -> AffineSubspace:
    """Affine set of velocities xdot in W_c with (x, xdot) + dE(x) in D.

    Nonempty for every point of the final constraint set, with fiber
    dimension d_c independent of the point.
    """
    if res.empty:
        raise ValueError("empty final constraint set has no solution field")
    final = res.final
    if not final.contains(x):
        raise ValueError("point does not lie on the final constraint set")
    n = sys.ambient_dim
    de = sys.energy.gradient(x)
    A = AffineSubspace.make(zero_vec(n), res.w_c)
    constraints = []
    for r in annihilator(sys.structure.space).basis_vectors():
        constraints.append((r[:n], -vdot(r[n:], de)))
    sol = affine_intersect(A, constraints)
    assert sol is not EMPTY
    assert sol.dim == res.d_c
    return sol


@dataclass(frozen=True)
class UniquenessReport:
    """Evaluation of the uniqueness and symplectic-restriction conditions."""

    a_i: bool
    a_ii: bool
    a_iii: bool | None
    b_i: bool
    b_ii: bool | None
    d_c: int

    @property
    def unique(self) -> bool:
        return self.a_i

    @property
    def symplectic_restriction(self) -> bool:
        return self.b_i


def uniqueness_report(sys: ConstantDiracSystem, res: CadResult,
                      ambient_form: RationalMatrix | None = None) -> UniquenessReport:
    """Conditions (A)(i)-(iii) and (B)(i)-(ii); (B) implies (A), asserted.

    (A) holds iff solutions through every point are unique; (B) iff the
    induced form restricted to W_c is symplectic.  The conditions against an
    ambient 2-form are evaluated only when one is supplied.
    """
    if res.empty:
        raise ValueError("empty final constraint set")
    D = sys.structure
    w_c = res.w_c
    ker = D.kernel_omega_d()
    a_i = intersect(ker, res.final.direction).dim == 0
    e_orth = d_orthogonal(D, D.e_d)
    a_ii = intersect(w_c, e_orth).dim == 0
    w_orth = d_orthogonal(D, w_c)
    b_i = intersect(w_c, w_orth).dim == 0
    a_iii = None
    b_ii = None
    if ambient_form is not None:
        a_iii = intersect(w_c, skew_orthogonal(ambient_form, D.e_d)).dim == 0
        b_ii = intersect(w_c, skew_orthogonal(ambient_form, w_c)).dim == 0
        assert b_ii == b_i
    assert a_i == a_ii == (res.d_c == 0)
    if b_i:
        assert a_i
    return UniquenessReport(a_i=a_i, a_ii=a_ii, a_iii=a_iii,
                            b_i=b_i, b_ii=b_ii, d_c=res.d_c)
