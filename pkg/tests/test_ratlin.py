"""Exact linear algebra kernel and the subspace lattice."""

import random
from fractions import Fraction as F

import pytest

from diracsim.ratlin import (
    EMPTY,
    AffineSubspace,
    RationalMatrix,
    SingularMatrixError,
    Subspace,
    affine_intersect,
    annihilator,
    intersect,
    invert,
    kernel,
    kernel_backend,
    preimage,
    rref,
    solve_affine,
    solve_multi,
    subspace_sum,
    vdot,
)


# ---------------------------------------------------------------------------
# independent oracles

def bareiss_rank(int_rows):
    """Fraction-free Bareiss elimination; returns the rank."""
    m = [list(r) for r in int_rows]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    prev = 1
    rank = 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(rows):
            if i == r:
                continue
            for j in range(cols):
                if j == c:
                    continue
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        rank += 1
        r += 1
        if r == rows:
            break
    return rank


def gauss_solve(rows, rhs):
    """Plain Fraction Gaussian elimination; one solution or None."""
    m = [list(map(F, r)) + [F(x)] for r, x in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    for i in range(r, nrows):
        if m[i][ncols]:
            return None
    x = [F(0)] * ncols
    for row_idx, c in enumerate(pivots):
        x[c] = m[row_idx][ncols]
    return x


def member(vec, vectors):
    """Whether vec is a linear combination of vectors (oracle)."""
    if not vectors:
        return all(x == 0 for x in vec)
    cols = list(zip(*vectors))
    return gauss_solve(cols, vec) is not None


def rand_matrix(rng, rows, cols, span=6):
    return RationalMatrix.from_rows(
        [[F(rng.randint(-span, span), rng.choice([1, 1, 2, 3]))
          for _ in range(cols)] for _ in range(rows)])


def rand_subspace(rng, n, k):
    return Subspace.span(n, [tuple(F(rng.randint(-4, 4)) for _ in range(n))
                             for _ in range(k)])


# ---------------------------------------------------------------------------
# rref

def test_rref_identity():
    M = RationalMatrix.identity(3)
    red, pivots, rank = rref(M)
    assert red == M and pivots == (0, 1, 2) and rank == 3


def test_rref_dependent_rows():
    M = RationalMatrix.from_rows([[1, 2], [2, 4]])
    red, pivots, rank = rref(M)
    assert rank == 1 and pivots == (0,)
    assert red.row(0) == (F(1), F(2)) and red.row(1) == (F(0), F(0))


def test_rref_rank_matches_bareiss_oracle():
    rng = random.Random(11)
    for _ in range(60):
        rows = [[rng.randint(-5, 5) for _ in range(6)] for _ in range(6)]
        M = RationalMatrix.from_rows(rows)
        assert rref(M)[2] == bareiss_rank(rows)


def test_rref_unique_for_equal_row_spaces():
    rng = random.Random(12)
    for _ in range(25):
        M = rand_matrix(rng, 4, 5)
        # row-equivalent matrix: random invertible combination of the rows
        while True:
            T = rand_matrix(rng, 4, 4, span=3)
            try:
                invert(T)
                break
            except SingularMatrixError:
                continue
        assert rref(T @ M)[0] == rref(M)[0]


# ---------------------------------------------------------------------------
# kernel / sum / intersect / annihilator / preimage

def test_kernel_examples():
    assert kernel(RationalMatrix.from_rows([[1, -1]])) == Subspace.span(2, [(1, 1)])
    M = RationalMatrix.from_rows([[2, 1], [1, 1]])
    assert kernel(M).dim == 0


def test_kernel_fig1_kcl():
    K = RationalMatrix.from_rows([[-1, 0, 1, 0], [0, -1, 1, -1]])
    delta = kernel(K)
    assert delta.dim == 2
    for v in delta.basis_vectors():
        assert all(x == 0 for x in K.matvec(v))


def test_sum_trivial():
    U = rand_subspace(random.Random(0), 4, 2)
    assert subspace_sum(U, Subspace.zero(4)) == U
    e1 = Subspace.span(3, [(1, 0, 0)])
    e2 = Subspace.span(3, [(0, 1, 0)])
    assert subspace_sum(e1, e2) == Subspace.span(3, [(1, 0, 0), (0, 1, 0)])


def test_sum_dimension_against_stacked_solve_oracle():
    rng = random.Random(13)
    for _ in range(40):
        U = rand_subspace(rng, 7, rng.randint(0, 5))
        W = rand_subspace(rng, 7, rng.randint(0, 5))
        s = subspace_sum(U, W)
        # oracle: dim of the sum is the Bareiss rank of the stacked bases
        stacked = [list(v) for v in U.basis_vectors() + W.basis_vectors()]
        scaled = [[x.numerator * 6 // x.denominator for x in row] for row in stacked]
        assert s.dim == bareiss_rank(scaled) if stacked else s.dim == 0


def test_dimension_formula_thousand_pairs():
    rng = random.Random(130)
    for _ in range(1000):
        n = rng.randint(1, 10)
        U = rand_subspace(rng, n, rng.randint(0, n))
        W = rand_subspace(rng, n, rng.randint(0, n))
        assert subspace_sum(U, W).dim + intersect(U, W).dim == U.dim + W.dim


def test_intersect_membership_oracle():
    rng = random.Random(14)
    for _ in range(30):
        U = rand_subspace(rng, 6, rng.randint(1, 4))
        W = rand_subspace(rng, 6, rng.randint(1, 4))
        inter = intersect(U, W)
        for v in inter.basis_vectors():
            assert member(v, U.basis_vectors())
            assert member(v, W.basis_vectors())
        assert intersect(U, U) == U
    assert intersect(Subspace.span(2, [(1, 0)]), Subspace.span(2, [(0, 1)])).dim == 0


def test_annihilator_involution_and_reversal():
    rng = random.Random(15)
    assert annihilator(Subspace.full(5)).dim == 0
    for _ in range(30):
        U = rand_subspace(rng, 9, rng.randint(0, 6))
        assert annihilator(annihilator(U)) == U
        assert U.dim + annihilator(U).dim == 9
        W = subspace_sum(U, rand_subspace(rng, 9, 2))
        assert annihilator(W).dim <= annihilator(U).dim
        for a in annihilator(W).basis_vectors():
            assert member(a, annihilator(U).basis_vectors())


def test_annihilator_fig1_delta():
    K = RationalMatrix.from_rows([[-1, 0, 1, 0], [0, -1, 1, -1]])
    delta = kernel(K)
    ann = annihilator(delta)
    assert ann == Subspace.span(4, [K.row(0), K.row(1)])


def test_preimage_examples():
    L = RationalMatrix.from_rows([[1, 2], [0, 1]])
    assert preimage(L, Subspace.full(2)) == Subspace.full(2)
    M = RationalMatrix.from_rows([[1, -1]])
    assert preimage(M, Subspace.zero(1)) == kernel(M)


def test_preimage_capacitor_voltages():
    # psi_C^{-1}(phi(Delta) + Delta-annihilator) for the 4-port circuit cuts
    # exactly the capacitor-voltage equation q_C1/C1 = q_C3/C3.
    K = RationalMatrix.from_rows([[-1, 0, 1, 0], [0, -1, 1, -1]])
    delta = kernel(K)
    phi = RationalMatrix.diagonal([1, 0, 0, 0])
    psi = RationalMatrix.diagonal([0, -1, -1, -1])
    target = subspace_sum(
        Subspace.span(4, [phi.matvec(v) for v in delta.basis_vectors()]),
        annihilator(delta))
    pre = preimage(psi, target)
    assert pre.dim == 3
    assert pre == kernel(RationalMatrix.from_rows([[0, 1, 0, -1]]))


# ---------------------------------------------------------------------------
# canonical form and affine sets

def test_canonical_idempotent_and_representation_independent():
    rng = random.Random(16)
    for _ in range(30):
        U = rand_subspace(rng, 6, 3)
        # regenerate from random combinations of the basis
        combos = []
        for _ in range(6):
            c = [F(rng.randint(-3, 3)) for _ in range(U.dim)]
            combos.append(U.basis.matvec(c))
        V = Subspace.span(6, combos + U.basis_vectors())
        assert V == U
        assert V.basis.data == U.basis.data
        assert Subspace.span(6, U.basis_vectors()) == U


def test_affine_intersect_trivial_and_empty():
    A = AffineSubspace.full(1)
    assert affine_intersect(A, []) is A
    r = affine_intersect(A, [((F(1),), F(1))])
    assert r.base_point == (F(1),) and r.dim == 0
    assert affine_intersect(r, [((F(1),), F(2))]) is EMPTY


def test_affine_intersect_matches_dense_solve_oracle():
    rng = random.Random(17)
    for _ in range(40):
        n = rng.randint(2, 6)
        A = AffineSubspace.full(n)
        rows = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(rng.randint(1, n + 1))]
        rhs = [F(rng.randint(-3, 3)) for _ in rows]
        got = affine_intersect(A, list(zip(map(tuple, rows), rhs)))
        oracle = gauss_solve(rows, rhs)
        if oracle is None:
            assert got is EMPTY
        else:
            assert got is not EMPTY
            assert got.contains(tuple(oracle))
            for c, r in zip(rows, rhs):
                assert vdot(c, got.base_point) == r
                for v in got.direction.basis_vectors():
                    assert vdot(c, v) == 0


def test_affine_intersect_point_target():
    point = AffineSubspace.point((F(2), F(3)))
    assert affine_intersect(point, [((F(1), F(1)), F(5))]) == point
    assert affine_intersect(point, [((F(1), F(1)), F(4))]) is EMPTY


def test_affine_equality_is_data_equality():
    d = Subspace.span(2, [(1, 1)])
    a = AffineSubspace.make((F(2), F(0)), d)
    b = AffineSubspace.make((F(5), F(3)), d)  # differs by (3, 3) in direction
    assert a == b
    c = AffineSubspace.make((F(5), F(2)), d)
    assert a != c


def test_solvers():
    M = RationalMatrix.from_rows([[2, 0], [0, 4]])
    inv = invert(M)
    assert inv @ M == RationalMatrix.identity(2)
    with pytest.raises(SingularMatrixError):
        invert(RationalMatrix.from_rows([[1, 2], [2, 4]]))
    sol = solve_affine(RationalMatrix.from_rows([[1, 1]]), [F(3)])
    assert sol is not None
    x, ker = sol
    assert x[0] + x[1] == 3 and ker.dim == 1
    assert solve_affine(RationalMatrix.from_rows([[0, 0]]), [F(1)]) is None
    B = RationalMatrix.from_rows([[1, 0], [0, 1]])
    assert solve_multi(RationalMatrix.identity(2), B) == B


def test_backend_reports_name():
    assert kernel_backend() in ("speedups", "pure")


def test_exact_reproducibility():
    rng1, rng2 = random.Random(99), random.Random(99)
    for _ in range(10):
        A = rand_matrix(rng1, 5, 7)
        B = rand_matrix(rng2, 5, 7)
        assert rref(A) == rref(B)
        assert kernel(A).basis.data == kernel(B).basis.data
