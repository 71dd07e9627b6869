"""Linear Dirac structures and their operators."""

import random
from fractions import Fraction as F

import pytest

from diracsim.dirac import (
    LinearDiracStructure,
    check_dirac,
    d_flat,
    d_orthogonal,
    from_distribution_and_form,
    graph_structure,
    nonholonomic_dirac,
    project,
)
from diracsim.ratlin import (
    RationalMatrix,
    Subspace,
    annihilator,
    intersect,
    kernel,
    subspace_sum,
    zero_vec,
)
from diracsim.symplectic import PresymplecticForm, SymplecticSpace, omega_orthogonal

from test_ratlin import rand_subspace


def rand_skew(rng, k):
    rows = [[F(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            rows[i][j] = F(rng.randint(-3, 3))
            rows[j][i] = -rows[i][j]
    return RationalMatrix.from_rows(rows) if k else RationalMatrix.zeros(0, 0)


def rand_dirac(rng, n):
    E = rand_subspace(rng, n, rng.randint(0, n))
    return from_distribution_and_form(E, PresymplecticForm(E, rand_skew(rng, E.dim)))


def pairing_orthogonal(n, space):
    """Brute-force orthogonal complement under the symmetric pairing."""
    rows = []
    for j in range(space.dim):
        g = space.basis.col(j)
        rows.append(tuple(g[n:]) + tuple(g[:n]))
    if not rows:
        return Subspace.full(2 * n)
    return kernel(RationalMatrix.from_rows(rows))


def test_check_dirac_graph_and_zero_form():
    S = SymplecticSpace.standard(2)
    D = graph_structure(S.omega)
    ok, report = check_dirac(4, D.space)
    assert ok and not report["pairing_violations"]
    # the full space with the zero form: D = V + {0}
    vecs = [tuple(v) + zero_vec(3) for v in Subspace.full(3).basis_vectors()]
    ok, _ = check_dirac(3, Subspace.span(6, vecs))
    assert ok


def test_check_dirac_against_self_orthogonality_oracle():
    rng = random.Random(31)
    for _ in range(40):
        n = rng.randint(2, 5)
        cand = rand_subspace(rng, 2 * n, n)
        ok, _ = check_dirac(n, cand)
        assert ok == (cand.dim == n and pairing_orthogonal(n, cand) == cand)
    for _ in range(20):
        n = rng.randint(2, 5)
        D = rand_dirac(rng, n)
        assert pairing_orthogonal(n, D.space) == D.space


def test_from_distribution_and_form_graph_and_zero():
    S = SymplecticSpace.standard(2)
    D = graph_structure(S.omega)
    expected = Subspace.span(8, [tuple(v) + tuple(S.flat(v))
                                 for v in Subspace.full(4).basis_vectors()])
    assert D.space == expected

    E0 = Subspace.zero(3)
    D0 = from_distribution_and_form(E0, PresymplecticForm(E0, RationalMatrix.zeros(0, 0)))
    assert D0.e_d == E0
    assert D0.space == Subspace.span(6, [zero_vec(3) + tuple(a)
                                         for a in Subspace.full(3).basis_vectors()])


def test_project_round_trip_random():
    rng = random.Random(32)
    for _ in range(200):
        n = rng.randint(2, 6)
        D = rand_dirac(rng, n)
        pres = project(D)
        back = from_distribution_and_form(pres.e_d, pres.omega_d)
        assert back.space == D.space


def test_d_flat_zero_fiber_and_graph():
    rng = random.Random(33)
    for _ in range(20):
        n = rng.randint(2, 6)
        D = rand_dirac(rng, n)
        assert d_flat(D, Subspace.zero(n)) == annihilator(D.e_d)
    S = SymplecticSpace.standard(2)
    D = graph_structure(S.omega)
    W = Subspace.span(4, [(1, 2, 0, 0)])
    assert d_flat(D, W) == Subspace.span(4, [S.flat((1, 2, 0, 0))])


def test_d_flat_dimension_against_slice_oracle():
    rng = random.Random(34)
    for _ in range(40):
        n = rng.randint(2, 6)
        D = rand_dirac(rng, n)
        e_d = D.e_d
        W = Subspace.span(n, [e_d.basis.matvec(
            tuple(F(rng.randint(-2, 2)) for _ in range(e_d.dim)))
            for _ in range(rng.randint(0, e_d.dim))])
        # oracle: slice the generator space directly in the ambient R^{2n}
        ambient = subspace_sum(
            Subspace.span(2 * n, [tuple(w) + zero_vec(n) for w in W.basis_vectors()]),
            Subspace.span(2 * n, [zero_vec(n) + tuple(a)
                                  for a in Subspace.full(n).basis_vectors()]))
        slice_ = intersect(D.space, ambient)
        alphas = [slice_.basis.col(j)[n:] for j in range(slice_.dim)]
        assert d_flat(D, W) == Subspace.span(n, alphas)


def test_d_orthogonal_trivial_graph_and_identity():
    S = SymplecticSpace.standard(2)
    D = graph_structure(S.omega)
    # for a graph structure E_D is everything, so the zero subspace is
    # orthogonal to the whole space
    assert d_orthogonal(D, Subspace.zero(4)) == Subspace.full(4)
    W = Subspace.span(4, [(1, 0, 0, 3), (0, 1, 1, 0)])
    assert d_orthogonal(D, W) == omega_orthogonal(S, W)


def test_prop_4_4_identity_random():
    rng = random.Random(35)
    for _ in range(100):
        n = rng.randint(2, 8)
        D = rand_dirac(rng, n)
        e_d = D.e_d
        W = Subspace.span(n, [e_d.basis.matvec(
            tuple(F(rng.randint(-2, 2)) for _ in range(e_d.dim)))
            for _ in range(rng.randint(0, e_d.dim))])
        assert annihilator(d_orthogonal(D, W)) == d_flat(D, W)
        # the induced-form orthogonality statement
        w_d = d_orthogonal(D, W)
        assert intersect(w_d, e_d) == w_d  # W^D always lands inside E_D
        pres = project(D)
        coords = [pres.e_d.coordinates(w) for w in W.basis_vectors()]
        gram_rows = [pres.omega_d.form.rmatvec(t) for t in coords]
        if gram_rows:
            ker = kernel(RationalMatrix.from_rows(gram_rows))
        else:
            ker = Subspace.full(e_d.dim)
        w_omega = Subspace.span(n, [e_d.basis.matvec(t) for t in ker.basis_vectors()])
        assert w_omega == w_d


def test_d_flat_requires_containment():
    rng = random.Random(36)
    D = rand_dirac(rng, 4)
    while D.e_d.dim == 4:
        D = rand_dirac(rng, 4)
    with pytest.raises(ValueError):
        d_flat(D, Subspace.full(4))


def test_nonholonomic_structure_extremes():
    full = Subspace.full(2)
    D = nonholonomic_dirac(full)
    assert D.dim == 6
    # everything is reachable except through the pairing: E_D is the whole
    # tangent space, and the orthogonal collapses to vdot directions only
    assert D.e_d == Subspace.full(6)
    orth = d_orthogonal(D, D.e_d)
    expected = Subspace.span(6, [(0, 0, 1, 0, 0, 0), (0, 0, 0, 1, 0, 0)])
    assert orth == expected  # qdot = 0, pdot in the (trivial) annihilator

    zero = Subspace.zero(2)
    D0 = nonholonomic_dirac(zero)
    e_d = D0.e_d
    for v in e_d.basis_vectors():
        assert v[0] == 0 and v[1] == 0  # qdot = 0 throughout


def test_nonholonomic_fig1_dimensions():
    from diracsim.selftest import fig1_spaces
    cs = fig1_spaces()
    D = nonholonomic_dirac(cs.delta)
    assert D.ambient_dim == 12 and D.dim == 12
    ok, _ = check_dirac(12, D.space)
    assert ok


def test_cross_construction_matches_nonholonomic():
    # building from the projected distribution and form must reproduce the
    # nonholonomic structure of a random circuit
    from diracsim.selftest import corpus
    for cs in corpus()[:10]:
        D = nonholonomic_dirac(cs.delta)
        pres = project(D)
        rebuilt = from_distribution_and_form(pres.e_d, pres.omega_d)
        assert rebuilt.space == D.space
