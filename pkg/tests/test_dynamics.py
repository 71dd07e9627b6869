"""Float-side integration, the exponential-flow oracle, and monitors."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from diracsim import circuits as circ
from diracsim import dynamics as dyn
from diracsim.observables import LinearFieldExact, QuadraticObservable
from diracsim.ratlin import RationalMatrix, zero_vec
from diracsim.selftest import fig1_spaces


def exact_field(rows, offset):
    return LinearFieldExact(RationalMatrix.from_rows(rows),
                            tuple(F(x) for x in offset))


def test_lower_to_float_rounding():
    field = exact_field([[F(1, 3), 0], [0, 2]], [0, F(-1, 3)])
    low = dyn.lower_to_float(field)
    assert low.matrix[0, 0] == 1.0 / 3.0
    assert low.matrix[1, 1] == 2.0
    assert low.offset[1] == -1.0 / 3.0


def test_lower_to_float_overflow():
    huge = F(10) ** 400
    with pytest.raises(ValueError, match="double range"):
        dyn.lower_to_float(exact_field([[huge]], [0]))


def test_zero_field_constant_trajectory():
    field = dyn.LinearField(np.zeros((2, 2)), np.zeros(2))
    traj = dyn.integrate_rk4(field, [1.0, -2.0], 0.1, 50)
    assert np.all(traj.states == [1.0, -2.0])


def test_harmonic_oscillator_period_error_order():
    # return-to-start error after one period scales like dt^4
    field = dyn.LinearField(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.zeros(2))
    period = 2.0 * math.pi
    errs = []
    for steps in (64, 128, 256):
        dt = period / steps
        traj = dyn.integrate_rk4(field, [1.0, 0.0], dt, steps)
        errs.append(float(np.linalg.norm(traj.states[-1] - [1.0, 0.0])))
    for a, b in zip(errs, errs[1:]):
        assert 12.0 < a / b < 20.0


def test_integrator_reports_nonfinite_step():
    field = dyn.LinearField(np.array([[1e300]]), np.zeros(1))
    with np.errstate(over="ignore"), pytest.raises(dyn.IntegrationError) as err:
        dyn.integrate_rk4(field, [1.0], 1.0, 10)
    assert err.value.step >= 1


def test_exact_flow_nilpotent_free_particle():
    field = dyn.LinearField(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros(2))
    out = dyn.exact_flow(field, [1.0, 2.0], 3.0)
    assert out == pytest.approx([7.0, 2.0], abs=1e-14)


def test_exact_flow_rotation_long_horizon():
    field = dyn.LinearField(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros(2))
    for t in (0.5, 10.0, 100.0):
        out = dyn.exact_flow(field, [1.0, 0.0], t)
        assert abs(out[0] - math.cos(t)) < 1e-12
        assert abs(out[1] - math.sin(t)) < 1e-12


def test_exact_flow_affine_offset():
    # xdot = -x + 1 converges to 1
    field = dyn.LinearField(np.array([[-1.0]]), np.array([1.0]))
    out = dyn.exact_flow(field, [0.0], 50.0)
    assert out[0] == pytest.approx(1.0, abs=1e-12)


def test_fig1_reduced_oscillation_frequency():
    cs = fig1_spaces()
    red = circ.reduced_system(cs)
    field = dyn.lower_to_float(red.field)
    omega = math.sqrt(1.5)
    period = 2.0 * math.pi / omega
    out = dyn.exact_flow(field, [1.0, 0.0], period)
    assert out == pytest.approx([1.0, 0.0], abs=1e-11)


def test_energy_is_exact_first_integral_before_lowering():
    cs = fig1_spaces()
    red = circ.reduced_system(cs)
    # dH(x) . (M x + m) vanishes identically in exact arithmetic
    H, field = red.hamiltonian, red.field
    for x in [(F(1), F(0)), (F(2), F(-3)), (F(1, 3), F(5, 7))]:
        grad = H.gradient(x)
        vel = field(x)
        assert sum(g * v for g, v in zip(grad, vel)) == 0


def test_exact_field_annihilates_constraints():
    # the foliated field keeps every constraint exactly invariant, so the
    # floating-point residuals measured below are pure integration error
    from diracsim.observables import DiracBracketContext, classify, foliated_field
    cs = fig1_spaces()
    emb = circ.embed(cs, preset="paper-fig1")
    cls = classify(emb.constraint_set)
    energy = circ.embedded_energy(cs)
    field = foliated_field(cls, energy, [])
    zero_set = emb.constraint_set.zero_set()
    import random
    rng = random.Random(81)
    for _ in range(10):
        x = zero_set.base_point
        for v in zero_set.direction.basis_vectors():
            c = F(rng.randint(-3, 3))
            x = tuple(a + c * b for a, b in zip(x, v))
        vel = field(x)
        for eps in emb.epsilons:
            assert sum(g * w for g, w in zip(eps.linear, vel)) == 0


def test_monitor_report_zero_field():
    field = dyn.LinearField(np.zeros((2, 2)), np.zeros(2))
    obs = QuadraticObservable.affine((F(1), F(-1)), F(0))
    mon = dyn.lower_observable("balance", obs)
    energy = dyn.lower_observable("energy", QuadraticObservable.affine((F(1), F(0)), F(0)))
    traj = dyn.integrate_rk4(field, [2.0, 2.0], 0.1, 20, [mon, energy])
    rep = dyn.monitor_report(traj)
    assert rep["max|balance|"] == 0.0
    assert rep["energy_drift"] == 0.0


def test_foliated_trajectory_leaf_residuals():
    # exponential-flow trajectory of the circuit keeps the leaf residuals tiny
    from diracsim.observables import classify, foliated_field
    cs = fig1_spaces()
    emb = circ.embed(cs, preset="paper-fig1")
    cls = classify(emb.constraint_set)
    energy = circ.embedded_energy(cs)
    exact = foliated_field(cls, energy, [])
    field = dyn.lower_to_float(exact)
    red = circ.reduced_system(cs)
    x0 = [float(x) for x in red.leaf_basis.col(0)] + [0.0] * 4
    monitors = [dyn.lower_observable(name, obs)
                for name, obs in zip(emb.epsilon_names, emb.epsilons)]
    monitors.append(dyn.lower_observable("energy", energy))
    traj = dyn.exact_flow_trajectory(field, x0, 0.01, 10000, monitors)
    rep = dyn.monitor_report(traj)
    for name in emb.epsilon_names:
        assert rep[f"max|{name}|"] < 1e-9
    assert rep["energy_drift"] < 1e-9


def test_rk4_leaf_residual_shrinks_fourth_order():
    from diracsim.observables import classify, foliated_field
    cs = fig1_spaces()
    emb = circ.embed(cs, preset="paper-fig1")
    cls = classify(emb.constraint_set)
    energy = circ.embedded_energy(cs)
    field = dyn.lower_to_float(foliated_field(cls, energy, []))
    red = circ.reduced_system(cs)
    x0 = [float(x) for x in red.leaf_basis.col(0)] + [0.0] * 4
    energy_monitor = [dyn.lower_observable("energy", energy)]
    drifts = []
    errors = []
    horizon = 4.0
    for steps in (100, 200, 400):
        dt = horizon / steps
        traj = dyn.integrate_rk4(field, x0, dt, steps, energy_monitor)
        drifts.append(dyn.monitor_report(traj)["energy_drift"])
        oracle = dyn.exact_flow_trajectory(field, x0, dt, steps)
        errors.append(float(np.max(np.abs(traj.states - oracle.states))))
    # global state error is fourth order; the energy drift of a linear flow
    # superconverges (fifth order), so it shrinks at least as fast
    for a, b in zip(errors, errors[1:]):
        assert 12.0 < a / b < 20.0
    for a, b in zip(drifts, drifts[1:]):
        assert a / b > 12.0
