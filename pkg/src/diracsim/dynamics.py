"""Floating-point integration of the final-stage linear dynamics.

The single exact-to-float boundary of the engine lives here: exact fields and
observables are lowered to doubles (nearest rounding), trajectories are
produced by a fixed-step classic Runge-Kutta scheme, and a matrix-exponential
flow (scaling and squaring with a Pade approximant) serves as ground truth
for integrator tests.  Invariants of the exact field are monitored along the
trajectory; their residuals are pure integration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .observables import LinearFieldExact, QuadraticObservable

__all__ = [
    "LinearField",
    "Trajectory",
    "Monitor",
    "IntegrationError",
    "lower_to_float",
    "lower_observable",
    "integrate_rk4",
    "exact_flow",
    "expm",
    "monitor_report",
]


class IntegrationError(RuntimeError):
    """Non-finite state encountered; carries the failing step index."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class LinearField:
    """xdot = M x + m over doubles."""

    matrix: np.ndarray
    offset: np.ndarray

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.offset


@dataclass(frozen=True)
class Monitor:
    name: str
    func: Callable[[np.ndarray], float]


def _to_float(value, what: str) -> float:
    try:
        out = float(value)
    except OverflowError as exc:
        raise ValueError(f"{what}: rational magnitude exceeds double range") from exc
    if math.isinf(out):
        raise ValueError(f"{what}: rational magnitude exceeds double range")
    return out


def lower_to_float(exact: LinearFieldExact) -> LinearField:
    """Nearest-double image of an exact field; the only rounding step."""
    mat = np.array([[_to_float(x, "field matrix") for x in row]
                    for row in exact.matrix.data], dtype=float)
    if mat.size == 0:
        mat = mat.reshape(exact.dim, exact.dim)
    off = np.array([_to_float(x, "field offset") for x in exact.offset],
                   dtype=float)
    return LinearField(mat, off)


def lower_observable(name: str, obs: QuadraticObservable) -> Monitor:
    """Monitor evaluating an exact observable in floating point."""
    Q = np.array([[_to_float(x, name) for x in row] for row in obs.quadratic.data],
                 dtype=float)
    if Q.size == 0:
        Q = Q.reshape(obs.dim, obs.dim)
    l = np.array([_to_float(x, name) for x in obs.linear], dtype=float)
    c = _to_float(obs.constant, name)

    def func(x: np.ndarray) -> float:
        return 0.5 * float(x @ Q @ x) + float(l @ x) + c

    return Monitor(name, func)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.times.shape[0] - 1


def integrate_rk4(field: LinearField, x0: Sequence[float], dt: float,
                  steps: int, monitors: Sequence[Monitor] = ()) -> Trajectory:
    """Classic fourth-order one-step method with fixed step size."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.array(x0, dtype=float)
    n = x.shape[0]
    times = np.empty(steps + 1)
    states = np.empty((steps + 1, n))
    records = {m.name: np.empty(steps + 1) for m in monitors}

    def record(i, t, x):
        times[i] = t
        states[i] = x
        for m in monitors:
            records[m.name][i] = m.func(x)

    record(0, 0.0, x)
    for i in range(1, steps + 1):
        k1 = field(x)
        k2 = field(x + 0.5 * dt * k1)
        k3 = field(x + 0.5 * dt * k2)
        k4 = field(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"non-finite state at step {i}", step=i)
        record(i, i * dt, x)
    return Trajectory(times, states, records)


# Pade-13 coefficients and theta bound (Higham's scaling-and-squaring).
_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)
_THETA13 = 5.371920351148152


def expm(M: np.ndarray) -> np.ndarray:
    """Matrix exponential via scaling and squaring with the Pade-13 approximant."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    norm = np.linalg.norm(M, 1)
    squarings = 0
    if norm > _THETA13:
        squarings = max(0, int(math.ceil(math.log2(norm / _THETA13))))
    A = M / (2.0 ** squarings)
    b = _PADE13
    ident = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def exact_flow(field: LinearField, x0: Sequence[float], t: float) -> np.ndarray:
    """State at time t of xdot = M x + m via the augmented matrix exponential."""
    n = field.dim
    x0 = np.asarray(x0, dtype=float)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = field.matrix
    aug[:n, n] = field.offset
    phi = expm(t * aug)
    return phi[:n, :n] @ x0 + phi[:n, n]


def exact_flow_trajectory(field: LinearField, x0: Sequence[float], dt: float,
                          steps: int, monitors: Sequence[Monitor] = ()) -> Trajectory:
    """Sampled exact flow on the same grid as the integrator, for comparisons."""
    n = field.dim
    x0 = np.asarray(x0, dtype=float)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = field.matrix
    aug[:n, n] = field.offset
    step_matrix = expm(dt * aug)
    times = np.empty(steps + 1)
    states = np.empty((steps + 1, n))
    records = {m.name: np.empty(steps + 1) for m in monitors}
    y = np.concatenate([x0, [1.0]])
    for i in range(steps + 1):
        times[i] = i * dt
        states[i] = y[:n]
        for m in monitors:
            records[m.name][i] = m.func(y[:n])
        y = step_matrix @ y
    return Trajectory(times, states, records)


def monitor_report(traj: Trajectory, energy_name: str = "energy") -> dict[str, float]:
    """Max absolute residual of every monitor; energy is reported as drift."""
    out = {}
    for name, values in traj.monitors.items():
        if name == energy_name:
            out["energy_drift"] = float(np.max(np.abs(values - values[0])))
        else:
            out[f"max|{name}|"] = float(np.max(np.abs(values)))
    return out
