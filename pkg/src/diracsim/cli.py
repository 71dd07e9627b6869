"""Command-line surface: analyze, bracket, simulate, selftest.

Reports from the exact-arithmetic commands are deterministic JSON with
rationals rendered as "p/q" strings; floating point appears only in
trajectory CSVs (17 significant digits).

Exit codes: 0 success, 1 usage error, 2 domain/validation error,
3 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from . import circuits as circ
from . import dynamics as dyn
from .observables import (
    ClassificationError,
    DiracBracketContext,
    LinearFieldExact,
    QuadraticObservable,
    bracket_matrix,
    classify,
    coordinate_bracket_matrix,
    foliated_field,
    multiplier_bundle,
)
from .ratlin import EMPTY, RationalMatrix, SingularMatrixError, invert, kernel

__all__ = ["main", "run"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); remap to usage error
        raise UsageError(message)


def _fmt(x: Fraction) -> str:
    return str(x)


def _fmt_matrix(M: RationalMatrix) -> list[list[str]]:
    return [[_fmt(x) for x in row] for row in M.data]


def _fmt_vec(v) -> list[str]:
    return [_fmt(x) for x in v]


def _load_netlist(args) -> tuple[circ.Netlist, str | None]:
    preset = args.preset
    if preset is not None and preset not in circ.PRESET_NAMES:
        raise UsageError(f"unknown preset {preset!r} (known: {', '.join(circ.PRESET_NAMES)})")
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif preset == "paper-fig1":
        text = (resources.files("diracsim.fixtures") / "fig1_fourport.json").read_text()
    else:
        raise UsageError("--input is required (or use --preset paper-fig1)")
    return circ.parse_netlist(text, mode=args.mode), preset


def _write_json(payload: dict, path: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _coordinate_names(nl: circ.Netlist) -> list[str]:
    names = [b.name for b in nl.branches]
    return ([f"q_{x}" for x in names] + [f"v_{x}" for x in names]
            + [f"p_{x}" for x in names] + [f"nu_{x}" for x in names])


def _classification_summary(emb: circ.EmbeddedCircuit, energy: QuadraticObservable) -> dict:
    cs = emb.constraint_set
    phi, two_s, s_prime = bracket_matrix(cs)
    cls = classify(cs)
    bundle = multiplier_bundle(cs, energy)
    d_lambda = None if bundle is EMPTY else bundle.d_lambda
    return {
        "layout": {"primary": cs.primary_count, "secondary_end": cs.secondary_end,
                   "total": cs.count},
        "two_s": two_s,
        "s_prime": s_prime,
        "first_class": len(cls.psis),
        "second_class": len(cls.chis),
        "primary_first_class": len(cls.psi_prime),
        "secondary_first_class": len(cls.psi_dprime),
        "gauge_freedom_d_lambda": d_lambda,
    }


def cmd_analyze(args) -> int:
    nl, preset = _load_netlist(args)
    cs = circ.build_spaces(nl)
    chain = circ.constraint_chain(cs)
    deltas = circ.delta_chain(cs)
    report: dict = {
        "mode": nl.mode,
        "branches": [b.name for b in nl.branches],
        "kcl_rows": _fmt_matrix(cs.kcl),
        "delta_dim": cs.delta.dim,
        "delta_chain_dims": [d.dim for d in deltas],
        "delta_chain": [[_fmt_vec(v) for v in d.basis_vectors()] for d in deltas],
        "chain_dims": list(chain.dims),
        "chain_equations": [_affine_equations(m) for m in chain.chain],
        "stop_index": chain.stop_index,
        "final_dim": chain.final.dim,
        "d_c": chain.d_c,
        "final_equations": _affine_equations(chain.final),
    }
    if nl.mode == "physical":
        rep = circ.loop_report(cs)
        report["loop_report"] = {
            "has_purely_capacitive": rep.has_purely_capacitive,
            "has_empty": rep.has_empty,
            "kvlpc_equations": [_fmt_vec(e) for e in rep.kvlpc_equations],
            "stop_index_prediction": rep.stop_index_prediction,
            "leaf_symplectic": rep.leaf_symplectic,
            "condition_star": rep.condition_star,
        }
        emb = circ.embed(cs, preset=preset)
        report["epsilon_names"] = list(emb.epsilon_names)
        report["sigma"] = _fmt_matrix(emb.sigma)
        report["classification"] = _classification_summary(
            emb, circ.embedded_energy(cs))
    _write_json(report, args.output)
    return 0


def _affine_equations(member) -> list[dict]:
    """A canonical generating set of equations cutting an affine set."""
    from .ratlin import annihilator, vdot
    out = []
    for row in annihilator(member.direction).basis_vectors():
        out.append({"coeffs": _fmt_vec(row),
                    "value": _fmt(vdot(row, member.base_point))})
    return out


def cmd_bracket(args) -> int:
    nl, preset = _load_netlist(args)
    cs = circ.build_spaces(nl)
    emb = circ.embed(cs, preset=preset)
    try:
        sigma_inv = invert(emb.sigma)
    except SingularMatrixError:
        null = kernel(emb.sigma)
        combos = []
        for t in null.basis_vectors():
            combos.append({name: _fmt(c) for name, c in
                           zip(emb.epsilon_names, t) if c != 0})
        raise ClassificationError(
            "bracket matrix is singular; first-class directions: "
            + json.dumps(combos, sort_keys=True))
    product = emb.sigma @ sigma_inv
    assert product == RationalMatrix.identity(emb.sigma.rows)
    ctx = DiracBracketContext(emb.space, emb.epsilons,
                              emb.sigma, sigma_inv)
    payload = {
        "epsilon_names": list(emb.epsilon_names),
        "sigma": _fmt_matrix(emb.sigma),
        "sigma_inverse": _fmt_matrix(sigma_inv),
        "coordinate_names": _coordinate_names(nl),
        "dirac_bracket_matrix": _fmt_matrix(coordinate_bracket_matrix(ctx)),
    }
    _write_json(payload, args.output)
    return 0


def _parse_number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed number {text!r}")


def _parse_vector(text: str, expected: int, what: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != expected:
        raise UsageError(f"{what}: expected {expected} entries, got {len(parts)}")
    try:
        return [Fraction(p.strip()) for p in parts]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{what}: malformed rational")


def _write_trajectory(traj: dyn.Trajectory, names: list[str], path: str | None,
                      fmt: str):
    monitor_names = sorted(traj.monitors)
    if fmt == "json":
        payload = {
            "t": [float(t) for t in traj.times],
            "states": {name: [float(x) for x in traj.states[:, i]]
                       for i, name in enumerate(names)},
            "monitors": {name: [float(x) for x in traj.monitors[name]]
                         for name in monitor_names},
        }
        _write_json(payload, path)
        return
    lines = [",".join(["t"] + names + monitor_names)]
    for i in range(traj.times.shape[0]):
        row = [f"{traj.times[i]:.17g}"]
        row += [f"{x:.17g}" for x in traj.states[i]]
        row += [f"{traj.monitors[name][i]:.17g}" for name in monitor_names]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    nl, preset = _load_netlist(args)
    cs = circ.build_spaces(nl)
    dt = _parse_number(args.dt)
    if dt <= 0:
        raise UsageError("--dt must be positive")
    steps = args.steps
    if steps <= 0:
        raise UsageError("--steps must be positive")

    if args.field == "reduced":
        red = circ.reduced_system(cs)
        d2 = red.field.dim
        if args.x0:
            x0 = [float(x) for x in _parse_vector(args.x0, d2, "--x0")]
        else:
            x0 = [1.0] + [0.0] * (d2 - 1) if d2 else []
        field = dyn.lower_to_float(red.field)
        monitors = [dyn.lower_observable("energy", red.hamiltonian)]
        names = [f"z{i + 1}" for i in range(d2)]
        traj = dyn.integrate_rk4(field, x0, dt, steps, monitors)
    else:
        emb = circ.embed(cs, preset=preset)
        cls = classify(emb.constraint_set)
        free = [i for i in emb.constraint_set.primary_indices
                if i not in set(cls.chi_prime_indices)]
        if args.lambdas:
            lam = _parse_vector(args.lambdas, len(free), "--lambdas")
        else:
            lam = [Fraction(0)] * len(free)
        energy = circ.embedded_energy(cs)
        exact = foliated_field(cls, energy, lam)
        field = dyn.lower_to_float(exact)
        names = _coordinate_names(nl)
        if args.x0:
            x0 = [float(x) for x in _parse_vector(args.x0, 4 * cs.n, "--x0")]
        else:
            red = circ.reduced_system(cs)
            lead = red.leaf_basis.col(0) if red.leaf_basis.cols else (0,) * (3 * cs.n)
            x0 = [float(x) for x in lead] + [0.0] * cs.n
        monitors = [dyn.lower_observable("energy", energy)]
        for name, obs in zip(emb.epsilon_names, emb.epsilons):
            monitors.append(dyn.lower_observable(name, obs))
        traj = dyn.integrate_rk4(field, x0, dt, steps, monitors)
    _write_trajectory(traj, names, args.output, args.format)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    ok = run_selftest(args.filter)
    return 0 if ok else 3


def _build_parser() -> _Parser:
    parser = _Parser(prog="diracsim",
                     description="Constraint analysis and simulation of constant "
                                 "Dirac dynamical systems (LC-circuit frontend).")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", help="netlist JSON path")
        p.add_argument("--output", help="write the report here (default stdout)")
        p.add_argument("--mode", choices=("physical", "general"),
                       default="physical")
        p.add_argument("--preset", help="named constraint-ordering preset "
                                        "(paper-fig1 also selects the shipped fixture)")

    p = sub.add_parser("analyze", help="constraint chains, loop classes, classification")
    common(p)
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bracket", help="bracket matrix, its inverse, coordinate Dirac brackets")
    common(p)
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("simulate", help="integrate the reduced or foliated dynamics")
    common(p)
    p.add_argument("--field", choices=("reduced", "foliated"), default="reduced")
    p.add_argument("--dt", default="1/1000", help="time step (rational or float)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--x0", help="comma-separated exact initial state")
    p.add_argument("--lambdas", help="comma-separated free multiplier values")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--filter", help="only run checks whose name contains this")
    p.set_defaults(func=cmd_selftest)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (circ.NetlistError, circ.NonSymplecticLeafError, ClassificationError,
            SingularMatrixError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
