"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Every check pins its tolerance internally (exact equality for rational
results, the stated numerical bounds for the float-side criteria); the
details appear with ``pytest -s`` and in the CLI selftest output.
"""

import pytest

from diracsim.selftest import ALL_CHECKS

CRITERIA = {
    "fig1-chain": "criterion 1: constraint chain dims and final equations",
    "fig1-sigma": "criterion 2: bracket-matrix reproduction",
    "fig1-dirac-bracket": "criterion 3: coordinate Dirac brackets",
    "fig1-reduced-ode": "criterion 4: reduced dynamics and oscillation",
    "stop-index-corpus": "criterion 5: stop-index theorem on the corpus",
    "negative-capacitance-m5": "criterion 6: negative-capacitance chain",
    "leaf-symplecticity-corpus": "criterion 7: leaf symplecticity",
    "operator-identity": "criterion 8: flat/orthogonal operator identity",
    "dirac-bracket-algebra": "criterion 9: Dirac-bracket algebra",
    "leaf-independence": "criterion 10: leaf independence and tangency",
    "cad-equivalences": "criterion 11: algorithm equivalences",
    "rk4-order": "criterion 12: integrator order",
}


@pytest.mark.parametrize("name,func", ALL_CHECKS, ids=[n for n, _ in ALL_CHECKS])
def test_acceptance(name, func):
    ok, detail = func()
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line)
    assert ok, f"{CRITERIA[name]} failed: {detail}"


def test_every_criterion_is_covered():
    assert sorted(CRITERIA) == sorted(name for name, _ in ALL_CHECKS)
