"""diracsim: constraint analysis and simulation of constant Dirac dynamical systems.

Exact rational constraint algebra (subspace lattice, linear symplectic
geometry, Dirac structures, constraint algorithms, Dirac brackets) with an
LC-circuit frontend and a floating-point integrator for the final-stage
dynamics.
"""

from .ratlin import (
    EMPTY,
    AffineSubspace,
    Rational,
    RationalMatrix,
    Subspace,
    kernel_backend,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace",
    "EMPTY",
    "Rational",
    "RationalMatrix",
    "Subspace",
    "kernel_backend",
    "__version__",
]
