"""Desk-scale numerics for small solutions of the cubic Klein-Gordon equation with a trapping potential.

Submodules:

- spectral: discretized H = -Laplacian + V, point spectrum, functions of B, spectral densities
- boundstates: nonlinear bound-state branches and the standing-wave map Phi
- decomposition: symplectic form, mode decomposition, energy
- resonance: multi-index combinatorics of resonant monomials
- fgr: Fermi golden rule coefficients and the positivity check
- dynamics: toy model and full NLKG time stepping with trajectory diagnostics

Importing the package itself stays cheap (no numpy), so the command line
can cap BLAS threads before any numerical library loads.
"""

from .errors import ConvergenceError, DomainError, HypothesisViolation, OutOfRange

__version__ = "0.1.0"


def backend_name() -> str:
    from ._accel import backend_name as _name

    return _name()


__all__ = [
    "backend_name", "ConvergenceError", "DomainError", "HypothesisViolation", "OutOfRange", "__version__",
]
