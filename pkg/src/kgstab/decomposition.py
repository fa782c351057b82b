"""Split a field state into standing-wave amplitudes plus a constrained remainder.

Given (u, v) we look for z in C^{2n} with

    (u, v) = Phi[z] + Xi,    Omega(d_{JA} Phi[z] | Xi) = 0   for all J, A,

where Omega(U|V) = 2 <J^{-1} U | V> and J = [[0, -1], [1, 0]].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .boundstates import FieldState, phi_derivatives, phi_total
from .errors import ConvergenceError, OutOfRange
from .spectral import Discretization, SchrodingerOperator


def symplectic_form(disc: Discretization, X: FieldState, Y: FieldState) -> float:
    """Omega(X|Y) = 2 (<X_v|Y_u> - <X_u|Y_v>)."""
    if np.shape(X.u) != np.shape(Y.u):
        raise ValueError("states live on different grids")
    return 2.0 * (disc.inner(X.v, Y.u) - disc.inner(X.u, Y.v))


@dataclass(frozen=True)
class ModeDecomposition:
    z: np.ndarray
    xi: FieldState
    residuals: np.ndarray  # F_{JA}, ordered (1R, 1I, 2R, 2I, ...)
    iterations: int
    converged: bool = True

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0


def constraint_values(disc, families, state: FieldState, z) -> np.ndarray:
    """F_{JA}(u, v, z) = Omega(d_{JA} Phi[z] | (u, v) - Phi[z])."""
    rem = state - phi_total(families, z)
    return np.array([symplectic_form(disc, d, rem) for d in phi_derivatives(families, z)])


def linear_guess(disc, families, state: FieldState) -> np.ndarray:
    """Amplitudes from the z = 0 linearisation of the constraints."""
    n = len(families)
    z0 = np.zeros(2 * n, complex)
    derivs = phi_derivatives(families, z0)
    for J in range(1, 2 * n + 1):
        fam = families[(J - 1) % n]
        om = fam.omega_at(0.0) * (1 if J <= n else -1)
        pr = symplectic_form(disc, derivs[2 * (J - 1)], state)
        pi = symplectic_form(disc, derivs[2 * (J - 1) + 1], state)
        z0[J - 1] = complex(-pi, pr) / (4.0 * om)
    return z0


def _pack(z):
    return np.column_stack([z.real, z.imag]).ravel()


def _unpack(x):
    return x[0::2] + 1j * x[1::2]


def decompose(state: FieldState, families, disc: Discretization, tol: float = 1e-10,
              max_iter: int = 40, fallback: bool = False) -> ModeDecomposition:
    """Solve the 4n real constraints by chord-Newton from the linear guess.

    The Jacobian is a finite-difference approximation in the real unknowns,
    refreshed whenever the chord iteration stops contracting.
    """
    z = linear_guess(disc, families, state)
    scale = max(1.0, math.sqrt(disc.inner(state.u, state.u) + disc.inner(state.v, state.v)))

    def F(x):
        return constraint_values(disc, families, state, _unpack(x))

    def jac(x, f0):
        m = len(x)
        Jm = np.empty((m, m))
        for k in range(m):
            h = 1e-6 * max(abs(x[k]), 1e-2)
            xp = x.copy()
            xp[k] += h
            xm = x.copy()
            xm[k] -= h
            Jm[:, k] = (F(xp) - F(xm)) / (2 * h)
        return Jm

    x = _pack(z)
    f = None
    Jm = None
    prev = math.inf
    it = 0
    try:
        f = F(x)
        for it in range(1, max_iter + 1):
            err = float(np.max(np.abs(f)))
            if err < tol * scale:
                break
            if Jm is None or err > 0.5 * prev:
                Jm = jac(x, f)
            prev = err
            x = x - np.linalg.solve(Jm, f)
            f = F(x)
        else:
            raise ConvergenceError("decomposition did not converge: state outside the ansatz radius")
        if not np.all(np.isfinite(x)):
            raise ConvergenceError("decomposition diverged")
    except Exception as exc:  # OutOfRange, ConvergenceError, LinAlgError
        if not fallback:
            if isinstance(exc, ConvergenceError):
                raise
            raise ConvergenceError(f"decomposition failed: {exc}") from exc
        warnings.warn(f"decomposition fell back to the linear projection: {exc}")
        z = linear_guess(disc, families, state)
        try:
            xi = state - phi_total(families, z)
        except OutOfRange as exc2:
            raise ConvergenceError(f"decomposition failed: {exc2}") from exc2
        return ModeDecomposition(z, xi, constraint_values(disc, families, state, z), it, False)
    z = _unpack(x)
    xi = state - phi_total(families, z)
    xi = FieldState(xi.u, xi.v, state.time)
    return ModeDecomposition(z, xi, f, it, True)


def energy(state: FieldState, H: SchrodingerOperator, mass: float) -> float:
    """<B^2 u|u> + <v|v> + (1/2) int |u|^4, with B^2 = H + m^2."""
    disc = H.disc
    u, v = state.u, state.v
    b2u = H @ u + mass**2 * u
    return disc.inner(b2u, u) + disc.inner(v, v) + 0.5 * disc.quartic(u)


__all__ = ["symplectic_form", "ModeDecomposition", "decompose", "energy", "constraint_values", "linear_guess"]
