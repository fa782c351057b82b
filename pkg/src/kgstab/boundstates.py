"""Nonlinear bound states bifurcating from the eigenvalues of H.

For a simple eigenpair (e_j, phi_j) we solve

    H Q + |Q|^2 Q = E Q,    Q = z phi_j + q,    <q|phi_j> = 0

for real z > 0 by Newton continuation in z.  Every other phase follows from
gauge covariance: Q at e^{i theta} z is e^{i theta} times Q at |z|.  The
family is stored as Q_z = z * g(|z|^2) with g real, interpolated by a cubic
spline in s = |z|^2 (the variable in which g is analytic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, OutOfRange
from .spectral import SchrodingerOperator, SpectralData


@dataclass(frozen=True)
class FieldState:
    u: np.ndarray
    v: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if np.shape(self.u) != np.shape(self.v):
            raise ValueError("u and v must share the grid")

    def __add__(self, other):
        return FieldState(self.u + other.u, self.v + other.v, self.time)

    def __sub__(self, other):
        return FieldState(self.u - other.u, self.v - other.v, self.time)

    def scale(self, c):
        return FieldState(c * self.u, c * self.v, self.time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))

    @classmethod
    def zeros(cls, n, time=0.0):
        return cls(np.zeros(n, complex), np.zeros(n, complex), time)


@dataclass(frozen=True)
class StandingWavePair:
    upper: np.ndarray
    lower: np.ndarray
    J: int
    omega: float  # signed frequency of the pair

    def as_state(self) -> FieldState:
        return FieldState(self.upper, self.lower)


@dataclass(frozen=True, eq=False)
class BoundStateFamily:
    """One continued branch j: real samples z_k > 0 with profiles and energies."""

    branch_index: int  # 1-based
    mass: float
    eigenvalue: float
    phi: np.ndarray
    amplitudes: np.ndarray  # |z| samples, increasing, first is 0
    profiles: np.ndarray  # g(|z|^2) = Q / |z| at each sample, shape (k, n)
    energies: np.ndarray
    residuals: np.ndarray
    a0: float  # empirical continuation radius
    weight: float
    terminated: str = ""

    @property
    def z_max(self) -> float:
        return float(self.amplitudes[-1])

    @property
    def n_samples(self) -> int:
        return len(self.amplitudes)

    def Q(self, k: int) -> np.ndarray:
        return self.amplitudes[k] * self.profiles[k]

    def q(self, k: int) -> np.ndarray:
        return self.Q(k) - self.amplitudes[k] * self.phi

    def omega(self, k: int) -> float:
        return math.sqrt(self.mass**2 + self.energies[k])

    # -- interpolation in s = |z|^2 ------------------------------------

    @property
    def _s(self):
        return self.amplitudes**2

    def _spline(self):
        sp_ = self.__dict__.get("_cached_spline")
        if sp_ is None:
            s = self._s
            if len(s) < 2:
                sp_ = (None, None)
            else:
                sp_ = (CubicSpline(s, self.profiles, axis=0), CubicSpline(s, self.energies))
            object.__setattr__(self, "_cached_spline", sp_)
        return sp_

    def _check(self, a):
        if a > self.z_max * (1 + 1e-12):
            raise OutOfRange(f"|z| = {a:.4g} exceeds continued range {self.z_max:.4g} of branch {self.branch_index}")

    def profile(self, a: float) -> np.ndarray:
        self._check(a)
        g, _ = self._spline()
        if g is None:
            return self.profiles[0].copy()
        return g(a * a)

    def energy(self, a: float) -> float:
        self._check(a)
        _, e = self._spline()
        if e is None:
            return float(self.energies[0])
        return float(e(a * a))

    def omega_at(self, a: float) -> float:
        return math.sqrt(self.mass**2 + self.energy(a))

    def Q_at(self, z: complex) -> np.ndarray:
        """Q_{jz} for complex z by gauge covariance."""
        a = abs(z)
        return z * self.profile(a)

    # -- persistence ----------------------------------------------------

    def save(self, path) -> None:
        np.savez(path, branch_index=self.branch_index, mass=self.mass, eigenvalue=self.eigenvalue,
                 phi=self.phi, amplitudes=self.amplitudes, profiles=self.profiles,
                 energies=self.energies, residuals=self.residuals, a0=self.a0,
                 weight=self.weight, terminated=self.terminated)

    @classmethod
    def load(cls, path) -> "BoundStateFamily":
        with np.load(path) as f:
            return cls(int(f["branch_index"]), float(f["mass"]), float(f["eigenvalue"]), f["phi"],
                       f["amplitudes"], f["profiles"], f["energies"], f["residuals"],
                       float(f["a0"]), float(f["weight"]), str(f["terminated"]))

    def to_csv(self, path) -> None:
        """Summary table: |z|, E, ||q||."""
        qn = [math.sqrt(self.weight) * np.linalg.norm(self.q(k)) for k in range(self.n_samples)]
        data = np.column_stack([self.amplitudes, self.energies, qn])
        np.savetxt(path, data, delimiter=",", header="abs_z,E,norm_q", comments="")


def default_path(a_max: float = 0.5, a_min: float = 1e-4, per_decade: int = 24) -> np.ndarray:
    """Geometric amplitude path starting at 0."""
    decades = math.log10(a_max / a_min)
    k = max(2, int(math.ceil(decades * per_decade)) + 1)
    return np.concatenate([[0.0], np.geomspace(a_min, a_max, k)])


def _residual(H, phi, inv_r2, a, q, E):
    Q = a * phi + q
    return H @ Q + Q**3 * inv_r2 - E * Q, Q


def _newton(H, phi, inv_r2, weight, a, q, E, tol, max_steps):
    n = len(phi)
    wphi = weight * phi
    base = H.matrix if not H.is_dense else None
    last = math.inf
    dnorm = math.inf
    for step in range(max_steps + 1):
        F, Q = _residual(H, phi, inv_r2, a, q, E)
        c = float(wphi @ q)
        rnorm = math.sqrt(weight) * float(np.linalg.norm(F)) + abs(c)
        # the absolute residual test alone is met by q = 0 at tiny |z|, so
        # also require the last correction to sit at roundoff level
        if rnorm < tol and dnorm <= 1e-10 * float(np.linalg.norm(Q)):
            return q, E, rnorm, step
        if step == max_steps or not np.isfinite(rnorm) or (step > 3 and rnorm > 10 * last):
            break
        last = rnorm
        diag = 3.0 * Q * Q * inv_r2 - E
        if base is not None:
            A = sp.bmat([[base + sp.diags(diag), -Q[:, None]], [wphi[None, :], None]], format="csc")
            delta = spla.spsolve(A, -np.concatenate([F, [c]]))
        else:
            A = np.zeros((n + 1, n + 1))
            A[:n, :n] = H.matrix + np.diag(diag)
            A[:n, n] = -Q
            A[n, :n] = wphi
            delta = np.linalg.solve(A, -np.concatenate([F, [c]]))
        if not np.all(np.isfinite(delta)):
            break
        q = q + delta[:n]
        E = E + delta[n]
        dnorm = float(np.linalg.norm(delta[:n])) + abs(delta[n])
    raise ConvergenceError(f"Newton failed at |z| = {a:.4g} (residual {rnorm:.2e})")


def continue_branch(spec: SpectralData, H: SchrodingerOperator, j: int,
                    z_path: Sequence[float] | None = None, tol: float = 1e-10,
                    max_steps: int = 50) -> BoundStateFamily:
    """Continue branch j (1-based) along increasing real amplitudes.

    Continuation stops at the first amplitude where Newton fails or the
    energy reaches the continuum threshold E = 0; the last converged
    amplitude is recorded as the empirical radius ``a0``.
    """
    if not 1 <= j <= spec.n:
        raise ValueError(f"branch index {j} outside 1..{spec.n}")
    path = default_path() if z_path is None else np.asarray(z_path)
    if np.iscomplexobj(path):
        # only moduli matter; phases are restored by gauge covariance
        path = np.abs(path)
    path = np.asarray(path, dtype=float)
    if np.any(np.diff(path) <= 0):
        raise ValueError("amplitude path must be strictly increasing")
    if path[0] != 0.0:
        path = np.concatenate([[0.0], path])
    disc = spec.disc
    phi = spec.eigenfunctions[j - 1]
    e_j = float(spec.eigenvalues[j - 1])
    inv_r2 = disc.inv_r2
    w = disc.weight

    amps, profs, energies, res = [0.0], [phi.copy()], [e_j], [0.0]
    q = np.zeros_like(phi)
    E = e_j
    reason = "path exhausted"
    prev_a = 0.0
    prev_q, prev_E = q, E
    for a in path[1:]:
        # secant predictor in s = a^2 for q and E
        if len(amps) >= 2 and prev_a > 0:
            ratio = (a / prev_a) ** 2
            q_guess = prev_q * ratio ** 1.5
            E_guess = e_j + (prev_E - e_j) * ratio
        else:
            q_guess, E_guess = prev_q, prev_E
        try:
            q_new, E_new, rn, _ = _newton(H, phi, inv_r2, w, a, q_guess, E_guess, tol, max_steps)
        except ConvergenceError:
            reason = "newton divergence"
            break
        if E_new >= 0.0:
            reason = "reached continuum threshold"
            break
        amps.append(float(a))
        profs.append((a * phi + q_new) / a)
        energies.append(E_new)
        res.append(rn)
        prev_a, prev_q, prev_E = a, q_new, E_new
    return BoundStateFamily(j, spec.mass, e_j, phi.copy(), np.array(amps), np.array(profs),
                            np.array(energies), np.array(res), amps[-1], w, reason)


# ---------------------------------------------------------------------------
# standing waves and their superposition


def _family_for(families, J: int):
    n = len(families)
    if not 1 <= J <= 2 * n:
        raise ValueError(f"mode index {J} outside 1..{2 * n}")
    fam = families[(J - 1) % n]
    sign = 1.0 if J <= n else -1.0
    return fam, sign


def standing_wave(family_or_list, J: int, z: complex) -> StandingWavePair:
    """Phi_J[z] = (Q_{Jz}, i w_{Jz} Q_{Jz}); J > n carries the negative frequency."""
    families = family_or_list if isinstance(family_or_list, (list, tuple)) else [family_or_list]
    fam, sign = _family_for(families, J)
    a = abs(z)
    Q = fam.Q_at(complex(z))
    om = sign * fam.omega_at(a)
    return StandingWavePair(Q, 1j * om * Q, J, om)


def phi_total(families, z) -> FieldState:
    z = np.asarray(z, dtype=complex)
    n = len(families)
    if z.shape != (2 * n,):
        raise ValueError(f"expected {2 * n} amplitudes")
    npts = len(families[0].phi)
    u = np.zeros(npts, complex)
    v = np.zeros(npts, complex)
    for J in range(1, 2 * n + 1):
        if z[J - 1] == 0:
            continue
        pair = standing_wave(families, J, z[J - 1])
        u += pair.upper
        v += pair.lower
    return FieldState(u, v)


def phi_derivatives(families, z, step: float | None = None):
    """Central differences of Phi[z] in Re z_J and Im z_J.

    Returns a list indexed by 2*(J-1) + A with A = 0 (real part) or 1
    (imaginary part); each entry is a FieldState.  Only Phi_J depends on
    z_J, so each derivative needs two evaluations of a single standing wave.
    """
    z = np.asarray(z, dtype=complex)
    out = []
    for J in range(1, len(z) + 1):
        zj = z[J - 1]
        h = step if step is not None else 1e-5 * max(abs(zj), 1e-3)
        fam, _ = _family_for(families, J)
        for dz in (h, 1j * h):
            # one-sided near the edge of the continued range
            if abs(zj + dz) > fam.z_max:
                p0 = standing_wave(families, J, zj - dz)
                p1 = standing_wave(families, J, zj)
                denom = h
            else:
                p0 = standing_wave(families, J, zj - dz)
                p1 = standing_wave(families, J, zj + dz)
                denom = 2 * h
            out.append(FieldState((p1.upper - p0.upper) / denom, (p1.lower - p0.lower) / denom))
    return out


def nlkg_residual(H: SchrodingerOperator, mass: float, pair: StandingWavePair) -> float:
    """Residual of u(t) = e^{i w t} Q in  u'' + H u + m^2 u + |u|^2 u = 0 (t = 0, L^2 norm)."""
    disc = H.disc
    Q = pair.upper
    acc = -(pair.omega**2) * Q
    r = acc + H @ Q + mass**2 * Q + np.abs(Q) ** 2 * Q * disc.inv_r2
    return disc.norm(r)


__all__ = [
    "FieldState", "StandingWavePair", "BoundStateFamily", "continue_branch", "default_path",
    "standing_wave", "phi_total", "phi_derivatives", "nlkg_residual",
]
