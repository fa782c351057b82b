"""Independent reference computations used to judge the production routines.

Nothing here calls the production solvers: the resonance oracle enumerates
pair multi-indices literally, the eigenvalue oracle shoots the radial ODE,
the density oracle integrates Fourier transforms by adaptive quadrature.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


# ---------------------------------------------------------------------------
# combinatorics


def literal_pair_indices(d: int, r: int):
    """All pair multi-indices on d labels with total <= r, as a count array."""
    pairs = [(L, J) for L in range(d) for J in range(d) if L != J]
    blocks = []
    for t in range(r + 1):
        combos = np.array(list(itertools.combinations_with_replacement(range(len(pairs)), t)), dtype=np.int64)
        counts = np.zeros((len(combos), len(pairs)), dtype=np.int64)
        if t:
            rows = np.repeat(np.arange(len(combos)), t)
            np.add.at(counts, (rows, combos.ravel()), 1)
        blocks.append(counts)
    return pairs, np.concatenate(blocks)


def literal_table(signed_omegas, mass: float, r: int, tol: float | None = None):
    """M(r), its minimal elements, Lambda and the M_L partition by brute force.

    M(r) is the image of every class-K multi-index (K = 1..2n) under
    m -> (mu, nu) with mu_L = sum_J m_LJ and nu_J = sum_L m_LJ + delta_JK.
    """
    w = np.asarray(signed_omegas, dtype=float)
    d = len(w)
    tol = 1e-6 * mass if tol is None else tol
    pairs, counts = literal_pair_indices(d, r)
    diffs = np.array([w[L] - w[J] for L, J in pairs])
    Lmat = np.zeros((len(pairs), d), dtype=np.int64)
    Jmat = np.zeros((len(pairs), d), dtype=np.int64)
    for i, (L, J) in enumerate(pairs):
        Lmat[i, L] = 1
        Jmat[i, J] = 1
    freq = counts @ diffs
    mu = counts @ Lmat
    nu0 = counts @ Jmat
    rows = []
    for K in range(d):
        keep = np.abs(freq - w[K]) > mass + tol
        nu = nu0[keep].copy()
        nu[:, K] += 1
        rows.append(np.concatenate([mu[keep], nu], axis=1))
    allrows = np.unique(np.concatenate(rows), axis=0)
    M = {(tuple(int(x) for x in a[:d]), tuple(int(x) for x in a[d:])) for a in allrows}

    # minimal elements, level by level: a is dominated iff some minimal b <= a
    minimal = []
    base = np.zeros((0, 2 * d), dtype=np.int64)
    totals = allrows.sum(axis=1)
    for t in np.unique(totals):
        cand = allrows[totals == t]
        if base.shape[0]:
            dom = np.zeros(len(cand), dtype=bool)
            for b in base:
                dom |= np.all(cand >= b, axis=1)
            cand = cand[~dom]
        minimal.extend((tuple(int(x) for x in a[:d]), tuple(int(x) for x in a[d:])) for a in cand)
        base = np.concatenate([base, cand])
    M_min = set(minimal)

    Ls = {}
    for mu_, nu_ in M_min:
        L = float((np.array(nu_) - np.array(mu_)) @ w)
        key = next((k for k in Ls if abs(k - L) <= 1e-9 * max(1.0, mass)), L)
        Ls.setdefault(key, set()).add((mu_, nu_))
    return M, M_min, sorted(Ls), Ls


def h3_exhaustive(omegas, mass: float, order: int, tol: float):
    """Integer vectors k with 0 < |k|_1 <= order and ||k.w| - m| < tol."""
    w = np.asarray(omegas, dtype=float)
    out = []
    for k in itertools.product(range(-order, order + 1), repeat=len(w)):
        l1 = sum(abs(x) for x in k)
        if 0 < l1 <= order and abs(abs(float(np.dot(k, w))) - mass) < tol:
            out.append(tuple(k))
    return sorted(out)


def h3_N(omegas, mass: float) -> int:
    w = list(omegas)
    vals = [a + b for i, a in enumerate(w) for b in w[: i + 1]] + [a - b for i, a in enumerate(w) for b in w[:i]]
    g = min(v for v in vals if v > 0)
    return math.ceil(2 * mass / g - 1e-12)


# ---------------------------------------------------------------------------
# spectra


def shooting_eigenvalues(V, R: float, e_lo: float, e_hi: float, n_scan: int = 400, rtol: float = 1e-12):
    """Dirichlet eigenvalues of -w'' + V(r) w on (0, R) in [e_lo, e_hi] by shooting from r = 0."""

    def end_value(e):
        sol = solve_ivp(lambda r, y: [y[1], (V(r) - e) * y[0]], (0.0, R), [0.0, 1.0],
                        method="DOP853", rtol=rtol, atol=1e-14)
        # normalise the exponential growth away; only the sign and zero matter
        return sol.y[0, -1] / max(1.0, np.max(np.abs(sol.y[0])))

    grid = np.linspace(e_lo, e_hi, n_scan)
    vals = [end_value(e) for e in grid]
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(end_value, a, b, xtol=1e-14, rtol=1e-14))
    return np.array(roots)


def radial_fourier(u, k: float, r_max: float) -> float:
    """Unitary 3D Fourier transform of a radial function at |xi| = k."""
    val, _ = quad(lambda r: u(r) * r * math.sin(k * r), 0.0, r_max, limit=400, epsabs=1e-14, epsrel=1e-12)
    return (2 * math.pi) ** -1.5 * 4 * math.pi * val / k


def free_sphere_density(u, lam: float, mass: float, r_max: float) -> float:
    """<delta(B - lam) u | u> for V = 0: (lam / k) * 4 pi k^2 |u^(k)|^2 with k^2 = lam^2 - m^2."""
    k = math.sqrt(lam * lam - mass * mass)
    return lam / k * 4 * math.pi * k * k * radial_fourier(u, k, r_max) ** 2


# ---------------------------------------------------------------------------
# reduced decay laws


def reduced_ode(y0: float, c: float, times, power: int) -> np.ndarray:
    """Numerical solution of y' = -2 pi c y^power."""
    times = np.asarray(times, dtype=float)
    sol = solve_ivp(lambda t, y: [-2 * math.pi * c * y[0] ** power], (0.0, float(times[-1])), [y0],
                    t_eval=times, method="DOP853", rtol=1e-11, atol=1e-16)
    return sol.y[0]


def gaussian_circle_constant(amplitude: float, width: float) -> float:
    """(1/2) int_{|xi|=1} |G^|^2 for G = A exp(-|x|^2 / 2 s^2) on R^2: pi A^2 s^4 exp(-s^2)."""
    return math.pi * amplitude**2 * width**4 * math.exp(-width * width)


__all__ = [
    "literal_pair_indices", "literal_table", "h3_exhaustive", "h3_N", "shooting_eigenvalues",
    "radial_fourier", "free_sphere_density", "reduced_ode", "gaussian_circle_constant",
]
