"""Discretized Schrodinger operator H = -Laplacian + V and its spectral data.

Fields live on a uniform interior grid.  In ``radial3d`` geometry a radial
function u(r) on R^3 is stored as w(r) = r u(r); the radial Laplacian then
becomes the plain second derivative in r with w(0) = 0, and the L^2(R^3)
inner product is ``4 pi h sum(w1 * conj(w2))``.  In ``line1d`` geometry the
field is stored directly on [-R, R].

All inner products follow the real convention <f|g> = Re int f conj(g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import kernels
from .errors import ConvergenceError, DomainError, HypothesisViolation

GEOMETRIES = ("radial3d", "line1d")
STENCILS = ("fd4", "fd2", "sine")

# dense eigendecompositions above this size switch to Lanczos
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class Discretization:
    geometry: str = "radial3d"
    n_points: int = 512
    domain_radius: float = 40.0
    boundary: str = "dirichlet"
    sponge_width: float = 0.0
    sponge_strength: float = 0.0
    stencil: str = "fd4"

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.stencil not in STENCILS:
            raise ValueError(f"unknown stencil {self.stencil!r}")
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if not self.domain_radius > 0:
            raise ValueError("domain_radius must be positive")
        if self.boundary not in ("dirichlet", "sponge"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "sponge":
            if not 0 < self.sponge_width < self.domain_radius:
                raise ValueError("sponge width must lie in (0, domain_radius)")
            if self.sponge_strength < 0:
                raise ValueError("sponge strength must be nonnegative")

    @property
    def spacing(self) -> float:
        length = self.domain_radius if self.geometry == "radial3d" else 2 * self.domain_radius
        return length / (self.n_points + 1)

    @cached_property
    def grid(self) -> np.ndarray:
        i = np.arange(1, self.n_points + 1)
        if self.geometry == "radial3d":
            return i * self.spacing
        return -self.domain_radius + i * self.spacing

    @property
    def weight(self) -> float:
        """Quadrature weight turning Euclidean sums into L^2 integrals."""
        if self.geometry == "radial3d":
            return 4.0 * math.pi * self.spacing
        return self.spacing

    @cached_property
    def inv_r2(self) -> np.ndarray:
        # |u|^2 u in the stored variable: w |w|^2 / r^2
        if self.geometry == "radial3d":
            return 1.0 / self.grid**2
        return np.ones(self.n_points)

    def sponge_profile(self) -> np.ndarray:
        """Damping rate, cubic ramp from R - width to R; zero without sponge."""
        sigma = np.zeros(self.n_points)
        if self.boundary != "sponge":
            return sigma
        dist = np.abs(self.grid)
        start = self.domain_radius - self.sponge_width
        inside = dist > start
        sigma[inside] = self.sponge_strength * ((dist[inside] - start) / self.sponge_width) ** 3
        return sigma

    def without_sponge(self) -> "Discretization":
        return Discretization(self.geometry, self.n_points, self.domain_radius,
                              "dirichlet", 0.0, 0.0, self.stencil)

    # -- field algebra --------------------------------------------------

    def inner(self, f, g) -> float:
        """Real inner product Re int f conj(g)."""
        return float(self.weight * np.real(np.vdot(g, f)))

    def cinner(self, f, g) -> complex:
        """Sesquilinear pairing int f conj(g)."""
        return complex(self.weight * np.vdot(g, f))

    def norm(self, f) -> float:
        return math.sqrt(max(self.inner(f, f), 0.0))

    def to_physical(self, w) -> np.ndarray:
        """Undo the r-weighting of radial fields (u = w / r)."""
        if self.geometry == "radial3d":
            return w / self.grid
        return np.asarray(w)

    def from_physical(self, u) -> np.ndarray:
        if self.geometry == "radial3d":
            return u * self.grid
        return np.asarray(u)

    def quartic(self, w) -> float:
        """int |u|^4 dx."""
        a = np.abs(w) ** 2
        return float(self.weight * np.sum(a * a * self.inv_r2))


@dataclass(frozen=True)
class PotentialSpec:
    """Real potential: zero, Gaussian wells, or tabulated samples.

    A Gaussian well is ``depth * exp(-((x - center) / width)**2)``; for
    radial geometry ``x`` is the radius.
    """

    form: str = "zero"
    wells: tuple = ()
    samples: tuple | None = None

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def gaussian_well(cls, depth, width, center=0.0):
        return cls("gaussian_well", ((float(depth), float(width), float(center)),))

    @classmethod
    def sum_of_gaussians(cls, wells: Sequence[Sequence[float]]):
        return cls("sum_of_gaussians", tuple((float(d), float(w), float(c)) for d, w, c in wells))

    @classmethod
    def tabulated(cls, positions, values):
        return cls("tabulated", samples=(tuple(map(float, positions)), tuple(map(float, values))))

    def __post_init__(self):
        if self.form not in ("zero", "gaussian_well", "sum_of_gaussians", "tabulated"):
            raise ValueError(f"unknown potential form {self.form!r}")
        for _, width, _ in self.wells:
            if width <= 0:
                raise ValueError("well width must be positive")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.form == "tabulated":
            pos, val = (np.asarray(a) for a in self.samples)
            out = np.interp(x, pos, val, left=0.0, right=0.0)
        for depth, width, center in self.wells:
            out = out + depth * np.exp(-(((x - center) / width) ** 2))
        return out

    @property
    def min_width(self) -> float:
        if self.wells:
            return min(w for _, w, _ in self.wells)
        return math.inf

    def is_zero(self) -> bool:
        return self.form == "zero" or (not self.wells and self.samples is None)


def _kinetic(disc: Discretization):
    n, h = disc.n_points, disc.spacing
    if disc.stencil == "fd2":
        main = np.full(n, 2.0)
        off = np.full(n - 1, -1.0)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2
    if disc.stencil == "fd4":
        # odd reflection at both ends folds the ghost value onto the diagonal
        main = np.full(n, 30.0)
        main[0] = main[-1] = 29.0
        o1 = np.full(n - 1, -16.0)
        o2 = np.full(n - 2, 1.0)
        return sp.diags([o2, o1, main, o1, o2], [-2, -1, 0, 1, 2], format="csr") / (12 * h**2)
    # sine pseudo-spectral: exact Dirichlet Laplacian on the sampled modes
    length = (n + 1) * h
    k = np.arange(1, n + 1)
    idx = np.arange(1, n + 1)
    basis = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(idx, k) / (n + 1))
    return (basis * (np.pi * k / length) ** 2) @ basis.T


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    """Matrix representation of H on a Discretization (Dirichlet closure)."""

    disc: Discretization
    potential: np.ndarray
    matrix: object  # scipy csr matrix for FD stencils, dense array for "sine"

    @property
    def n(self) -> int:
        return self.disc.n_points

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def __matmul__(self, u):
        return self.matrix @ u

    def dense(self) -> np.ndarray:
        return self.matrix if self.is_dense else self.matrix.toarray()

    @cached_property
    def band_upper(self) -> np.ndarray:
        """Upper banded storage (scipy.linalg convention)."""
        if self.is_dense:
            raise TypeError("dense operator has no band form")
        width = 2 if self.disc.stencil == "fd4" else 1
        ab = np.zeros((width + 1, self.n))
        for off in range(width + 1):
            ab[width - off, off:] = self.matrix.diagonal(off)
        return ab

    @cached_property
    def eigh(self):
        """Full (eigenvalues, orthonormal eigenvectors), Euclidean normalisation."""
        if self.is_dense:
            return sla.eigh(self.matrix)
        return sla.eig_banded(self.band_upper, lower=False)

    def eigenvalues_in(self, lo: float, hi: float, vectors: bool = False):
        """Eigenpairs with eigenvalue in (lo, hi]."""
        if self.is_dense or "eigh" in self.__dict__:
            w, v = self.eigh
            sel = (w > lo) & (w <= hi)
            return (w[sel], v[:, sel]) if vectors else w[sel]
        vals = sla.eigvals_banded(self.band_upper, lower=False, select="v", select_range=(lo, hi))
        if not vectors:
            return vals
        # LAPACK's banded selective driver allocates an n x n work matrix, so
        # vectors come from inverse iteration on the banded factorisation
        return vals, self._inverse_iteration(vals)

    def _inverse_iteration(self, vals, sweeps=4):
        rng = np.random.default_rng(0)
        vecs = np.empty((self.n, len(vals)))
        for j, e in enumerate(vals):
            shift = e + 1e-10 * max(1.0, abs(e))
            x = rng.standard_normal(self.n)
            for _ in range(sweeps):
                x = np.real(self.solve_shifted(shift, x))
                x /= np.linalg.norm(x)
            vecs[:, j] = x
        q, _ = np.linalg.qr(vecs)
        # keep the sign of the iterated vectors
        signs = np.sign(np.sum(q * vecs, axis=0))
        signs[signs == 0] = 1
        return q * signs

    def solve_shifted(self, shift: complex, rhs: np.ndarray) -> np.ndarray:
        """Solve (H - shift) x = rhs for one or several right-hand sides."""
        if self.is_dense:
            return np.linalg.solve(self.matrix - shift * np.eye(self.n), rhs)
        ab = self.band_upper.astype(complex)
        ab[-1] -= shift
        width = ab.shape[0] - 1
        full = np.zeros((2 * width + 1, self.n), dtype=complex)
        full[: width + 1] = ab
        # lower half mirrors the upper (symmetric)
        for off in range(1, width + 1):
            full[width + off, : self.n - off] = ab[width - off, off:]
        return sla.solve_banded((width, width), full, rhs)


def assemble_operator(disc: Discretization, pot: PotentialSpec) -> SchrodingerOperator:
    """Assemble H = -d^2 + V on the grid.

    Raises ValueError when the grid cannot resolve the narrowest well
    (fewer than four points per width) and HypothesisViolation when the
    potential has not decayed to 1e-12 of its peak at the grid edge.
    """
    h = disc.spacing
    if pot.min_width < 4 * h:
        raise ValueError(
            f"grid spacing {h:.4g} too coarse for well width {pot.min_width:.4g} (need >= 4 points per width)"
        )
    v = pot(disc.grid)
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak > 0:
        edge = max(abs(v[0]), abs(v[-1])) if disc.geometry == "line1d" else abs(v[-1])
        if edge > 1e-12 * peak:
            raise HypothesisViolation("H1", f"potential at grid edge is {edge / peak:.2e} of peak")
    kin = _kinetic(disc)
    if isinstance(kin, np.ndarray):
        mat = kin + np.diag(v)
        asym = np.max(np.abs(mat - mat.T))
    else:
        mat = (kin + sp.diags(v)).tocsr()
        asym = abs(mat - mat.T).max() if mat.nnz else 0.0
    if asym > 1e-12 * max(1.0, abs(mat).max()):
        raise AssertionError("assembled operator is not symmetric")
    return SchrodingerOperator(disc, v, mat)


@dataclass(frozen=True, eq=False)
class SpectralData:
    mass: float
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # shape (n_modes, n_points), L^2-normalised
    disc: Discretization
    near_threshold: tuple = ()
    below_mass: tuple = ()

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def omegas(self) -> np.ndarray:
        return np.sqrt(self.mass**2 + self.eigenvalues)

    @property
    def signed_omegas(self) -> np.ndarray:
        w = self.omegas
        return np.concatenate([w, -w])

    def phi(self, J: int) -> np.ndarray:
        """Eigenfunction attached to the 1-based doubled index J in 1..2n."""
        return self.eigenfunctions[(J - 1) % self.n]


def point_spectrum(H: SchrodingerOperator, mass: float, degeneracy_tol: float = 1e-9) -> SpectralData:
    """Eigenpairs of H in (-m^2, 0) with L^2-orthonormal real eigenfunctions."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    m2 = mass * mass
    lower = float(np.min(H.potential)) - 1.0 if H.potential.size else -1.0
    lower = min(lower, -m2 - 1.0)
    vals, vecs = H.eigenvalues_in(lower, 0.0, vectors=True)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    below = tuple(float(e) for e in vals if e <= -m2)
    keep = vals > -m2
    vals, vecs = vals[keep], vecs[:, keep]
    if len(vals) > 1:
        gaps = np.diff(vals)
        if gaps.min() < degeneracy_tol * max(1.0, m2):
            j = int(np.argmin(gaps))
            raise HypothesisViolation(
                "H2", f"eigenvalues {vals[j]:.12g} and {vals[j + 1]:.12g} are degenerate within {gaps[j]:.2e}"
            )
    funcs = (vecs / math.sqrt(H.disc.weight)).T.copy()
    for f in funcs:
        # deterministic sign: largest-magnitude sample positive
        if f[np.argmax(np.abs(f))] < 0:
            f *= -1
    near = tuple(float(e) for e in vals if abs(e) < 1e-3 * m2)
    return SpectralData(float(mass), vals.copy(), funcs, H.disc, near, below)


def require_h2(spec: SpectralData) -> None:
    if spec.below_mass:
        raise HypothesisViolation("H2", f"eigenvalues below -m^2: {spec.below_mass}")


@dataclass(frozen=True)
class H3Report:
    N: int
    gap: float
    order: int
    violations: tuple
    tolerance: float

    @property
    def ok(self) -> bool:
        return not self.violations


def h3_gap(omegas) -> float:
    w = np.asarray(omegas, dtype=float)
    vals = []
    for j in range(len(w)):
        for l in range(j + 1):
            vals.extend((w[j] + w[l], w[j] - w[l]))
    pos = [v for v in vals if v > 1e-14]
    if not pos:
        raise AssertionError("no positive element in {w_j +- w_l}")
    return min(pos)


def check_h3(spec_or_omegas, order_cap: int | None = None, mass: float | None = None,
             resonance_tol: float | None = None) -> H3Report:
    """Smallest N with N * gap >= 2m and all integer k, |k|_1 <= 4N+6, with |k.w| = m."""
    if isinstance(spec_or_omegas, SpectralData):
        omegas, mass = spec_or_omegas.omegas, spec_or_omegas.mass
    else:
        omegas = np.asarray(spec_or_omegas, dtype=float)
        if mass is None:
            raise ValueError("mass required with a bare frequency vector")
    if len(omegas) == 0:
        raise ValueError("check_h3 needs at least one eigenvalue")
    tol = 1e-6 * mass if resonance_tol is None else resonance_tol
    gap = h3_gap(omegas)
    N = max(1, math.ceil(2 * mass / gap - 1e-12))
    order = 4 * N + 6
    if order_cap is not None:
        order = min(order, int(order_cap))
    hits = kernels.h3_scan(np.asarray(omegas, dtype=float), order, float(mass), float(tol))
    viol = tuple(sorted(tuple(int(x) for x in row) for row in hits))
    return H3Report(N, gap, order, viol, tol)


# ---------------------------------------------------------------------------
# functional calculus of B = sqrt(H + m^2)


def _b_values(evals, mass):
    mu = evals + mass * mass
    if np.any(mu <= 0):
        raise DomainError("H + m^2 is not positive: B is undefined")
    return np.sqrt(mu)


def _lanczos_apply(H: SchrodingerOperator, mass, f, u, steps=200):
    """f(B) u by Lanczos with full reorthogonalisation."""
    u = np.asarray(u, dtype=complex)
    beta0 = np.linalg.norm(u)
    if beta0 == 0:
        return np.zeros_like(u)
    n = H.n
    k = min(steps, n)
    Q = np.zeros((n, k), dtype=complex)
    alpha = np.zeros(k)
    beta = np.zeros(k)
    q = u / beta0
    for j in range(k):
        Q[:, j] = q
        w = H @ q
        alpha[j] = np.real(np.vdot(q, w))
        w = w - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
        w = w - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
        b = np.linalg.norm(w)
        if j + 1 < k:
            beta[j] = b
            if b < 1e-14 * beta0:
                k = j + 1
                break
            q = w / b
    T_vals, T_vecs = sla.eigh_tridiagonal(alpha[:k], beta[: k - 1])
    fv = f(_b_values(T_vals, mass))
    if not np.all(np.isfinite(fv)):
        raise DomainError("function is singular on the spectrum")
    coef = T_vecs @ (fv * T_vecs[0, :]) * beta0
    return Q[:, :k] @ coef


def apply_B_function(spec: SpectralData, H: SchrodingerOperator, f: Callable, u, method: str = "auto"):
    """Return f(B) u for a scalar function ``f`` of the eigenvalues of B."""
    if method == "auto":
        method = "dense" if H.n <= DENSE_LIMIT else "lanczos"
    if method == "lanczos":
        return _lanczos_apply(H, spec.mass, f, u)
    evals, evecs = H.eigh
    with np.errstate(divide="ignore", invalid="ignore"):
        fv = np.asarray(f(_b_values(evals, spec.mass)), dtype=complex)
    if not np.all(np.isfinite(fv)):
        raise DomainError("function is singular on the spectrum")
    u = np.asarray(u)
    coef = evecs.T @ u
    if coef.ndim == 1:
        return evecs @ (fv * coef)
    return evecs @ (fv[:, None] * coef)


def continuous_projection(spec: SpectralData, u) -> np.ndarray:
    """P_c u: remove the real span of {phi_j, i phi_j} for every eigenfunction."""
    u = np.asarray(u)
    out = u.astype(complex if np.iscomplexobj(u) else float, copy=True)
    w = spec.disc.weight
    for phi in spec.eigenfunctions:
        # <u|phi> phi + <u|i phi> i phi  ==  (int u phi) phi  for real phi
        out -= (w * (phi @ u)) * phi
    return out


# ---------------------------------------------------------------------------
# spectral density by limiting absorption


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    error: float
    confident: bool
    eps: tuple
    raw: tuple


def default_eps_schedule(mass: float, levels: int = 6) -> list:
    return [0.1 * mass * 2.0**-k for k in range(levels)]


def level_spacing(H: SchrodingerOperator, target: float) -> float:
    """Local spacing of the eigenvalues of H around ``target``."""
    delta = 0.05 * max(1.0, abs(target))
    for _ in range(30):
        vals = np.sort(np.asarray(H.eigenvalues_in(target - delta, target + delta)))
        if len(vals) >= 3:
            return float(np.median(np.diff(vals)))
        delta *= 2
    raise ConvergenceError("could not bracket eigenvalues near target")


def richardson(eps, values):
    """Two-point Richardson extrapolation of a first-order-in-eps sequence.

    Each consecutive pair (eps_k, eps_{k+1}) gives one linear extrapolant;
    the most refined is returned together with its change from the previous
    one as error estimate (inf when only one pair exists).
    """
    vals = [np.asarray(v) for v in values]
    if len(vals) < 2:
        raise ValueError("Richardson needs at least two levels")
    ext = []
    for k in range(len(vals) - 1):
        r = eps[k] / eps[k + 1]
        ext.append((r * vals[k + 1] - vals[k]) / (r - 1))
    best = ext[-1]
    if len(ext) == 1:
        return best, np.abs(best - vals[-1])
    return best, np.abs(ext[-1] - ext[-2])


def _density_raw(H, mass, lam, eps, vecs):
    """(2 lam / pi) * (R(lam^2 + i eps) - R(lam^2 - i eps)) / 2i as a Gram matrix."""
    target = lam * lam - mass * mass
    plus = H.solve_shifted(target + 1j * eps, vecs)
    minus = H.solve_shifted(target - 1j * eps, vecs)
    w = H.disc.weight
    # G[a, b] = int (delta u_a) conj(u_b)
    G = w * (vecs.conj().T @ (plus - minus)).T / (2j)
    return (2 * lam / math.pi) * G


def spectral_density_matrix(spec: SpectralData, H: SchrodingerOperator, vectors, lam: float,
                            eps_schedule=None, rtol: float = 1e-2, project: bool = True):
    """Hermitian matrix <delta(B - lam) u_a, u_b> with error estimate.

    ``vectors`` has shape (k, n_points).  Returns (matrix, error, confident, eps_used).
    """
    if lam <= spec.mass:
        raise DomainError(f"lam={lam} must exceed the mass {spec.mass}")
    vecs = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if project:
        vecs = np.stack([continuous_projection(spec, v) for v in vecs])
    eps_all = list(default_eps_schedule(spec.mass) if eps_schedule is None else eps_schedule)
    if any(b >= a for a, b in zip(eps_all, eps_all[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    floor = 3.0 * level_spacing(H, lam * lam - spec.mass**2)
    eps = [e for e in eps_all if e >= floor]
    confident = True
    if len(eps) < 2:
        confident = False
        eps = eps_all[:2] if len(eps) == 0 else [eps[0] * 2, eps[0]]
    raws = [_density_raw(H, spec.mass, lam, e, vecs.T) for e in eps]
    raws = [0.5 * (R + R.conj().T) for R in raws]
    best, err = richardson(eps, raws)
    scale = max(float(np.max(np.abs(best))), 1e-300)
    if float(np.max(err)) > rtol * scale + 1e-14:
        confident = False
    return best, err, confident, tuple(eps)


def spectral_density_form(spec: SpectralData, H: SchrodingerOperator, u, lam: float,
                          eps_schedule=None, rtol: float = 1e-2) -> DensityEstimate:
    """<delta(B - lam) u | u> by limiting absorption plus Richardson extrapolation."""
    mat, err, ok, eps = spectral_density_matrix(spec, H, [u], lam, eps_schedule, rtol)
    vecs = continuous_projection(spec, np.asarray(u, dtype=complex))[:, None]
    raw = tuple(float(np.real(_density_raw(H, spec.mass, lam, e, vecs)[0, 0])) for e in eps)
    return DensityEstimate(float(np.real(mat[0, 0])), float(err[0, 0]), ok, eps, raw)


def spectral_density_mollified(spec: SpectralData, H: SchrodingerOperator, u, lam: float,
                               bandwidth: float | None = None) -> float:
    """Cross-check route: Gaussian-mollified sum over the discrete spectrum of B."""
    evals, evecs = H.eigh
    b = _b_values(evals, spec.mass)
    coef = evecs.T @ continuous_projection(spec, np.asarray(u, dtype=complex))
    weight = H.disc.weight * np.abs(coef) ** 2
    if bandwidth is None:
        near = np.sort(np.abs(b - lam))[:3]
        idx = np.argsort(np.abs(b - lam))[:6]
        bandwidth = 3.0 * float(np.median(np.diff(np.sort(b[idx])))) if len(idx) > 2 else float(near[-1])
    kernel = np.exp(-0.5 * ((b - lam) / bandwidth) ** 2) / (bandwidth * math.sqrt(2 * math.pi))
    return float(np.sum(weight * kernel))


def describe(spec: SpectralData, h3: H3Report | None = None) -> dict:
    out = {
        "mass": spec.mass,
        "eigenvalues": [float(e) for e in spec.eigenvalues],
        "omegas": [float(w) for w in spec.omegas],
        "near_threshold": list(spec.near_threshold),
        "below_mass": list(spec.below_mass),
    }
    if h3 is not None:
        out["N"] = h3.N
        out["h3_order"] = h3.order
        out["h3_violations"] = [list(v) for v in h3.violations]
    return out


__all__ = [
    "Discretization", "PotentialSpec", "SchrodingerOperator", "SpectralData", "H3Report",
    "DensityEstimate", "assemble_operator", "point_spectrum", "check_h3", "apply_B_function",
    "continuous_projection", "spectral_density_form", "spectral_density_matrix",
    "spectral_density_mollified", "richardson", "level_spacing", "describe", "require_h2",
]
