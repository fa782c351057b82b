"""Fermi Golden Rule coefficients and the positivity inequality on sampled amplitudes.

A coupling profile attaches a two-component field G_{mu nu} = (G1, G2) to every
minimal resonant pair.  For L in Lambda the combined field is

    G_L(zeta) = sum over M_L of zeta^mu conj(zeta)^nu G_{mu nu}

and its damping weight is

    L  <pi_2 G_L | delta(B - L)   pi_2 G_L>     for L >  m,
    |L| <pi_1 G_L | delta(B - |L|) pi_1 G_L>    for L < -m.

Prefactors tied to the normal-form coordinates are dropped; the sign and
the zeta-dependence are the testable content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import DomainError
from .resonance import MonomialPair, ResonanceTable, monomial
from .spectral import (SchrodingerOperator, SpectralData, continuous_projection,
                       spectral_density_matrix)


@dataclass(frozen=True, eq=False)
class CouplingProfile:
    """Per-pair two-component fields, P_c-projected on construction."""

    fields: dict  # (mu, nu) -> (G1, G2)
    source: str = "user_supplied"

    @classmethod
    def build(cls, spec: SpectralData, raw: dict, source: str = "user_supplied"):
        out = {}
        for key, (g1, g2) in raw.items():
            key = (tuple(key[0]), tuple(key[1]))
            out[key] = (continuous_projection(spec, np.asarray(g1, dtype=complex)),
                        continuous_projection(spec, np.asarray(g2, dtype=complex)))
        return cls(out, source)

    def get(self, pair, n_points):
        key = pair.key() if isinstance(pair, MonomialPair) else (tuple(pair[0]), tuple(pair[1]))
        z = np.zeros(n_points, complex)
        return self.fields.get(key, (z, z))

    def is_zero(self) -> bool:
        return all(not np.any(g1) and not np.any(g2) for g1, g2 in self.fields.values())


def _members(table: ResonanceTable, L: float):
    try:
        idx = table.lambda_index(L)
    except KeyError:
        raise KeyError(f"L = {L} is not in Lambda") from None
    return table.M_L[table.Lambda[idx]]


def assemble_G_L(profiles: CouplingProfile, table: ResonanceTable, L: float, zeta, n_points: int | None = None):
    """G_L(zeta) as a pair of grid fields."""
    members = _members(table, L)
    if n_points is None:
        n_points = len(next(iter(profiles.fields.values()))[0]) if profiles.fields else 0
    g1 = np.zeros(n_points, complex)
    g2 = np.zeros(n_points, complex)
    for p in members:
        c = monomial(zeta, p.mu, p.nu)
        a, b = profiles.get(p, n_points)
        g1 += c * a
        g2 += c * b
    return g1, g2


def _component(G, L, mass):
    if L > mass:
        return G[1]
    if L < -mass:
        return G[0]
    raise DomainError(f"|L| = {abs(L)} lies in the spectral gap (mass {mass})")


@dataclass(frozen=True)
class CoefficientEstimate:
    value: float
    error: float
    confident: bool


def fgr_coefficient_detail(spec: SpectralData, H: SchrodingerOperator, G, L: float, **kw) -> CoefficientEstimate:
    u = _component(G, L, spec.mass)
    lam = abs(L)
    mat, err, ok, _ = spectral_density_matrix(spec, H, [u], lam, **kw)
    return CoefficientEstimate(lam * float(np.real(mat[0, 0])), lam * float(err[0, 0]), ok)


def fgr_coefficient(spec: SpectralData, H: SchrodingerOperator, G, L: float, **kw) -> float:
    """|L| times the delta-form of the component of G selected by the sign of L."""
    return fgr_coefficient_detail(spec, H, G, L, **kw).value


@dataclass(frozen=True)
class FgrReport:
    Lambda: tuple
    gamma: tuple  # gamma_L at the reference point zeta = (1, ..., 1)/sqrt(2n)
    total: float
    c_certified: float
    h4_margin: float
    degenerate: bool
    n_samples: int
    confident: bool
    method: str = "limiting_absorption"
    source: str = "user_supplied"

    def to_dict(self) -> dict:
        return {
            "Lambda": list(self.Lambda), "gamma": list(self.gamma), "total": self.total,
            "c_certified": self.c_certified, "h4_margin": self.h4_margin,
            "degenerate": self.degenerate, "n_samples": self.n_samples,
            "confident": self.confident, "method": self.method, "source": self.source,
        }


class FgrForms:
    """Per-L Gram matrices of the delta form over the members of M_L.

    With these, lhs(zeta) is a Hermitian quadratic form in the monomial
    vector and can be evaluated at many sample points without new solves.
    """

    def __init__(self, spec: SpectralData, H: SchrodingerOperator, table: ResonanceTable,
                 profiles: CouplingProfile, **kw):
        self.table = table
        self.mass = spec.mass
        self.grams = {}
        self.confident = True
        for L, members in table.M_L.items():
            if abs(L) <= spec.mass:
                raise DomainError(f"Lambda contains {L} inside the gap")
            vecs = [_component(profiles.get(p, H.n), L, spec.mass) for p in members]
            if not any(np.any(v) for v in vecs):
                self.grams[L] = np.zeros((len(vecs), len(vecs)), complex)
                continue
            mat, _, ok, _ = spectral_density_matrix(spec, H, vecs, abs(L), **kw)
            self.confident &= ok
            self.grams[L] = abs(L) * mat

    def gamma(self, L, zeta) -> float:
        members = self.table.M_L[L]
        c = np.array([monomial(zeta, p.mu, p.nu) for p in members])
        # <delta sum c_a g_a | sum c_b g_b> = sum_ab c_a conj(c_b) int (delta g_a) conj(g_b)
        return float(np.real(c @ self.grams[L] @ np.conj(c)))

    def lhs(self, zeta) -> float:
        return sum(self.gamma(L, zeta) for L in self.table.M_L)


def rhs_weight(table: ResonanceTable, zeta) -> float:
    """sum over M_min of |zeta^{mu + nu}|^2."""
    a = np.abs(np.asarray(zeta))
    return float(sum(np.prod(a ** (2 * (np.asarray(p.mu) + np.asarray(p.nu)))) for p in table.M_min))


def sample_unit_ball(dim: int, n_sobol: int = 200, seed: int = 0) -> np.ndarray:
    """Sobol points in the polydisk |zeta_J| <= 1, pulled into the unit ball, plus the axes."""
    sob = qmc.Sobol(d=2 * dim, scramble=True, seed=seed)
    m = int(math.ceil(math.log2(max(2, n_sobol))))
    pts = sob.random_base2(m)[:n_sobol]
    rad = np.sqrt(pts[:, :dim])
    ang = 2 * np.pi * pts[:, dim:]
    z = rad * np.exp(1j * ang)
    norms = np.linalg.norm(z, axis=1)
    z = z / np.maximum(norms, 1.0)[:, None]
    axes = np.eye(dim, dtype=complex)
    return np.concatenate([z, axes])


def check_h4(spec: SpectralData, H: SchrodingerOperator, table: ResonanceTable, profiles: CouplingProfile,
             zeta_samples=None, c_candidate: float | None = None, seed: int = 0, **kw) -> FgrReport:
    """Largest c >= 0 with lhs(zeta) >= (4c/pi) sum |zeta^{mu+nu}|^2 on the sample set."""
    dim = len(table.signed_omegas)
    if zeta_samples is None:
        zeta_samples = sample_unit_ball(dim, seed=seed)
    zeta_samples = np.atleast_2d(np.asarray(zeta_samples, dtype=complex))
    if np.any(np.linalg.norm(zeta_samples, axis=1) > 1 + 1e-12):
        raise ValueError("zeta samples must lie in the unit ball")
    ref = np.full(dim, 1 / math.sqrt(dim), complex)
    if profiles.is_zero() or not table.M_min:
        return FgrReport(tuple(table.Lambda), tuple(0.0 for _ in table.Lambda), 0.0, 0.0, 0.0, True,
                         len(zeta_samples), True, source=profiles.source)
    forms = FgrForms(spec, H, table, profiles, **kw)
    lhs = np.array([forms.lhs(z) for z in zeta_samples])
    rhs = np.array([rhs_weight(table, z) for z in zeta_samples])
    pos = rhs > 1e-300
    ratios = math.pi * lhs[pos] / (4 * rhs[pos])
    c = max(0.0, float(ratios.min())) if ratios.size else 0.0
    if np.any(lhs < -1e-10 * max(1.0, float(np.max(np.abs(lhs))))):
        c = 0.0
    if c_candidate is not None:
        c = min(c, float(c_candidate))
    margin = float(np.min(lhs - 4 * c / math.pi * rhs))
    gam = tuple(forms.gamma(L, ref) for L in table.Lambda)
    return FgrReport(tuple(table.Lambda), gam, float(sum(gam)), c, margin, False, len(zeta_samples),
                     forms.confident, source=profiles.source)


def cubic_leading_profiles(spec: SpectralData, table: ResonanceTable) -> CouplingProfile:
    """Surrogate couplings: P_c of the eigenfunction product prod phi^{mu+nu}.

    Built for every cubic-order pair (|mu| + |nu| = 3) of M_min and placed in
    the second component when L > m, the first when L < -m.  This stands in
    for the normal-form couplings, which are not computed here.
    """
    disc = spec.disc
    raw = {}
    for p in table.M_min:
        if p.level * 2 + 1 != 3:
            continue
        expo = np.asarray(p.mu) + np.asarray(p.nu)
        prod = np.ones(disc.n_points)
        for J, k in enumerate(expo, start=1):
            if k:
                prod = prod * disc.to_physical(spec.phi(J)) ** k
        field_ = disc.from_physical(prod)
        z = np.zeros(disc.n_points)
        L = p.frequency(table.signed_omegas)
        raw[p.key()] = (z, field_) if L > spec.mass else (field_, z)
    return CouplingProfile.build(spec, raw, source="cubic_leading_order")


# ---------------------------------------------------------------------------
# two-dimensional free coupling constant of the toy model


def gaussian_toy_profile(amplitude: float, width: float):
    """G(x) = A exp(-|x|^2 / (2 s^2)) on R^2 as a callable."""
    return lambda x, y: amplitude * np.exp(-(x * x + y * y) / (2 * width * width))


def circle_constant(G, radius_cut: float = 12.0, n_quad: int = 400, n_theta: int = 64) -> float:
    """(1/2) int over |xi| = 1 of |G^(xi)|^2, with G^ by direct Fourier quadrature.

    Unitary convention G^(xi) = (2 pi)^{-1} int e^{-i x.xi} G(x) dx, computed by
    Gauss-Legendre quadrature on the square [-radius_cut, radius_cut]^2.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    x = radius_cut * nodes
    wx = radius_cut * weights
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = G(X, Y) * np.outer(wx, wx)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = []
    for th in theta:
        ex = np.exp(-1j * np.cos(th) * x)
        ey = np.exp(-1j * np.sin(th) * x)
        vals.append(abs(ex @ g @ ey) ** 2 / (2 * np.pi) ** 2)
    # trapezoid on the circle is spectrally accurate for periodic integrands
    return 0.5 * float(np.mean(vals)) * 2 * np.pi


def circle_constant_resolvent(G, box: float = 200.0, n_grid: int = 512, eps_levels: int = 4,
                              eps0: float = 0.2) -> float:
    """Same constant via limiting absorption of -Laplacian on a periodic grid.

    <G | delta(-Lap - 1) G> = lim (1/pi) Im <G | (-Lap - 1 - i eps)^{-1} G>,
    evaluated with FFT coefficients and two-point Richardson extrapolation.
    """
    from .spectral import richardson

    dx = box / n_grid
    x = (np.arange(n_grid) - n_grid // 2) * dx
    X, Y = np.meshgrid(x, x, indexing="ij")
    gk = np.fft.fft2(G(X, Y))
    k = 2 * np.pi * np.fft.fftfreq(n_grid, d=dx)
    K2 = k[:, None] ** 2 + k[None, :] ** 2
    power = np.abs(gk) ** 2 * dx**4 / box**2  # |G^|^2 d^2xi in unitary normalisation
    eps = [eps0 * 2.0**-j for j in range(eps_levels)]
    vals = [float(np.sum(power * e / np.pi / ((K2 - 1.0) ** 2 + e * e))) for e in eps]
    best, _ = richardson(eps, vals)
    return float(best)


__all__ = [
    "CouplingProfile", "FgrReport", "FgrForms", "assemble_G_L", "fgr_coefficient",
    "fgr_coefficient_detail", "check_h4", "cubic_leading_profiles", "rhs_weight",
    "sample_unit_ball", "circle_constant", "circle_constant_resolvent", "gaussian_toy_profile",
]
