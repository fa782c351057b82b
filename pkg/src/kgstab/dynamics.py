"""Time integration: the two-dimensional toy Hamiltonian and the radial NLKG.

Toy model (z in C, h a field on a periodic square):

    i h' = -Lap h + |z|^2 z conj(G)
    i z' = z + 2 |z|^2 int h G + z^2 int conj(h) conj(G)

NLKG as a first-order system in (u, v):

    u' = v,    v' = -(H + m^2) u - |u|^2 u

Both use Strang splitting with an exact linear flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .boundstates import FieldState
from .decomposition import decompose, energy
from .errors import ConvergenceError
from .spectral import SchrodingerOperator, SpectralData


# ---------------------------------------------------------------------------
# toy model


@dataclass(frozen=True, eq=False)
class ToyModel:
    """Grid, coupling profile and sponge of the toy model."""

    n_grid: int = 512
    box: float = 200.0
    amplitude: float = 8.0
    width: float = math.sqrt(2.0)
    sponge_start: float = 0.7  # fraction of the half box where damping begins
    sponge_strength: float = 2.0

    @property
    def dx(self) -> float:
        return self.box / self.n_grid

    @property
    def dA(self) -> float:
        return self.dx**2

    def coords(self):
        x = (np.arange(self.n_grid) - self.n_grid // 2) * self.dx
        return np.meshgrid(x, x, indexing="ij")

    @property
    def G(self) -> np.ndarray:
        X, Y = self.coords()
        return self.amplitude * np.exp(-(X**2 + Y**2) / (2 * self.width**2))

    @property
    def K2(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n_grid, d=self.dx)
        return k[:, None] ** 2 + k[None, :] ** 2

    @property
    def gm(self) -> np.ndarray:
        # int h G dx = scale * sum(fft2(h) * gm)
        return np.fft.ifft2(self.G) * self.n_grid**2

    @property
    def scale(self) -> float:
        return self.dA / self.n_grid**2

    def c_closed_form(self) -> float:
        """Circle constant of the Gaussian profile: pi A^2 s^4 exp(-s^2)."""
        s = self.width
        return math.pi * self.amplitude**2 * s**4 * math.exp(-s * s)

    def sponge(self) -> np.ndarray:
        X, Y = self.coords()
        r = np.sqrt(X**2 + Y**2)
        half = self.box / 2
        rs = self.sponge_start * half
        ramp = np.clip((r - rs) / (half - rs), 0.0, 1.0)
        return self.sponge_strength * ramp**3

    def lambda_eff(self, rel: float = 1e-12) -> float:
        """Largest |xi|^2 among modes the coupling actually excites."""
        g = np.abs(self.gm)
        if not g.any():
            return 0.0
        return float(np.max(self.K2[g > rel * g.max()]))

    def default_dt(self) -> float:
        return 0.45 / self.lambda_eff()


@dataclass(frozen=True, eq=False)
class ToyState:
    z: complex
    h: np.ndarray
    time: float = 0.0


def toy_coupling(model: ToyModel, h) -> complex:
    return complex(model.dA * np.sum(h * model.G))


def toy_hamiltonian(model: ToyModel, state: ToyState) -> float:
    """|z|^2 + ||grad h||^2 + 2 Re(|z|^2 conj(z) int G h)."""
    hk = np.fft.fft2(state.h)
    grad = model.scale * float(np.sum(model.K2 * np.abs(hk) ** 2))
    z = state.z
    return abs(z) ** 2 + grad + 2 * float(np.real(abs(z) ** 2 * np.conj(z) * toy_coupling(model, state.h)))


def _check_cfl(model, dt):
    lam = model.lambda_eff()
    if dt * lam >= 0.5:
        raise ValueError(f"dt * lambda_eff = {dt * lam:.3g} >= 0.5; reduce dt below {0.5 / lam:.3g}")


def _coupled_midpoint(z, I, gamma, dt):
    """Explicit midpoint for the coupling subsystem; h moves along conj(G) only."""
    def zdot(z_, I_):
        return -1j * (2 * abs(z_) ** 2 * I_ + z_ * z_ * np.conj(I_))

    k1 = zdot(z, I)
    a1 = -1j * abs(z) ** 2 * z
    zm = z + 0.5 * dt * k1
    Im = I + 0.5 * dt * a1 * gamma
    k2 = zdot(zm, Im)
    a = -1j * dt * abs(zm) ** 2 * zm  # h += a * conj(G)
    return z + dt * k2, a


def toy_step(state: ToyState, model: ToyModel, dt: float) -> ToyState:
    """One Strang step: half free flow, coupled midpoint substep, half free flow."""
    _check_cfl(model, dt)
    if not np.isfinite(state.z) or not np.all(np.isfinite(state.h)):
        raise FloatingPointError("non-finite toy state")
    half = np.exp(-0.5j * model.K2 * dt)
    hk = half * np.fft.fft2(state.h)
    z = state.z * np.exp(-0.5j * dt)
    gm = model.gm
    I = model.scale * np.sum(hk * gm)
    gamma = model.scale * float(np.sum(np.abs(gm) ** 2))
    z, a = _coupled_midpoint(z, I, gamma, dt)
    hk = half * (hk + a * np.conj(gm))
    z = z * np.exp(-0.5j * dt)
    return ToyState(complex(z), np.fft.ifft2(hk), state.time + dt)


def reduced_decay(y0: float, c: float, t, power: int = 4):
    """Exact solution of y' = -2 pi c y^power with y(0) = y0."""
    t = np.asarray(t, dtype=float)
    k = power - 1
    return y0 * (1 + 2 * math.pi * c * k * y0**k * t) ** (-1.0 / k)


@dataclass
class ToyRunReport:
    times: np.ndarray
    z_abs2: np.ndarray
    hamiltonian: np.ndarray
    c_reference: float
    window: tuple
    exponent: float
    c_fit_octic: float  # regression of d|z|^2/dt on -2 pi |z|^8
    c_fit_sextic: float  # regression on -2 pi |z|^6
    oracle_dev_octic: float  # max relative deviation from the y' = -2 pi c y^4 solution
    oracle_dev_sextic: float  # same for y' = -2 pi c y^3
    inconclusive: bool
    absorbed: float  # norm removed by the sponge, relative to the radiated norm

    def to_dict(self) -> dict:
        return {
            "c_reference": self.c_reference, "window": list(self.window), "exponent": self.exponent,
            "c_fit_octic": self.c_fit_octic, "c_fit_sextic": self.c_fit_sextic,
            "oracle_dev_octic": self.oracle_dev_octic, "oracle_dev_sextic": self.oracle_dev_sextic,
            "inconclusive": self.inconclusive, "absorbed": self.absorbed,
            "final_time": float(self.times[-1]), "final_abs2": float(self.z_abs2[-1]),
        }


def toy_run(model: ToyModel, z0: complex, T_final: float, dt: float | None = None,
            output_stride: int = 20, sponge_every: int = 50, c_reference: float | None = None,
            t_separate: float | None = None) -> ToyRunReport:
    """Integrate the toy model and fit its decay law.

    The loop runs in the Fourier frame shifted by half a free step, so each
    step costs one fused pass over the grid; the sponge is applied every
    ``sponge_every`` steps through a pair of FFTs.
    """
    dt = model.default_dt() if dt is None else dt
    _check_cfl(model, dt)
    n_steps = int(round(T_final / dt))
    gm = model.gm
    scale = model.scale
    gamma = scale * float(np.sum(np.abs(gm) ** 2))
    full = np.exp(-1j * model.K2 * dt)
    damp = np.exp(-model.sponge() * dt * sponge_every)
    hk = np.zeros((model.n_grid, model.n_grid), complex)
    z = complex(z0) * np.exp(-0.5j * dt)
    I = 0j
    times, ys, hams = [0.0], [abs(z0) ** 2], [abs(z0) ** 2]
    removed = 0.0
    K2 = model.K2
    for step in range(1, n_steps + 1):
        z, a = _coupled_midpoint(z, I, gamma, dt)
        z *= np.exp(-1j * dt)
        I = kernels.toy_fourier_step(hk, gm, full, a, scale)
        if step % sponge_every == 0:
            h = np.fft.ifft2(hk)
            before = float(np.sum(np.abs(h) ** 2))
            h *= damp
            removed += before - float(np.sum(np.abs(h) ** 2))
            hk[...] = np.fft.fft2(h)
            I = scale * np.sum(hk * gm)
        if step % output_stride == 0:
            if not np.isfinite(z):
                raise FloatingPointError("toy run produced non-finite amplitude")
            times.append(step * dt)
            ys.append(abs(z) ** 2)
            if step % (output_stride * 50) == 0:
                grad = scale * float(np.sum(K2 * np.abs(hk) ** 2))
                hams.append(abs(z) ** 2 + grad + 2 * float(np.real(abs(z) ** 2 * np.conj(z) * I)))
    times = np.array(times)
    ys = np.array(ys)
    c_ref = model.c_closed_form() if c_reference is None else c_reference
    radiated_norm = abs(z0) ** 2 - ys[-1]
    rep = fit_decay(times, ys, c_ref, t_separate)
    rep.hamiltonian = np.array(hams)
    rep.absorbed = float(model.dA * removed) / max(radiated_norm, 1e-300)
    return rep


def fit_decay(times, ys, c_ref: float, t_separate: float | None = None) -> ToyRunReport:
    """Exponent over the final decade, rate regressions and oracle deviations."""
    T = times[-1]
    t_lo = T / 10
    if t_separate is not None:
        t_lo = max(t_lo, t_separate)
    win = times >= t_lo
    inconclusive = bool(T / max(t_lo, 1e-300) < 10 * (1 - 1e-9) or win.sum() < 8)
    lt, ly = np.log(times[win]), np.log(ys[win])
    exponent = float(np.polyfit(lt, ly, 1)[0]) if win.sum() >= 2 else float("nan")
    ydot = np.gradient(ys, times)
    fit_win = times >= (t_separate if t_separate is not None else min(T / 100, T / 10))
    fit_win &= times > 0

    def through_origin(power):
        x = -2 * math.pi * ys[fit_win] ** power
        return float(np.sum(x * ydot[fit_win]) / np.sum(x * x))

    y0 = ys[0]
    dev = {}
    for p in (4, 3):
        ref = reduced_decay(y0, c_ref, times[win], p)
        dev[p] = float(np.max(np.abs(ys[win] / ref - 1)))
    return ToyRunReport(times, ys, np.zeros(0), c_ref, (float(t_lo), float(T)), exponent,
                        through_origin(4), through_origin(3), dev[4], dev[3], inconclusive, 0.0)


# ---------------------------------------------------------------------------
# NLKG


class LinearPropagator:
    """Exact flow of u'' + B^2 u = 0 over a time step, in the eigenbasis of H."""

    def __init__(self, H: SchrodingerOperator, mass: float, dt: float):
        evals, evecs = H.eigh
        beta2 = evals + mass * mass
        if np.any(beta2 <= 0):
            raise ValueError("H + m^2 must be positive")
        self.beta = np.sqrt(beta2)
        self.V = evecs
        self.dt = dt
        self.set_dt(dt)

    def set_dt(self, dt):
        self.dt = dt
        self.c = np.cos(self.beta * dt)
        self.s = np.sin(self.beta * dt)

    def coeffs(self, state_u, state_v):
        # the basis is real: one real GEMM on stacked real/imaginary parts
        X = self.V.T @ np.column_stack([state_u.real, state_u.imag, state_v.real, state_v.imag])
        return X[:, 0] + 1j * X[:, 1], X[:, 2] + 1j * X[:, 3]

    def apply_coeffs(self, a, b):
        return self.c * a + self.s / self.beta * b, -self.beta * self.s * a + self.c * b

    def flow(self, u, v):
        a, b = self.coeffs(u, v)
        a, b = self.apply_coeffs(a, b)
        Y = self.V @ np.column_stack([a.real, a.imag, b.real, b.imag])
        return Y[:, 0] + 1j * Y[:, 1], Y[:, 2] + 1j * Y[:, 3]


def default_dt(H: SchrodingerOperator, mass: float) -> float:
    """2 pi / (20 lambda_max(B))."""
    evals = H.eigh[0]
    return 2 * math.pi / (20 * math.sqrt(evals[-1] + mass * mass))


def nlkg_step(state: FieldState, H: SchrodingerOperator, mass: float, dt: float,
              half: LinearPropagator | None = None, nonlinear: bool = True, sponge: bool = True) -> FieldState:
    """Strang step: exact linear half step, cubic kick, exact linear half step, sponge."""
    if half is None or abs(half.dt - 0.5 * dt) > 1e-15 * dt:
        half = LinearPropagator(H, mass, 0.5 * dt)
    u, v = half.flow(np.asarray(state.u, complex), np.asarray(state.v, complex))
    if nonlinear:
        kernels.cubic_kick(u, v, H.disc.inv_r2, dt)
    u, v = half.flow(u, v)
    if sponge:
        sig = H.disc.sponge_profile()
        if np.any(sig):
            f = np.exp(-sig * dt)
            u *= f
            v *= f
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise FloatingPointError("non-finite field after NLKG step")
    return FieldState(u, v, state.time + dt)


class NlkgIntegrator:
    """Repeated Strang steps with adjacent linear half steps merged.

    The sponge factor is applied right after each kick, so consecutive half
    steps fuse into one exact full step and a run of k steps costs k + 1
    linear flows instead of 2k.
    """

    def __init__(self, H: SchrodingerOperator, mass: float, dt: float, nonlinear=True, sponge=True):
        self.H = H
        self.mass = mass
        self.dt = dt
        self.half = LinearPropagator(H, mass, 0.5 * dt)
        self.full = LinearPropagator(H, mass, dt)
        self.nonlinear = nonlinear
        sig = H.disc.sponge_profile() if sponge else np.zeros(H.n)
        self.damp = np.exp(-sig * dt) if np.any(sig) else None

    def _kick(self, u, v, inv_r2):
        if self.nonlinear:
            kernels.cubic_kick(u, v, inv_r2, self.dt)
        if self.damp is not None:
            u *= self.damp
            v *= self.damp

    def advance(self, state: FieldState, n_steps: int) -> FieldState:
        u = np.asarray(state.u, complex).copy()
        v = np.asarray(state.v, complex).copy()
        if n_steps <= 0:
            return FieldState(u, v, state.time)
        inv_r2 = self.H.disc.inv_r2
        u, v = self.half.flow(u, v)
        self._kick(u, v, inv_r2)
        for _ in range(n_steps - 1):
            u, v = self.full.flow(u, v)
            self._kick(u, v, inv_r2)
        u, v = self.half.flow(u, v)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise FloatingPointError("non-finite field in NLKG run")
        return FieldState(u, v, state.time + n_steps * self.dt)


@dataclass
class ModeTrajectory:
    times: np.ndarray
    z_series: np.ndarray  # (n_snap, 2n)
    radiation_local_norm: np.ndarray
    energy_series: np.ndarray
    signed_omegas: np.ndarray
    truncated: str = ""

    @property
    def Zprod_series(self) -> dict:
        d = self.z_series.shape[1]
        return {(J + 1, K + 1): np.abs(self.z_series[:, J] * np.conj(self.z_series[:, K]))
                for J in range(d) for K in range(d) if J != K}

    def to_csv(self, path):
        cols = [self.times]
        names = ["t"]
        for J in range(self.z_series.shape[1]):
            cols += [self.z_series[:, J].real, self.z_series[:, J].imag]
            names += [f"re_z{J + 1}", f"im_z{J + 1}"]
        for (J, K), s in self.Zprod_series.items():
            if J < K:
                cols.append(s)
                names.append(f"absZ_{J}{K}")
        cols += [self.radiation_local_norm, self.energy_series]
        names += ["local_norm", "energy"]
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(names), comments="")


def local_norm(disc, u, s: float = 2.0) -> float:
    """Weighted L^2 norm with weight <x>^{-s}."""
    x = disc.grid
    w = (1 + x * x) ** (-s / 2)
    return disc.norm(w * np.asarray(u))


def nlkg_run(initial: FieldState, spec: SpectralData, H: SchrodingerOperator, families, T_final: float,
             dt: float | None = None, snap_every: float | None = None, sponge: bool = True,
             on_snapshot=None) -> ModeTrajectory:
    """Integrate and decompose at regular snapshot times.

    ``on_snapshot(state)`` is called with every recorded state, if given.
    """
    mass = spec.mass
    dt = default_dt(H, mass) if dt is None else dt
    if snap_every is None:
        snap_every = 2 * math.pi / spec.omegas[0]
    stride = max(1, int(round(snap_every / dt)))
    n_snaps = int(T_final / (stride * dt))
    integ = NlkgIntegrator(H, mass, dt, sponge=sponge)
    disc = H.disc
    times, zs, rad, ens = [], [], [], []
    state = initial
    reason = ""

    def record(st):
        md = decompose(st, families, disc)
        times.append(st.time)
        zs.append(md.z)
        rad.append(local_norm(disc, md.xi.u))
        ens.append(energy(st, H, mass))
        if on_snapshot is not None:
            on_snapshot(st)

    try:
        record(state)
        for _ in range(n_snaps):
            state = integ.advance(state, stride)
            record(state)
    except (ConvergenceError, FloatingPointError) as exc:
        reason = f"stopped at t = {state.time:.4g}: {exc}"
    return ModeTrajectory(np.array(times), np.array(zs), np.array(rad), np.array(ens),
                          spec.signed_omegas.copy(), reason)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class Diagnostics:
    survivor: int  # 1-based index of the largest final-quarter |z_J|
    survivor_flatness: float  # (max - min) / mean of |z_J0| over the final quarter
    offdiag_initial: float
    offdiag_tail: float  # max over pairs of the final-quarter average |z_J conj(z_K)|
    decay_trend: tuple  # per J: final-quarter mean / first-quarter mean of |z_J|
    slopes: tuple  # per J: least-squares slope of |z_J(t)|
    sup_deviation: float  # sup_t max_J |z_J' - i w~_J z_J|
    l2_surrogate: dict  # (mu, nu) -> sqrt(int |z^mu conj(z)^nu|^2 dt)
    energy_drift_rate: float  # |least-squares slope of E(t)| / E(0)

    def to_dict(self):
        d = dict(self.__dict__)
        d["l2_surrogate"] = {str(k): v for k, v in self.l2_surrogate.items()}
        d["decay_trend"] = list(self.decay_trend)
        d["slopes"] = list(self.slopes)
        return d


def demodulated_rate(times, z_series, signed_omegas) -> np.ndarray:
    """|z_J' - i w~_J z_J| per snapshot, via differences of e^{-i w~ t} z."""
    y = z_series * np.exp(-1j * np.outer(times, signed_omegas))
    return np.abs(np.gradient(y, times, axis=0))


def diagnostics(traj: ModeTrajectory, table=None) -> Diagnostics:
    t = traj.times
    Z = traj.z_series
    A = np.abs(Z)
    n_t = len(t)
    q = max(1, n_t // 4)
    tail = slice(n_t - q, n_t)
    head = slice(0, q)
    means = A[tail].mean(axis=0)
    J0 = int(np.argmax(means))
    flat = float((A[tail, J0].max() - A[tail, J0].min()) / max(means[J0], 1e-300))
    prods = traj.Zprod_series
    off0 = max(float(s[0]) for s in prods.values()) if prods else 0.0
    off_tail = max(float(s[tail].mean()) for s in prods.values()) if prods else 0.0
    trend = tuple(float(A[tail, J].mean() / max(A[head, J].mean(), 1e-300)) for J in range(Z.shape[1]))
    slopes = tuple(float(np.polyfit(t, A[:, J], 1)[0]) for J in range(Z.shape[1]))
    sup = float(np.max(demodulated_rate(t, Z, traj.signed_omegas))) if n_t > 2 else float("nan")
    l2 = {}
    if table is not None:
        for p in table.M_min:
            vals = np.prod(Z ** np.asarray(p.mu), axis=1) * np.prod(np.conj(Z) ** np.asarray(p.nu), axis=1)
            l2[p.key()] = float(math.sqrt(np.trapezoid(np.abs(vals) ** 2, t)))
    E = traj.energy_series
    # least-squares slope: splitting error oscillates at O(dt^2) without drifting
    drift = float(abs(np.polyfit(t, E, 1)[0]) / abs(E[0])) if n_t > 2 else 0.0
    return Diagnostics(J0 + 1, flat, off0, off_tail, trend, slopes, sup, l2, drift)


__all__ = [
    "ToyModel", "ToyState", "ToyRunReport", "toy_step", "toy_run", "toy_hamiltonian", "toy_coupling",
    "reduced_decay", "fit_decay", "LinearPropagator", "NlkgIntegrator", "nlkg_step", "nlkg_run",
    "ModeTrajectory", "Diagnostics", "diagnostics", "demodulated_rate", "default_dt", "local_norm",
]
