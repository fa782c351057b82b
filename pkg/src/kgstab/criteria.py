"""Acceptance criteria as functions returning structured results.

Each ``criterion_*`` takes already computed objects (or cheap parameters),
evaluates the quantitative check with the stated tolerance and returns a
``CriterionResult``.  The pipeline stores these in the verdict; the
acceptance tests print and assert them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .boundstates import FieldState, nlkg_residual, phi_total, standing_wave, StandingWavePair
from .decomposition import decompose
from .dynamics import ToyModel, ToyRunReport, diagnostics, demodulated_rate, nlkg_run, nlkg_step
from .fgr import assemble_G_L
from .resonance import PairIndex, build_table, check_split, pair_list, split_monomial
from .spectral import (
    Discretization, PotentialSpec, assemble_operator, point_spectrum, spectral_density_form,
    spectral_density_matrix,
)


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    values: dict = field(default_factory=dict)
    note: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items() if not isinstance(v, (list, dict)))
        return f"[{flag}] criterion {self.key}: {self.title} ({shown})"

    def verdict_entry(self) -> dict:
        # timings stay out: the verdict must be byte-stable across reruns
        return {"status": "pass" if self.passed else "fail", "title": self.title,
                "values": _clean(self.values), "note": self.note}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# 1, 2: combinatorics

SYNTHETIC_TABLES = (
    ((0.8,), 8),
    ((0.45,), 8),
    ((0.93,), 8),
    ((0.6, 0.9), 8),
    ((0.55, 0.82), 8),
    ((0.55, 0.7, 0.93), 5),
    ((0.41, 0.66, 0.87), 5),
)


def _table_matches(signed, mass, r):
    M, M_min, Lam, ML = oracles.literal_table(signed, mass, r)
    tab = build_table(signed, mass, N=0, order=r, full=True)
    got_M = {p.key() for p in tab.M}
    got_min = {p.key() for p in tab.M_min}
    lam_ok = len(Lam) == len(tab.Lambda) and np.allclose(Lam, tab.Lambda, rtol=0, atol=1e-9)
    ml_ok = lam_ok and all({p.key() for p in tab.M_L[L]} == ML[Lo] for L, Lo in zip(tab.Lambda, Lam))
    struct = all(sum(p.nu) == sum(p.mu) + 1 for p in tab.M)
    struct &= all(all(a * b == 0 for a, b in zip(p.mu, p.nu)) for p in tab.M_min)
    return got_M == M, got_min == M_min, lam_ok, ml_ok, struct, len(M), len(M_min)


@_timed
def criterion_1(cases=SYNTHETIC_TABLES, mass: float = 1.0, extra=()) -> CriterionResult:
    """build_table equals literal enumeration on synthetic frequency vectors."""
    rows = []
    ok = True
    for omegas, r in tuple(cases) + tuple(extra):
        w = np.concatenate([omegas, -np.asarray(omegas)])
        eqM, eqmin, lam, ml, struct, nM, nmin = _table_matches(w, mass, r)
        good = eqM and eqmin and lam and ml and struct
        ok &= good
        rows.append({"omegas": list(omegas), "r": r, "M": nM, "M_min": nmin, "equal": good})
    return CriterionResult("1", "resonance tables equal the literal enumeration", bool(ok),
                           {"cases": len(rows), "all_equal": bool(ok), "detail": rows})


@_timed
def criterion_2(omegas, mass: float, N: int, n_samples: int = 500, seed: int = 0, n_z: int = 100) -> CriterionResult:
    """Splitting of long monomials on random (J0, m) with |m| >= 2N + 3."""
    rng = np.random.default_rng(seed)
    w = np.concatenate([omegas, -np.asarray(omegas)])
    n = len(omegas)
    P = len(pair_list(n))
    failures = {"structure": 0, "margins": 0, "exponents": 0, "bound": 0}
    worst_bound = -math.inf
    for _ in range(n_samples):
        order = int(rng.integers(2 * N + 3, 2 * N + 9))
        counts = rng.multinomial(order, np.ones(P) / P)
        m = PairIndex(n, tuple(int(c) for c in counts))
        J0 = int(rng.integers(1, 2 * n + 1))
        sp = split_monomial(w, mass, N, J0, m)
        chk = check_split(w, mass, N, m, sp)
        for k in ("structure", "margins", "exponents"):
            failures[k] += not chk[k]
        # the bound numerically: |z_J0 Z^m| <= |z_J0| |z_K Z^a| |z_S Z^b| in the unit ball
        zs = rng.normal(size=(n_z, 2 * n)) + 1j * rng.normal(size=(n_z, 2 * n))
        zs *= (rng.random(n_z) ** (1 / (4 * n)) / np.linalg.norm(zs, axis=1))[:, None]
        for z in zs:
            lhs = abs(z[J0 - 1] * m.evaluate(z))
            rhs = abs(z[J0 - 1]) * abs(z[sp.K - 1] * sp.a.evaluate(z)) * abs(z[sp.S - 1] * sp.b.evaluate(z))
            worst_bound = max(worst_bound, lhs - rhs * (1 + 1e-12))
            failures["bound"] += lhs > rhs * (1 + 1e-12)
    ok = not any(failures.values())
    return CriterionResult("2", "monomial splitting satisfies the three structural displays", ok,
                           {"samples": n_samples, "N": N, "failures": sum(failures.values()),
                            "by_check": failures, "worst_bound_excess": float(worst_bound)})


# ---------------------------------------------------------------------------
# 3: bound-state scalings


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@_timed
def criterion_3(family, H, fit_lo: float = 1e-3, fit_hi_frac: float = 0.1) -> CriterionResult:
    disc = H.disc
    a = family.amplitudes
    hi = fit_hi_frac * family.a0
    sel = np.nonzero((a >= fit_lo * (1 - 1e-12)) & (a <= hi * (1 + 1e-12)))[0]
    qn = np.array([disc.norm(family.q(k)) for k in sel])
    de = np.abs(family.energies[sel] - family.eigenvalue)
    s_q = _slope(a[sel], qn)
    s_e = _slope(a[sel], de)
    span = math.log10(a[sel][-1] / a[sel][0]) if sel.size > 1 else 0.0
    res = max(nlkg_residual(H, family.mass, StandingWavePair(family.Q(k), 1j * family.omega(k) * family.Q(k),
                                                               family.branch_index, family.omega(k)))
              for k in range(family.n_samples))
    ok = abs(s_q - 3) <= 0.1 and abs(s_e - 2) <= 0.05 and span >= 1.5 and res < 1e-8
    return CriterionResult("3", "bound-state scalings and standing-wave residual", bool(ok),
                           {"slope_q": s_q, "slope_E": s_e, "decades": span, "max_residual": res,
                            "a0": family.a0, "samples_in_fit": int(sel.size)})


# ---------------------------------------------------------------------------
# 4: gauge equivariance


@_timed
def criterion_4(spec, H, families, table, profiles, seed: int = 0, thetas=(math.pi / 3, math.pi / 2, 2.1)) -> CriterionResult:
    rng = np.random.default_rng(seed)
    disc = H.disc
    n = len(families)
    reach = min(f.z_max for f in families)
    z = 0.5 * reach * np.exp(2j * np.pi * rng.random(2 * n)) * rng.uniform(0.3, 1.0, 2 * n)
    base = phi_total(families, z)
    scale = max(1.0, disc.norm(base.u) + disc.norm(base.v))
    bump = disc.from_physical(np.exp(-(disc.grid - 3.0) ** 2))
    state = FieldState(base.u + 0.01 * bump, base.v - 0.02j * bump)
    dec = decompose(state, families, disc)
    dt = 0.05
    stepped = nlkg_step(state, H, spec.mass, dt)
    zeta = (rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n))
    zeta /= 1.5 * np.linalg.norm(zeta)
    errs = {"phi": 0.0, "decompose": 0.0, "nlkg_step": 0.0, "G_L": 0.0}
    for th in thetas:
        ph = np.exp(1j * th)
        rot = phi_total(families, ph * z)
        errs["phi"] = max(errs["phi"], (disc.norm(rot.u - ph * base.u) + disc.norm(rot.v - ph * base.v)) / scale)
        d2 = decompose(FieldState(ph * state.u, ph * state.v), families, disc)
        e = float(np.max(np.abs(d2.z - ph * dec.z)))
        e = max(e, (disc.norm(d2.xi.u - ph * dec.xi.u) + disc.norm(d2.xi.v - ph * dec.xi.v)) / scale)
        errs["decompose"] = max(errs["decompose"], e)
        s2 = nlkg_step(FieldState(ph * state.u, ph * state.v), H, spec.mass, dt)
        errs["nlkg_step"] = max(errs["nlkg_step"],
                                (disc.norm(s2.u - ph * stepped.u) + disc.norm(s2.v - ph * stepped.v)) / scale)
        for L in table.Lambda:
            G = assemble_G_L(profiles, table, L, zeta)
            G2 = assemble_G_L(profiles, table, L, ph * zeta)
            gs = max(1e-300, max(disc.norm(G[0]) + disc.norm(G[1]), 1.0))
            err = (disc.norm(G2[0] - np.conj(ph) * G[0]) + disc.norm(G2[1] - np.conj(ph) * G[1])) / gs
            errs["G_L"] = max(errs["G_L"], err)
    ok = all(v <= 1e-8 for v in errs.values())
    return CriterionResult("4", "gauge equivariance of Phi, decompose, nlkg_step, G_L", bool(ok),
                           {**{f"err_{k}": v for k, v in errs.items()}, "thetas": len(thetas)})


# ---------------------------------------------------------------------------
# 5: spectral measure


def random_fields(disc, count: int, rng) -> np.ndarray:
    """Complex superpositions of 1 to 4 Gaussian shells, in grid representation."""
    r = disc.grid
    R = disc.domain_radius
    out = np.zeros((count, disc.n_points), complex)
    for i in range(count):
        for _ in range(int(rng.integers(1, 5))):
            c = rng.uniform(0, min(20.0, 0.3 * R))
            s = rng.uniform(0.5, 3.0)
            amp = rng.normal() + 1j * rng.normal()
            out[i] += amp * np.exp(-((r - c) ** 2) / (2 * s * s))
        out[i] = disc.from_physical(out[i])
    return out


@_timed
def criterion_5(spec, H, n_random: int = 100, seed: int = 0, free_n: int = 20000, free_R: float = 3000.0,
                lams=(1.2, 1.5, 2.0, 2.5, 2.9), free_width: float = 1.0) -> CriterionResult:
    """Positivity on random inputs over the given operator; free-case sphere formula."""
    rng = np.random.default_rng(seed)
    m = spec.mass
    groups = 5
    per = int(math.ceil(n_random / groups))
    diag = []
    low_conf = 0
    for g in range(groups):
        lam = float(rng.uniform(1.05 * m, 3 * m))
        count = min(per, n_random - g * per)
        if count <= 0:
            break
        vecs = random_fields(spec.disc, count, rng)
        mat, _, ok, _ = spectral_density_matrix(spec, H, vecs, lam)
        low_conf += not ok
        diag.extend(np.real(np.diag(mat)))
    min_density = float(np.min(diag))

    disc0 = Discretization("radial3d", free_n, free_R)
    H0 = assemble_operator(disc0, PotentialSpec.zero())
    sd0 = point_spectrum(H0, m)
    w = disc0.grid * np.exp(-disc0.grid**2 / (2 * free_width**2))
    devs = []
    for lam in lams:
        est = spectral_density_form(sd0, H0, w, lam)
        ref = oracles.free_sphere_density(lambda r: math.exp(-r * r / (2 * free_width**2)), lam, m,
                                          r_max=40 * free_width)
        devs.append(abs(est.value - ref) / ref)
    ok = min_density >= -1e-8 and max(devs) <= 0.02
    return CriterionResult("5", "spectral-measure positivity and free-case sphere formula", bool(ok),
                           {"n_random": len(diag), "min_density": min_density, "low_confidence_groups": low_conf,
                            "max_free_rel_dev": float(max(devs)), "free_rel_dev": [float(d) for d in devs],
                            "lams": list(lams)})


# ---------------------------------------------------------------------------
# 6: toy model


@_timed
def criterion_6(report: ToyRunReport, model: ToyModel, c_quadrature: float) -> CriterionResult:
    """Decay law as stated: exponent -1/3, |z|^8 regression, y^4 oracle.

    The derived |z|^6 law is reported alongside for comparison.
    """
    t, y = report.times, report.z_abs2
    lo, hi = report.window
    win = (t >= lo) & (t > 0)
    tt = np.concatenate([[0.0], t[win]])
    ref8 = oracles.reduced_ode(y[0], c_quadrature, tt, 4)[1:]
    ref6 = oracles.reduced_ode(y[0], c_quadrature, tt, 3)[1:]
    dev8 = float(np.max(np.abs(y[win] / ref8 - 1)))
    dev6 = float(np.max(np.abs(y[win] / ref6 - 1)))
    exp_ok = abs(report.exponent + 1 / 3) <= (1 / 3) * 0.10
    c_ok = abs(report.c_fit_octic - c_quadrature) <= 0.25 * c_quadrature
    o_ok = dev8 <= 0.05
    ok = exp_ok and c_ok and o_ok and not report.inconclusive
    return CriterionResult("6", "toy-model decay law as stated (exponent -1/3, |z|^8 rate)", bool(ok),
                           {"exponent": report.exponent, "c_quadrature": c_quadrature,
                            "c_fit_octic": report.c_fit_octic, "oracle_dev_octic": dev8,
                            "derived_exponent_target": -0.5, "c_fit_sextic": report.c_fit_sextic,
                            "oracle_dev_sextic": dev6, "window": list(report.window),
                            "absorbed_fraction": report.absorbed, "inconclusive": report.inconclusive},
                           note="as stated this fails; the sextic values test the law the model actually obeys")


# ---------------------------------------------------------------------------
# 7: NLKG


def ansatz_state(families, abs_z, phases):
    n = len(families)
    a = np.resize(np.asarray(abs_z, float), 2 * n)
    p = np.resize(np.asarray(phases, float), 2 * n)
    return phi_total(families, a * np.exp(1j * p))


def real_state(spec, amplitude: float):
    u = amplitude * spec.eigenfunctions[0].astype(complex)
    return FieldState(u, np.zeros_like(u))


def eps_pair_rates(spec, H, families, eps_values, T: float, phases=(0.3, 1.1), shape=(1.0, 0.5)):
    out = []
    for eps in eps_values:
        st = ansatz_state(families, eps * np.asarray(shape), phases)
        tr = nlkg_run(st, spec, H, families, T)
        out.append(float(np.max(demodulated_rate(tr.times, tr.z_series, tr.signed_omegas))))
    return out


@_timed
def criterion_7(spec, H, families, survival, real, energy_traj, eps_values, eps_rates) -> CriterionResult:
    """(a) energy drift, (b) single-mode survival, (c) real-data decay, (d) eps-scaling."""
    t, E = energy_traj.times, energy_traj.energy_series
    drift = float(abs(np.polyfit(t, E, 1)[0]) / abs(E[0]))
    a_ok = drift < 1e-6

    ds = diagnostics(survival)
    ratio = ds.offdiag_tail / ds.offdiag_initial if ds.offdiag_initial > 0 else math.inf
    b_ok = ratio < 0.1 and ds.survivor_flatness <= 0.05 and not survival.truncated

    A = np.abs(real.z_series)
    q = np.array_split(np.arange(len(real.times)), 4)
    quarter_means = np.array([[A[idx, J].mean() for idx in q] for J in range(A.shape[1])])
    monotone = bool(np.all(np.diff(quarter_means, axis=1) < 0))
    slopes = [float(np.polyfit(real.times, A[:, J], 1)[0]) for J in range(A.shape[1])]
    c_ok = monotone and all(s < 0 for s in slopes) and not real.truncated

    e1, e2 = eps_values
    r1, r2 = eps_rates
    expo = math.log(r2 / r1) / math.log(e2 / e1)
    d_ok = abs(expo - 2.0) <= 0.6

    ok = a_ok and b_ok and c_ok and d_ok
    return CriterionResult("7", "NLKG stabilization surrogates (a)-(d)", bool(ok), {
        "a_pass": bool(a_ok), "a_energy_drift_per_time": drift,
        "b_pass": bool(b_ok), "b_offdiag_ratio": float(ratio), "b_survivor": ds.survivor,
        "b_survivor_flatness": ds.survivor_flatness,
        "c_pass": bool(c_ok), "c_quarter_means": quarter_means.tolist(), "c_slopes": slopes,
        "d_pass": bool(d_ok), "d_exponent": float(expo), "d_rates": [r1, r2], "d_eps": [e1, e2],
    }, note="demodulation uses z' - i w~ z, matching Phi_J = (Q, i w~ Q)")


def criterion_8_placeholder() -> dict:
    return {"status": "external", "title": "byte-identical verdict across two --threads 1 runs",
            "values": {}, "note": "checked by comparing verdict.json of two runs"}


__all__ = [
    "CriterionResult", "criterion_1", "criterion_2", "criterion_3", "criterion_4", "criterion_5",
    "criterion_6", "criterion_7", "criterion_8_placeholder", "SYNTHETIC_TABLES", "ansatz_state",
    "real_state", "eps_pair_rates", "random_fields",
]
