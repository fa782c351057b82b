"""Stage runner behind the command line: artifacts, manifest and verdict."""

from __future__ import annotations

import json
import math
import platform
import struct
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, criteria
from ._accel import backend_name
from .boundstates import continue_branch, default_path
from .config import RunConfig
from .dynamics import ToyModel, diagnostics, nlkg_run, toy_run
from .errors import HypothesisViolation
from .fgr import (
    check_h4, circle_constant, circle_constant_resolvent, cubic_leading_profiles, gaussian_toy_profile,
    sample_unit_ball,
)
from .resonance import table_from_spectrum
from .spectral import Discretization, PotentialSpec, assemble_operator, check_h3, describe, point_spectrum

# prerequisites of each stage
REQUIRES = {
    "spectrum": (),
    "boundstates": ("spectrum",),
    "resonances": ("spectrum",),
    "fgr": ("spectrum", "resonances"),
    "toy": (),
    "simulate": ("spectrum", "boundstates"),
}
ORDER = ("spectrum", "boundstates", "resonances", "fgr", "toy", "simulate")
CRITERIA = ("1", "2", "3", "4", "5", "6", "7", "8")

SNAPSHOT_MAGIC = b"KGSNAP01"

EXIT_OK = 0
EXIT_STAGE_FAILED = 2
EXIT_H2 = 3
EXIT_H3 = 4


class StageFailure(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        self.stage = stage
        self.exc = exc
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


@dataclass
class Context:
    cfg: RunConfig
    out: Path
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    notices: list = field(default_factory=list)
    exit_code: int = EXIT_OK
    disc: Discretization | None = None
    H: object = None
    spec: object = None
    h3: object = None
    families: list = field(default_factory=list)
    table: object = None
    error: str | None = None

    def path(self, name: str) -> Path:
        p = self.out / name
        if name not in self.files:
            self.files.append(name)
        return p

    def write_json(self, name: str, payload) -> None:
        self.path(name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def expand_stages(wanted) -> tuple:
    need = set()

    def add(s):
        for r in REQUIRES[s]:
            add(r)
        need.add(s)

    for s in wanted:
        add(s)
    return tuple(s for s in ORDER if s in need)


# ---------------------------------------------------------------------------
# builders


def build_potential(cfg: RunConfig) -> PotentialSpec:
    if cfg.potential == "zero":
        return PotentialSpec.zero()
    if cfg.potential == "gaussian_well":
        return PotentialSpec.gaussian_well(cfg.depth, cfg.width, cfg.center)
    if cfg.potential == "sum_of_gaussians":
        wells = []
        for chunk in cfg.wells.split(";"):
            if chunk.strip():
                d, w, c = (float(x) for x in chunk.split(":"))
                wells.append((d, w, c))
        if not wells:
            raise ValueError("sum_of_gaussians needs at least one well in 'wells'")
        return PotentialSpec.sum_of_gaussians(wells)
    data = np.loadtxt(cfg.potential_file, ndmin=2)
    return PotentialSpec.tabulated(data[:, 0], data[:, 1])


def build_discretization(cfg: RunConfig) -> Discretization:
    sponge = cfg.boundary == "sponge"
    return Discretization(cfg.geometry, cfg.n_points, cfg.domain_radius, cfg.boundary,
                          cfg.sponge_width if sponge else 0.0, cfg.sponge_strength if sponge else 0.0,
                          cfg.stencil)


# ---------------------------------------------------------------------------
# stages


def stage_spectrum(ctx: Context) -> None:
    cfg = ctx.cfg
    disc = build_discretization(cfg)
    H = assemble_operator(disc, build_potential(cfg))
    try:
        spec = point_spectrum(H, cfg.mass, degeneracy_tol=cfg.degeneracy_tol)
    except HypothesisViolation as exc:
        ctx.write_json("spectrum.json", {"error": str(exc), "hypothesis": exc.hypothesis})
        ctx.exit_code = EXIT_H2
        raise
    ctx.disc, ctx.H, ctx.spec = disc, H, spec
    h3 = None
    if spec.n:
        h3 = check_h3(spec, order_cap=cfg.order_cap or None, resonance_tol=cfg.resonance_tol * cfg.mass)
        ctx.h3 = h3
    payload = describe(spec, h3)
    payload["n"] = spec.n
    if spec.n == 0:
        payload["notice"] = "no trapped modes: linear scattering regime"
        ctx.notices.append(payload["notice"])
    ctx.write_json("spectrum.json", payload)
    if spec.n:
        r = disc.grid
        cols = [r] + [disc.to_physical(spec.phi(j)) for j in range(1, spec.n + 1)]
        head = "r," + ",".join(f"phi_{j}" for j in range(1, spec.n + 1))
        np.savetxt(ctx.path("eigenfunctions.csv"), np.column_stack(cols), delimiter=",", header=head, comments="")
    if spec.below_mass:
        ctx.notices.append(f"H2 violated: eigenvalues at or below -m^2: {list(spec.below_mass)}")
        ctx.exit_code = max(ctx.exit_code, EXIT_H2)
    if h3 is not None and h3.violations:
        ctx.notices.append(f"H3 violated: {len(h3.violations)} exact resonances with the mass")
        ctx.exit_code = max(ctx.exit_code, EXIT_H3)


def stage_boundstates(ctx: Context) -> None:
    cfg = ctx.cfg
    if ctx.spec.n == 0:
        ctx.notices.append("bound states skipped: no trapped modes")
        return
    path = default_path(cfg.branch_z_max, cfg.branch_z_min, cfg.branch_per_decade)
    summary = []
    c3 = []
    for j in range(1, ctx.spec.n + 1):
        fam = continue_branch(ctx.spec, ctx.H, j, path)
        ctx.families.append(fam)
        fam.save(ctx.path(f"family_{j}.npz"))
        fam.to_csv(ctx.path(f"family_{j}.csv"))
        summary.append({"branch": j, "a0": fam.a0, "samples": fam.n_samples, "terminated": fam.terminated,
                        "E_at_a0": float(fam.energies[-1]), "max_residual": float(np.max(fam.residuals))})
        c3.append(criteria.criterion_3(fam, ctx.H))
    ctx.write_json("boundstates.json", {"branches": summary})
    worst = c3[0]
    for r in c3:
        if not r.passed:
            worst = r
    ctx.results["3"] = worst


def stage_resonances(ctx: Context) -> None:
    cfg = ctx.cfg
    spec = ctx.spec
    if spec.n == 0:
        ctx.notices.append("resonance table skipped: no trapped modes")
        return
    N = ctx.h3.N
    table = table_from_spectrum(spec, N=N, order=cfg.table_order or None, tol=cfg.resonance_tol * cfg.mass)
    ctx.table = table
    ctx.path("table.json").write_text(table.to_json() + "\n")
    r_own = min(table.order, 8 if spec.n <= 2 else 5)
    extra = ((tuple(float(w) for w in spec.omegas), r_own),)
    cases = criteria.SYNTHETIC_TABLES if cfg.synthetic_tables else ()
    ctx.results["1"] = criteria.criterion_1(cases, spec.mass, extra=extra)
    ctx.results["2"] = criteria.criterion_2(spec.omegas, spec.mass, N, n_samples=cfg.split_samples, seed=cfg.seed)
    if ctx.families:
        profiles = cubic_leading_profiles(spec, table)
        ctx.results["4"] = criteria.criterion_4(spec, ctx.H, ctx.families, table, profiles, seed=cfg.seed)


def stage_fgr(ctx: Context) -> None:
    cfg = ctx.cfg
    if ctx.spec.n == 0:
        ctx.notices.append("FGR skipped: no trapped modes")
        return
    disc = Discretization(cfg.geometry, cfg.fgr_n_points, cfg.fgr_domain_radius, "dirichlet", stencil=cfg.stencil)
    H = assemble_operator(disc, build_potential(cfg))
    spec = point_spectrum(H, cfg.mass, degeneracy_tol=cfg.degeneracy_tol)
    table = table_from_spectrum(spec, N=ctx.h3.N, order=cfg.table_order or None, tol=cfg.resonance_tol * cfg.mass)
    profiles = cubic_leading_profiles(spec, table)
    zs = sample_unit_ball(len(spec.signed_omegas), n_sobol=cfg.fgr_n_sobol, seed=cfg.seed)
    rep = check_h4(spec, H, table, profiles, zeta_samples=zs, c_candidate=cfg.c_candidate or None)
    payload = rep.to_dict()
    payload["grid"] = {"n_points": cfg.fgr_n_points, "domain_radius": cfg.fgr_domain_radius}
    payload["omegas"] = [float(w) for w in spec.omegas]
    payload["surrogate_note"] = "couplings are the cubic leading-order surrogate, not normal-form coefficients"
    ctx.write_json("fgr.json", payload)
    ctx.results["5"] = criteria.criterion_5(spec, H, n_random=cfg.positivity_samples, seed=cfg.seed,
                                            free_n=cfg.free_n_points, free_R=cfg.free_domain_radius)


def stage_toy(ctx: Context) -> None:
    cfg = ctx.cfg
    model = ToyModel(cfg.toy_n_grid, cfg.toy_box, cfg.toy_amplitude, cfg.toy_width)
    G = gaussian_toy_profile(cfg.toy_amplitude, cfg.toy_width)
    c_quad = circle_constant(G)
    c_res = circle_constant_resolvent(G, box=cfg.toy_box, n_grid=cfg.toy_n_grid)
    rep = toy_run(model, cfg.toy_z0, cfg.toy_T, dt=cfg.toy_dt or None, output_stride=cfg.toy_output_stride,
                  c_reference=c_quad)
    payload = rep.to_dict()
    payload.update({"c_quadrature": c_quad, "c_resolvent": c_res, "c_closed_form": model.c_closed_form(),
                    "lambda_eff": model.lambda_eff()})
    ctx.write_json("toy.json", payload)
    np.savetxt(ctx.path("toy_series.csv"), np.column_stack([rep.times, rep.z_abs2]), delimiter=",",
               header="t,abs_z2", comments="")
    ctx.results["6"] = criteria.criterion_6(rep, model, c_quad)


class SnapshotWriter:
    """Flat binary dump: 8-byte magic, int64 n_points, then per record
    float64 time, complex128 u[n_points], complex128 v[n_points]."""

    def __init__(self, path: Path, n_points: int):
        self.fh = open(path, "wb")
        self.n = n_points
        self.fh.write(SNAPSHOT_MAGIC + struct.pack("<q", n_points))

    def __call__(self, state):
        self.fh.write(struct.pack("<d", float(state.time)))
        self.fh.write(np.ascontiguousarray(state.u, dtype="<c16").tobytes())
        self.fh.write(np.ascontiguousarray(state.v, dtype="<c16").tobytes())

    def close(self):
        self.fh.close()


def read_snapshots(path):
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file")
    (n,) = struct.unpack("<q", raw[8:16])
    rec = 8 + 32 * n
    out = []
    for off in range(16, len(raw), rec):
        (t,) = struct.unpack("<d", raw[off:off + 8])
        u = np.frombuffer(raw, dtype="<c16", count=n, offset=off + 8)
        v = np.frombuffer(raw, dtype="<c16", count=n, offset=off + 8 + 16 * n)
        out.append((t, u.copy(), v.copy()))
    return out


def stage_simulate(ctx: Context) -> None:
    cfg = ctx.cfg
    if not ctx.families:
        ctx.notices.append("simulation skipped: no bound-state families")
        return
    spec, H, fams = ctx.spec, ctx.H, ctx.families
    dt = cfg.dt or None
    snap = cfg.snap_every or None
    writer = SnapshotWriter(ctx.path("snapshots.bin"), H.n) if cfg.write_snapshots else None
    try:
        start = criteria.ansatz_state(fams, cfg.init_abs, cfg.init_phase)
        surv = nlkg_run(start, spec, H, fams, cfg.T_final, dt=dt, snap_every=snap, sponge=cfg.sim_sponge,
                        on_snapshot=writer)
    finally:
        if writer is not None:
            writer.close()
    surv.to_csv(ctx.path("trajectory_complex.csv"))
    real = nlkg_run(criteria.real_state(spec, cfg.init_real_amplitude), spec, H, fams, cfg.real_T, dt=dt,
                    snap_every=snap, sponge=cfg.sim_sponge)
    real.to_csv(ctx.path("trajectory_real.csv"))
    en = nlkg_run(start, spec, H, fams, cfg.energy_T, dt=dt, snap_every=snap, sponge=False)
    rates = criteria.eps_pair_rates(spec, H, fams, cfg.eps_pair, cfg.eps_T)
    ctx.write_json("simulate.json", {
        "complex_start": diagnostics(surv, ctx.table).to_dict(),
        "real_start": diagnostics(real, ctx.table).to_dict(),
        "energy_run": diagnostics(en).to_dict(),
        "eps_pair": list(cfg.eps_pair), "eps_rates": rates,
        "truncated": {"complex": surv.truncated, "real": real.truncated, "energy": en.truncated},
    })
    ctx.results["7"] = criteria.criterion_7(spec, H, fams, surv, real, en, cfg.eps_pair, rates)


STAGE_FUNCS = {
    "spectrum": stage_spectrum, "boundstates": stage_boundstates, "resonances": stage_resonances,
    "fgr": stage_fgr, "toy": stage_toy, "simulate": stage_simulate,
}


# ---------------------------------------------------------------------------
# verdict and manifest


def spectrum_line(ctx: Context) -> str | None:
    spec = ctx.spec
    if spec is None:
        return None
    w = ", ".join(f"{x:.10g}" for x in spec.omegas)
    N = f", N = {ctx.h3.N}" if ctx.h3 is not None else ""
    return f"trapped modes n = {spec.n}, omega = [{w}]{N}"


def verdict(ctx: Context) -> dict:
    entries = {}
    for key in CRITERIA:
        if key in ctx.results:
            entries[key] = ctx.results[key].verdict_entry()
        elif key == "8":
            entries[key] = criteria.criterion_8_placeholder()
        else:
            entries[key] = {"status": "skipped", "title": "", "values": {}, "note": "stage not run"}
    return {"config_digest": ctx.cfg.digest(), "name": ctx.cfg.name, "criteria": entries,
            "notices": list(ctx.notices)}


def _versions() -> dict:
    import numba
    import scipy

    return {"kgstab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version(), "backend": backend_name()}


def _summary(ctx: Context, v: dict) -> str:
    lines = [f"run {ctx.cfg.name}  config {ctx.cfg.digest()[:12]}"]
    for key, e in v["criteria"].items():
        lines.append(f"  criterion {key}: {e['status']:<9} {e.get('title', '')}")
    for r in ctx.results.values():
        lines.append("  " + r.line())
    for n in ctx.notices:
        lines.append(f"  notice: {n}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, out_dir, stages, config_path: str | None = None, log=print) -> Context:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg, out)
    failure = None
    for st in expand_stages(stages):
        t0 = time.perf_counter()
        log(f"[{st}] running")
        try:
            STAGE_FUNCS[st](ctx)
        except Exception as exc:  # stage-tagged halt, partial artifacts kept
            failure = StageFailure(st, exc)
            if ctx.exit_code == EXIT_OK:
                ctx.exit_code = EXIT_STAGE_FAILED
            ctx.timings[st] = time.perf_counter() - t0
            ctx.error = str(failure)
            break
        ctx.timings[st] = time.perf_counter() - t0
        log(f"[{st}] done in {ctx.timings[st]:.1f} s")

    v = verdict(ctx)
    ctx.write_json("verdict.json", v)
    ctx.path("summary.txt").write_text(_summary(ctx, v))
    manifest = {
        "config_digest": cfg.digest(),
        "config": json.loads(cfg.canonical()),
        "inputs": [p for p in (config_path, cfg.potential_file or None) if p],
        "outputs": list(ctx.files),
        "versions": _versions(),
        "tolerances": {
            "resonance_tol": cfg.resonance_tol * cfg.mass, "degeneracy_tol": cfg.degeneracy_tol,
            "newton_tol": 1e-10, "decomposition_tol": 1e-10, "density_rtol": 1e-2,
            "eps_schedule": "0.1 m 2^-k, k = 0..5, floor 3 x level spacing",
        },
        "timings_s": {k: round(t, 3) for k, t in ctx.timings.items()},
        "criterion_timings_s": {k: round(r.seconds, 3) for k, r in ctx.results.items()},
        "stages": list(expand_stages(stages)),
        "failed_stage": failure.stage if failure else None,
        "error": str(failure) if failure else None,
        "exit_code": ctx.exit_code,
        "argv": sys.argv[1:],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ctx


__all__ = ["run", "expand_stages", "build_potential", "build_discretization", "read_snapshots", "Context",
           "StageFailure", "spectrum_line", "EXIT_OK", "EXIT_STAGE_FAILED", "EXIT_H2", "EXIT_H3"]
