"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment.  Unknown keys are rejected
so that a typo never silently falls back to a default.  ``SCHEMA`` below is
the complete list of keys with their types and defaults.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

STAGES = ("spectrum", "boundstates", "resonances", "fgr", "toy", "simulate")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _stages(text: str) -> tuple:
    out = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in out if s not in STAGES]
    if bad:
        raise ValueError(f"unknown stage(s) {bad}; choose from {STAGES}")
    return out


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"{t!r} not in {options}")
        return t
    return parse


# key: (parser, default, description)
SCHEMA = {
    "name": (str, "run", "label copied into every report"),
    "seed": (int, 0, "seed for zeta sampling and random-field checks"),
    "threads": (int, 1, "worker cap; 1 gives bitwise reproducible output"),
    "stages": (_stages, STAGES, "comma separated subset of " + ",".join(STAGES)),
    "mass": (float, 1.0, "Klein-Gordon mass m"),
    # grid
    "geometry": (_choice("radial3d", "line1d"), "radial3d", "radial3d acts on w = r u"),
    "n_points": (int, 512, "interior grid points"),
    "domain_radius": (float, 60.0, "grid truncation R"),
    "boundary": (_choice("dirichlet", "sponge"), "sponge", "outer boundary treatment"),
    "sponge_width": (float, 20.0, "width of the absorbing layer"),
    "sponge_strength": (float, 1.0, "peak damping rate of the layer"),
    "stencil": (_choice("fd4", "fd2", "sine"), "fd4", "Laplacian discretization"),
    # potential
    "potential": (_choice("zero", "gaussian_well", "sum_of_gaussians", "tabulated"), "gaussian_well", "potential form"),
    "depth": (float, -16.87642739710215, "gaussian_well depth (negative traps)"),
    "width": (float, 0.5, "gaussian_well width"),
    "center": (float, 0.0, "gaussian_well center"),
    "wells": (str, "", "sum_of_gaussians as depth:width:center; depth:width:center"),
    "potential_file": (str, "", "two-column text file (x, V) for the tabulated form"),
    # hypotheses
    "order_cap": (int, 0, "cap on the exact-resonance scan order; 0 means 4N+6"),
    "resonance_tol": (float, 1e-6, "margin for strict inequalities, in units of m"),
    "degeneracy_tol": (float, 1e-9, "relative gap below which eigenvalues count as degenerate"),
    # bound states
    "branch_z_max": (float, 1.2, "largest |z| attempted by continuation"),
    "branch_z_min": (float, 1e-3, "smallest |z| sample"),
    "branch_per_decade": (int, 20, "continuation samples per decade of |z|"),
    # resonance table
    "table_order": (int, 0, "r in M(r); 0 means 2N+4"),
    # fgr
    "fgr_n_points": (int, 10000, "grid points of the separate large-radius grid used for FGR"),
    "fgr_domain_radius": (float, 1000.0, "radius of the FGR grid (level spacing sets the eps floor)"),
    "fgr_n_sobol": (int, 200, "Sobol samples of zeta in the unit polydisk"),
    "c_candidate": (float, 0.0, "constant whose validity is reported; 0 reports only the certified one"),
    # toy model
    "toy_n_grid": (int, 512, "toy grid points per side"),
    "toy_box": (float, 200.0, "toy box side"),
    "toy_amplitude": (float, 8.0, "amplitude A of G = A exp(-|x|^2 / 2 s^2)"),
    "toy_width": (float, math.sqrt(2.0), "width s of G"),
    "toy_z0": (float, 0.1, "initial toy amplitude"),
    "toy_T": (float, 1500.0, "toy horizon"),
    "toy_dt": (float, 0.0, "toy step; 0 picks 0.45 / lambda_eff"),
    "toy_output_stride": (int, 20, "steps between recorded |z|^2 samples"),
    # simulation
    "init_abs": (_floats, (0.7, 0.3), "|z_J| of the complex start Phi[z], J = 1..2n (cycled)"),
    "init_phase": (_floats, (0.3, 1.1), "arg z_J of the complex start"),
    "init_real_amplitude": (float, 0.6, "a in the real start u = a phi_1, v = 0"),
    "T_final": (float, 2000.0, "NLKG horizon"),
    "dt": (float, 0.0, "NLKG step; 0 picks 2 pi / (20 lambda_max(B))"),
    "snap_every": (float, 0.0, "time between decompositions; 0 picks 2 pi / w_1"),
    "sim_sponge": (_bool, True, "apply the sponge during the NLKG run"),
    "write_snapshots": (_bool, False, "dump raw (u, v) snapshots as flat binary"),
    "energy_T": (float, 300.0, "horizon of the sponge-free energy-conservation run"),
    "real_T": (float, 1000.0, "horizon of the real-data run"),
    "eps_pair": (_floats, (0.05, 0.1), "two amplitudes for the eps-scaling check"),
    "eps_T": (float, 50.0, "horizon of each eps-scaling run"),
    # verdict checks
    "synthetic_tables": (_bool, True, "include the synthetic n = 1, 2, 3 table comparisons"),
    "split_samples": (int, 500, "random monomials for the splitting check"),
    "positivity_samples": (int, 100, "random inputs for the spectral-measure positivity check"),
    "free_n_points": (int, 20000, "grid points of the V = 0 density check"),
    "free_domain_radius": (float, 3000.0, "radius of the V = 0 density check"),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict
    source: str = "<defaults>"
    explicit: tuple = field(default=())

    def __getattr__(self, key):
        if key.startswith("__") or key == "values":
            raise AttributeError(key)
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    def replace(self, **kw) -> "RunConfig":
        for k in kw:
            if k not in SCHEMA:
                raise KeyError(f"unknown config key {k!r}")
        v = dict(self.values)
        v.update(kw)
        return RunConfig(v, self.source, tuple(sorted(set(self.explicit) | set(kw))))

    def canonical(self) -> str:
        return json.dumps({k: _jsonable(v) for k, v in sorted(self.values.items())}, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def defaults() -> RunConfig:
    return RunConfig({k: d for k, (_, d, _) in SCHEMA.items()})


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    values = {k: d for k, (_, d, _) in SCHEMA.items()}
    seen = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        seen.append(key)
    return RunConfig(values, source, tuple(seen))


def load_config(path) -> RunConfig:
    p = Path(path)
    return parse_config(p.read_text(), str(p))


def schema_text() -> str:
    lines = []
    for k, (_, d, doc) in SCHEMA.items():
        dv = ",".join(str(x) for x in d) if isinstance(d, tuple) else d
        lines.append(f"{k} = {dv}    # {doc}")
    return "\n".join(lines)


__all__ = ["RunConfig", "SCHEMA", "STAGES", "defaults", "parse_config", "load_config", "schema_text"]
