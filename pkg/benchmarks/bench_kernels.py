"""Numba vs numpy timings for every hot kernel, plus one end-to-end stage.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--stage]

Kernel rows call both flavours side by side after a warm-up call, so JIT
compilation is excluded.  ``--stage`` additionally times the smoke-config
simulate stage in two subprocesses, one with KGSTAB_NO_NUMBA=1.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from kgstab import kernels

ROOT = Path(__file__).resolve().parents[1]


def best_of(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    om = np.array([0.41, 0.66, 0.87])
    yield "h3_scan (n=3, order 14)", lambda k: k(om, 14, 1.0, 1e-9), "_h3_scan"
    yield "compositions (d=6, t=8)", lambda k: k(6, 8), "_compositions"

    w6 = np.concatenate([om, -om])
    mus = kernels._compositions_np(6, 4)
    nus = kernels._compositions_np(6, 5)
    yield "level_pairs (d=6, t=4)", lambda k: k(mus, nus, w6, 1.0, 1e-9), "_level_pairs"

    cand = rng.integers(0, 4, size=(20000, 6)).astype(np.int64)
    base = rng.integers(1, 4, size=(300, 6)).astype(np.int64)
    yield "dominated (20000 x 300)", lambda k: k(cand, base), "_dominated"

    n = 512
    hk0 = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * 1e-3
    gm = rng.standard_normal((n, n)) + 0j
    ph = np.exp(-1j * rng.random((n, n)))
    yield "toy_fourier_step (512^2)", lambda k: k(hk0.copy(), gm, ph, 1e-3 + 0j, 1e-4), "_toy_fourier_step"

    m = 4096
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v0 = np.zeros(m, dtype=complex)
    inv_r2 = 1.0 / np.linspace(0.1, 60.0, m) ** 2
    yield "cubic_kick (n=4096)", lambda k: k(u, v0.copy(), inv_r2, 0.01), "_cubic_kick"


def stage_timing():
    cfg = ROOT / "configs" / "smoke.cfg"
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, KGSTAB_NO_NUMBA=flag)
        with tempfile.TemporaryDirectory() as tmp:
            t0 = time.perf_counter()
            subprocess.run([sys.executable, "-m", "kgstab.cli", "simulate", "--config", str(cfg),
                            "--out", tmp, "--threads", "1", "--quiet"], env=env, check=True,
                           stdout=subprocess.DEVNULL)
            out[label] = time.perf_counter() - t0
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--stage", action="store_true", help="also time the smoke simulate stage")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for label, call, stem in cases(rng):
        t_nb = best_of(lambda: call(getattr(kernels, stem + "_nb")), args.repeat)
        t_np = best_of(lambda: call(getattr(kernels, stem + "_np")), args.repeat)
        print(f"{label:<28}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")

    if args.stage:
        t = stage_timing()
        print(f"\nsmoke simulate stage (process wall time): numba {t['numba']:.1f} s, numpy {t['numpy']:.1f} s")


if __name__ == "__main__":
    main()
