"""Command line entry point: ``kgstab <subcommand> --config PATH --out DIR``."""

from __future__ import annotations

import argparse
import os
import sys

SUBCOMMANDS = ("spectrum", "boundstates", "resonances", "fgr", "toy", "simulate", "fullrun")
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS",
                "VECLIB_MAXIMUM_THREADS")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgstab", description=__doc__)
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="flat key = value config file; defaults apply when omitted")
    p.add_argument("--out", default="kgstab_out", help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker cap; 1 makes output bitwise reproducible")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # config parsing is stdlib only, so numpy is not loaded yet
    from .config import defaults, load_config

    try:
        cfg = load_config(args.config) if args.config else defaults()
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.threads is not None:
        cfg = cfg.replace(threads=args.threads)
    if cfg.threads < 1:
        print("threads must be >= 1", file=sys.stderr)
        return 2
    # must happen before numpy and BLAS load
    for var in _THREAD_VARS:
        os.environ[var] = str(cfg.threads)

    from . import pipeline

    stages = cfg.stages if args.command == "fullrun" else (args.command,)
    log = (lambda *a, **k: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    ctx = pipeline.run(cfg, args.out, stages, config_path=args.config, log=log)
    if ctx.error:
        print(ctx.error, file=sys.stderr)
    line = pipeline.spectrum_line(ctx)
    if line:
        print(line)
    for n in ctx.notices:
        print(n)
    for key in sorted(ctx.results):
        print(ctx.results[key].line())
    return ctx.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
