"""``quasiphys run <config> [--seed N] [--out DIR] [--format csv|jsonl]``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
configuration or I/O errors. A config error is detected before any file is
written.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .errors import ConfigError
from .scenario import FORMATS, SEED_ENV, emit, load_config, resolve_seed, run

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasiphys", description="Run quasi-set and particle-mechanics scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario config")
    r.add_argument("config", type=Path)
    r.add_argument("--seed", type=int, help=f"overrides {SEED_ENV} and the config seed")
    r.add_argument("--out", type=Path, help="artifact directory (default: config 'output' or runs/<config name>)")
    r.add_argument("--format", choices=FORMATS, default="jsonl", help="summary file format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = resolve_seed(args.seed, cfg)
        if args.out is not None:
            out = args.out
        elif cfg.output is not None:
            out = args.config.parent / cfg.output
        else:
            out = Path("runs") / args.config.stem
        start = time.perf_counter()
        summary = run(cfg, seed)
        elapsed = time.perf_counter() - start
        emit(summary, out, args.format)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for c in summary.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} max_residual={c.max_residual:.3g}")
    print(f"{summary.kind}: {summary.passed} passed, {summary.failed} failed -> {out}")
    print(f"wall clock {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK if summary.ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
