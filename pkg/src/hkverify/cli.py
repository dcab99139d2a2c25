"""Command line entry point ``hk``.

Exit codes: 0 every check passed, 1 some check failed (reports are still
written), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys

from .errors import InputError
from .harness import EXPERIMENTS, load_config, run


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hk", description="Heat kernel envelope verification experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="INI config file")
    p.add_argument("--seed", type=int, help="master seed (overrides [sim] seed)")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--paths", type=int, help="paths per Monte Carlo estimate")
    p.add_argument("--dt", type=float, help="Monte Carlo step")
    p.add_argument("-q", "--quiet", action="store_true", help="print the summary line only")
    return p


def _cell(v: float) -> str:
    return "-" if isinstance(v, float) and math.isnan(v) else f"{v:.6g}"


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.paths is not None and args.paths <= 0:
        print("hk: error: --paths must be positive", file=sys.stderr)
        return 2
    if args.dt is not None and not args.dt > 0:
        print("hk: error: --dt must be positive", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.experiment,
                          dict(seed=args.seed, n_paths=args.paths, dt=args.dt, out=args.out))
        report = run(cfg)
    except (InputError, OSError) as exc:
        print(f"hk: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        for suite, r in report.rows:
            flag = "PASS" if r.passed else "FAIL"
            print(f"{flag} {r.name} observed={_cell(r.observed)} bound={_cell(r.bound)} "
                  f"metric={_cell(r.metric)} {r.detail}".rstrip())
    n_fail = sum(not r.passed for _, r in report.rows)
    print(f"{report.experiment}: {len(report.rows) - n_fail}/{len(report.rows)} checks passed, "
          f"{report.wall_time:.1f} s -> {cfg.output_dir}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
