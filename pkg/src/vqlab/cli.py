"""Command-line entry points.

    vq-lab oracle --density linear2x --n 100 [--tol 1e-12] [--out file.csv]
    vq-lab run --config experiment.cfg [--out dir] [--seed k] [--stride s]
    vq-lab plot --in rundir --out figure.svg [--linear-y]

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench.config import load_config
from .bench.experiments import run_experiment
from .bench.plotting import emit_plot
from .densities import DENSITY_NAMES, get_density
from .errors import ConfigError, VQLabError
from .oracle import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_fixed_point


def _cmd_oracle(args) -> int:
    density = get_density(args.density)
    n = args.n
    levels = [(i + 0.5) / n for i in range(n)]
    q0 = [density.ppf(u) for u in levels]
    solution = solve_fixed_point(density, q0, tol=args.tol, max_iter=args.max_iter)
    text = solution.to_csv_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not solution.converged:
        print(
            f"warning: not converged, residual {solution.residual:.3e}",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_run(args) -> int:
    overrides = {
        "out": args.out,
        "stride": args.stride,
        "standardize": args.standardize,
        "seeds": args.seed,
        "workers": args.workers,
    }
    config = load_config(args.config, overrides)
    result = run_experiment(config)
    print(f"wrote {len(result.trace_paths)} traces under {result.out_dir}")
    print(f"summary: {result.summary_path}")
    if result.plot_path:
        print(f"plot:    {result.plot_path}")
    return 0


def _cmd_plot(args) -> int:
    in_path = Path(args.in_dir)
    traces_dir = in_path / "traces" if (in_path / "traces").is_dir() else in_path
    files = sorted(traces_dir.glob("*.csv"))
    out = emit_plot(files, args.out, log_y=not args.linear_y)
    print(f"plot: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vq-lab",
        description="Vector-quantization laboratory: exact oracles and convergence benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    oracle = sub.add_parser("oracle", help="solve exact 1-D optimal quantizers")
    oracle.add_argument("--density", required=True, choices=DENSITY_NAMES)
    oracle.add_argument("--n", type=int, required=True, help="number of quantizers")
    oracle.add_argument("--tol", type=float, default=DEFAULT_TOL)
    oracle.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    oracle.add_argument("--out", help="write CSV here instead of stdout")
    oracle.set_defaults(fn=_cmd_oracle)

    runner = sub.add_parser("run", help="run an experiment config")
    runner.add_argument("--config", required=True)
    runner.add_argument("--out", help="override output directory")
    runner.add_argument("--seed", help="override the seed list (comma separated)")
    runner.add_argument("--stride", help="override the probe stride")
    runner.add_argument("--standardize", choices=("on", "off"))
    runner.add_argument("--workers", help="parallel cell processes")
    runner.set_defaults(fn=_cmd_run)

    plot = sub.add_parser("plot", help="plot traces from a run directory")
    plot.add_argument("--in", dest="in_dir", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--linear-y", action="store_true", help="disable the log y-axis")
    plot.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except VQLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
