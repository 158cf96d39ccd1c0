"""Command line front-end.

Commands: ``run`` (full pipeline for one estimator), ``compare``
(cross-validate several estimators and rank them), ``synth`` (write the
bundled synthetic well table), ``render`` (re-render an SVG from artifact
files). Exit codes: 0 success, 1 usage, 2 data error, 3 numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import RunConfig, apply_overrides, load_config
from .errors import UsageError, WpimapError
from .synth import BUNDLE_N_WELLS, BUNDLE_SEED


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through the exit-code mapping."""

    def error(self, message):
        raise UsageError(message)


def _add_shared_flags(parser):
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--input", type=Path, help="wells CSV")
    parser.add_argument("--secondary", choices=["fluid", "proppant", "none"],
                        help="secondary variable (default none)")
    parser.add_argument("--structure",
                        choices=["spherical", "exponential", "gaussian"],
                        help="variogram structure (default spherical)")
    parser.add_argument("--cutoff", type=float, help="variogram cutoff in meters")
    parser.add_argument("--n-bins", type=int, dest="n_bins",
                        help="lag bin count (default 15)")
    parser.add_argument("--cv", help="cross-validation mode: loo or k=<int>")
    parser.add_argument("--seed", type=int, help="fold-plan seed (default 0)")
    parser.add_argument("--grid", help="grid dimensions as nx,ny (default 100,100)")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--back-transform", action="store_true", default=None,
                        dest="back_transform",
                        help="add a 10^prediction column to the grid CSV "
                             "(biased for means of kriged logs; see README)")
    parser.add_argument("--tolerance", type=float, dest="colocate_tolerance",
                        help="co-location tolerance in meters (default 0)")
    parser.add_argument("--top-n", type=int, dest="top_n",
                        help="ranked cells to report (default 10)")
    parser.add_argument("--refit", action="store_const", const="refit",
                        dest="refit_policy", default=None,
                        help="refit the variogram model inside every fold")


def build_parser() -> _Parser:
    parser = _Parser(prog="wpimap",
                     description="Well-performance-index mapping by ordinary "
                                 "kriging and co-kriging")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full pipeline for one estimator")
    _add_shared_flags(run_p)

    cmp_p = sub.add_parser("compare",
                           help="cross-validate several estimators and rank them")
    _add_shared_flags(cmp_p)
    cmp_p.add_argument("--estimators", default="ok,ck-fluid,ck-proppant",
                       help="comma list from ok, ck-fluid, ck-proppant")

    synth_p = sub.add_parser("synth", help="write the bundled synthetic well table")
    synth_p.add_argument("--out", type=Path, required=True,
                         help="output directory for wells.csv")
    synth_p.add_argument("--seed", type=int, default=BUNDLE_SEED)
    synth_p.add_argument("--n-wells", type=int, default=BUNDLE_N_WELLS,
                         dest="n_wells")

    render_p = sub.add_parser("render", help="re-render an SVG from artifacts")
    render_p.add_argument("kind", choices=["variogram", "bubble", "heatmap"])
    render_p.add_argument("--data", type=Path, required=True,
                          help="artifact CSV to plot")
    render_p.add_argument("--out", type=Path, required=True, help="output SVG")
    render_p.add_argument("--model", type=Path,
                          help="model.txt for the fitted curve (variogram only)")
    render_p.add_argument("--value-column", default="prediction",
                          dest="value_column",
                          help="grid column to map (heatmap only)")
    return parser


def _config_from_args(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {
        "input": args.input,
        "secondary": args.secondary,
        "structure": args.structure,
        "cutoff": args.cutoff,
        "n_bins": args.n_bins,
        "cv": args.cv,
        "seed": args.seed,
        "out_dir": args.out,
        "back_transform": args.back_transform,
        "colocate_tolerance": args.colocate_tolerance,
        "top_n": args.top_n,
        "refit_policy": args.refit_policy,
    }
    if args.grid:
        try:
            nx, ny = (int(part) for part in args.grid.split(","))
        except ValueError:
            raise UsageError(f"bad --grid value {args.grid!r}; use nx,ny") from None
        overrides["grid_nx"] = nx
        overrides["grid_ny"] = ny
    return apply_overrides(config, **overrides)


def _dispatch(args) -> int:
    if args.command == "run":
        config = _config_from_args(args)
        out = pipeline.run_command(config)
        print(f"artifacts written to {out}")
        print((out / "comparison.txt").read_text(encoding="utf-8"), end="")
        return 0
    if args.command == "compare":
        config = _config_from_args(args)
        specs = [part.strip() for part in args.estimators.split(",") if part.strip()]
        out = pipeline.compare_command(config, specs)
        print(f"comparison written to {out}")
        print((out / "comparison.txt").read_text(encoding="utf-8"), end="")
        return 0
    if args.command == "synth":
        path = pipeline.synth_command(args.out, args.seed, args.n_wells)
        print(f"wrote {path}")
        return 0
    if args.command == "render":
        path = pipeline.render_command(args.kind, args.data, args.out,
                                       args.model, args.value_column)
        print(f"wrote {path}")
        return 0
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
        )
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return exc.exit_code
    except WpimapError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
