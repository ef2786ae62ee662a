"""Command-line front end.

Subcommands: sweep (run a grid from a TOML config and/or preset),
theory-table (print the critical-noise scaling table), validate (check a
config without running). Exit codes: 0 success, 2 some sweep cells failed,
1 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .errors import ParityLabError
from .presets import preset_names
from .sweep import load_config, run_sweep
from .theory import scaling_table

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # failed sweep cells, so route usage problems through exit code 1
    def error(self, message):
        raise ParityLabError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="paritylab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a (model x P x kappa x seed) grid")
    sweep.add_argument("config", nargs="?", default=None, help="TOML config path")
    sweep.add_argument(
        "--preset",
        default=None,
        help=f"start from a named preset ({', '.join(preset_names())})",
    )
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--master-seed", type=int, default=None)
    sweep.add_argument("--out", default=None, help="output CSV path")

    table = sub.add_parser("theory-table", help="critical noise vs dimension")
    table.add_argument("--mode", choices=("MF", "ARD"), required=True)
    table.add_argument(
        "--d", required=True, help="comma-separated input dimensions, e.g. 64,128,256"
    )
    table.add_argument("--k", type=int, required=True, help="parity order")
    table.add_argument("--N", type=int, required=True, help="hidden width")
    table.add_argument("--gamma", type=float, default=0.5)
    table.add_argument("--sigma-w", type=float, default=1.0)
    table.add_argument("--sigma-a", type=float, default=1.0)
    table.add_argument("--rho-on", type=float, default=1.0)

    val = sub.add_parser("validate", help="parse and validate a config")
    val.add_argument("config")
    return parser


def _cmd_sweep(args) -> int:
    if args.config is None and args.preset is None:
        raise ParityLabError("sweep needs a config file, a --preset, or both")
    config = load_config(
        path=args.config,
        preset=args.preset,
        overrides={
            "workers": args.workers,
            "master_seed": args.master_seed,
            "out": args.out,
        },
    )
    summary = run_sweep(config)
    print(
        f"cells={summary.cells} ok={summary.ok} failed={summary.failed} "
        f"skipped={summary.skipped} out={summary.out}"
    )
    return 0 if summary.failed == 0 else 2


def _cmd_theory_table(args) -> int:
    try:
        dims = [int(part) for part in args.d.split(",") if part.strip()]
    except ValueError:
        raise ParityLabError(f"--d must be comma-separated integers, got {args.d!r}")
    if not dims:
        raise ParityLabError("--d must name at least one dimension")
    rows = scaling_table(
        args.mode,
        dims,
        args.k,
        N=args.N,
        gamma=args.gamma,
        sigma_w=args.sigma_w,
        sigma_a=args.sigma_a,
        rho_on=args.rho_on,
    )
    print("d,kappa_c_sq")
    for d, kc2 in rows:
        print(f"{d},{kc2:.17g}")
    return 0


def _cmd_validate(args) -> int:
    config = load_config(path=args.config)
    grid = (
        len(config.models)
        * len(config.P_grid)
        * len(config.kappa_grid)
        * config.seeds
    )
    print(f"ok: {len(config.models)} model(s), {grid} cells, out={config.out}")
    return 0


def main(argv: Optional[list] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "theory-table":
            return _cmd_theory_table(args)
        return _cmd_validate(args)
    except ParityLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
