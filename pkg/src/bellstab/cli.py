"""Command-line entry point: ``bellstab <command> --config run.json --out results/``.

Exit codes: 0 success, 2 configuration error, 3 solver or fit failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import FitError
from .harness import COMMANDS, ConfigError, RunConfig, load_config
from .solver import SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_HELP = {
    "steady": "steady-state fidelity, concurrence and Pauli averages (steady.json)",
    "convergence": "F(T_S) series and exponential fit (convergence.csv, convergence_fit.json)",
    "sweep": "fidelity over the drive-parameter grid (sweep.csv)",
    "budget": "error budget: ideal, chi mismatch, T1 only, Tphi only, full (budget.csv)",
    "postselect": "steady state conditioned on the in-loop readout (postselect.json)",
    "tomo": "simulated joint-readout tomography and Clifford-state check (tomo.json, clifford.csv)",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellstab", description="Bell-state stabilization simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in _HELP.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, help="JSON run config (defaults to the built-in parameters)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, help="worker processes for sweep and budget")
        p.add_argument("--tol", type=float, help="override the integrator tolerance")
        p.add_argument("--timing", action="store_true", help="record wall time (outputs stop being reproducible)")
        p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
        if name == "postselect":
            p.add_argument("--threshold", type=float, help="M1 threshold in sigma units (default from config)")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {k: getattr(args, k) for k in ("seed", "workers", "tol") if getattr(args, k) is not None}
    if not changes:
        return cfg
    try:
        return replace(cfg, **changes)
    except ValueError as exc:
        raise ConfigError(f"command-line override: {exc}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    kwargs = {"threshold": args.threshold} if args.command == "postselect" else {}
    try:
        result = COMMANDS[args.command](cfg, out_dir=args.out, timing=args.timing, **kwargs)
    except (SolverError, FitError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    summary = {k: v for k, v in result.items() if k != "rows"}
    print(json.dumps(summary, indent=2, default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
