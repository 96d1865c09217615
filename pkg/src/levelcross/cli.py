"""Command-line entry point.

Subcommands: validate, actions, predict, monodromy, shoot, grid, sweep.
Exit status: 0 success, 1 computation failure, 2 usage or config error.
All numeric output uses 17 significant digits so artifacts round-trip the
underlying doubles.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import actions as actions_mod
from . import grid_eig, harness, monodromy, predict, shooting
from ._fmt import dump_csv, dump_json
from .errors import LevelCrossError
from .model import load_model, truncation_half_width, validate_model


def _add_model(p):
    p.add_argument("--model", required=True, help="model definition JSON file")


def _add_window(p):
    p.add_argument("--e0", type=float, required=True, help="window center energy")
    p.add_argument("--c0", type=float, default=1.0, help="window half-width factor")
    p.add_argument("--h", type=float, required=True, help="semiclassical parameter")


def build_parser():
    root = argparse.ArgumentParser(
        prog="levelcross",
        description="Eigenvalues of a two-channel Schrodinger system with a "
                    "level crossing: predictions, shooting, grid oracle.",
    )
    root.add_argument("--format", choices=("json", "csv"), default="json",
                      help="output format for record-style results")
    root.add_argument("--workers", type=int,
                      default=int(os.environ.get("LEVELCROSS_WORKERS", "0")),
                      help="worker count for the sweep (0 = auto)")
    root.add_argument("-v", "--verbose", action="count", default=0)
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the structural assumptions")
    _add_model(p)
    p.add_argument("--e-samples", type=int, default=8)
    p.add_argument("--scan", type=float, nargs=3, metavar=("LO", "HI", "STEP"),
                   default=None)

    p = sub.add_parser("actions", help="action integrals at one energy")
    _add_model(p)
    p.add_argument("--energy", type=float, required=True)

    p = sub.add_parser("predict", help="Bohr-Sommerfeld roots and split pairs")
    _add_model(p)
    _add_window(p)

    p = sub.add_parser("monodromy", help="cycle-matrix roots and Lambda entries")
    _add_model(p)
    _add_window(p)

    p = sub.add_parser("shoot", help="Wronskian shooting eigenvalues")
    _add_model(p)
    _add_window(p)
    p.add_argument("--x", type=float, default=None, help="truncation half-width")

    p = sub.add_parser("grid", help="banded-matrix eigenvalues in a window")
    _add_model(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="interior points (fixed grid)")
    p.add_argument("--x", type=float, default=None, help="grid half-width")
    p.add_argument("--target-err", type=float, default=None)

    p = sub.add_parser("sweep", help="h-sweep experiment bundle")
    p.add_argument("--config", required=True, help="sweep configuration JSON")
    return root


def _emit(payload, fmt, csv_header=None, csv_rows=None):
    if fmt == "csv" and csv_rows is not None:
        sys.stdout.write(dump_csv(csv_header, csv_rows))
    else:
        sys.stdout.write(dump_json(payload))


def _run_validate(args, fmt):
    m = load_model(args.model)
    scan = tuple(args.scan) if args.scan else None
    report = validate_model(m, e_samples=args.e_samples, x_scan=scan)
    _emit(report.as_dict(), fmt,
          csv_header=["check", "passed", "detail"],
          csv_rows=[(c.name, c.passed, c.detail) for c in report.checks])
    return 0 if report.passed else 1


def _run_actions(args, fmt):
    m = load_model(args.model)
    aset = actions_mod.action_set(m, args.energy)
    d = aset.as_dict()
    d["energy"] = args.energy
    _emit(d, fmt, csv_header=["field", "value"],
          csv_rows=[(k, v) for k, v in d.items() if not isinstance(v, dict)])
    return 0


def _run_predict(args, fmt):
    m = load_model(args.model)
    roots = predict.bohr_sommerfeld_roots(m, args.e0, args.c0, args.h)
    pairs = predict.predicted_pairs(m, args.e0, args.c0, args.h) if m.symmetric else []
    payload = {"roots": [r.as_dict() for r in roots],
               "pairs": [p.as_dict() for p in pairs]}
    _emit(payload, fmt,
          csv_header=["j", "k", "E", "mult"],
          csv_rows=[(r.j, r.k, r.E, r.multiplicity) for r in roots])
    return 0


def _run_monodromy(args, fmt):
    m = load_model(args.model)
    roots = monodromy.monodromy_roots(m, args.e0, args.c0, args.h)
    out = []
    for e in roots:
        lam = monodromy.lambda_matrix(m, e, args.h).lam
        out.append({"E": e, "lambda": [[lam[0, 0], lam[0, 1]], [lam[1, 0], lam[1, 1]]]})
    _emit({"roots": out}, fmt,
          csv_header=["E"], csv_rows=[(e,) for e in roots])
    return 0


def _run_shoot(args, fmt):
    m = load_model(args.model)
    roots = shooting.shooting_roots(m, args.e0, args.c0, args.h, X=args.x)
    out = [{"E": e, "wronskian": shooting.wronskian(m, e, args.h, X=args.x).value}
           for e in roots]
    _emit({"roots": out}, fmt,
          csv_header=["E", "wronskian"],
          csv_rows=[(r["E"], r["wronskian"]) for r in out])
    return 0


def _run_grid(args, fmt):
    m = load_model(args.model)
    if args.n is not None:
        x = args.x if args.x is not None else truncation_half_width(m)
        g = grid_eig.Grid(x_half_width=x, n=args.n)
        evs = grid_eig.eigen_window(grid_eig.assemble(m, args.h, g), args.lo, args.hi)
        g2 = grid_eig.Grid(x_half_width=x, n=2 * args.n)
        evs2 = grid_eig.eigen_window(grid_eig.assemble(m, args.h, g2), args.lo, args.hi)
        if len(evs2) == len(evs):
            ests = [4.0 / 3.0 * abs(a - b) for a, b in zip(evs, evs2)]
        else:
            ests = [float("inf")] * len(evs)
        report = grid_eig.EigenReport(
            method="grid", eigenvalues=evs, error_estimates=ests, n=args.n,
            x_half_width=x, h=args.h, window=(args.lo, args.hi),
            converged=True, notes="fixed grid; estimates from n vs 2n",
        )
    else:
        target = args.target_err if args.target_err is not None \
            else args.h ** 1.5 / 100.0
        report = grid_eig.converged_window(m, args.h, args.lo, args.hi, target)
    _emit(report.as_dict(), fmt,
          csv_header=["eigenvalue", "error_estimate"],
          csv_rows=list(zip(report.eigenvalues, report.error_estimates)))
    return 0 if report.converged else 1


def _run_sweep(args, fmt, workers):
    with open(args.config) as f:
        config = json.load(f)
    if workers <= 0:
        workers = min(len(config.get("h_values", [])) or 1, os.cpu_count() or 1)
    bundle = harness.run_sweep(config, workers=workers)
    summary = {
        "oracle_disagreement": bundle["oracle_disagreement"],
        "fit": bundle.get("fit"),
        "n_h": len(bundle["per_h"]),
        "out_dir": config.get("out_dir"),
    }
    sys.stdout.write(dump_json(summary))
    return 1 if bundle["oracle_disagreement"] else 0


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        if args.command == "validate":
            return _run_validate(args, args.format)
        if args.command == "actions":
            return _run_actions(args, args.format)
        if args.command == "predict":
            return _run_predict(args, args.format)
        if args.command == "monodromy":
            return _run_monodromy(args, args.format)
        if args.command == "shoot":
            return _run_shoot(args, args.format)
        if args.command == "grid":
            return _run_grid(args, args.format)
        if args.command == "sweep":
            return _run_sweep(args, args.format, args.workers)
        parser.error(f"unknown command {args.command!r}")
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"levelcross: config error: {exc}", file=sys.stderr)
        return 2
    except (LevelCrossError, RuntimeError) as exc:
        print(f"levelcross: {exc}", file=sys.stderr)
        return 1
    return 2


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
