"""Command-line interface for the experiment drivers."""

from __future__ import annotations

import argparse
import sys

from ..dilation import dilate_by_order
from ..serialize import dump_dilation
from .config import load_config
from .runners import build_model, run_convergence, run_observable, verify


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lindblad-dilation",
        description="Lindblad simulation via dilated Hamiltonians: convergence "
        "studies, observable traces, and verification reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("run-convergence", "final-time error vs dt for each order, with fitted slopes"),
        ("run-observable", "observable time series for each order plus the reference curve"),
        ("verify", "run the structural/stochastic/convergence property checks"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")

    dump = sub.add_parser(
        "dump-hamiltonian", help="build one dilated Hamiltonian and write it as JSON"
    )
    dump.add_argument("--model", required=True, help="builtin model name (default parameters)")
    dump.add_argument("--order", required=True, type=int, choices=(1, 2, 3))
    dump.add_argument("--dt", required=True, type=float)
    dump.add_argument("--t", type=float, default=0.0, help="step start time (default 0)")
    dump.add_argument("--out", required=True, help="output JSON path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run-convergence":
        result = run_convergence(load_config(args.config))
        for k in sorted(result["slopes"]):
            print(f"order {k}: slope {result['slopes'][k]:.4f}")
        print(f"wrote {result['csv_path']}")
        print(f"wrote {result['slopes_path']}")
        return 0

    if args.command == "run-observable":
        result = run_observable(load_config(args.config))
        print(f"wrote {result['csv_path']}")
        return 0

    if args.command == "verify":
        cfg = load_config(args.config)
        report = verify(cfg)
        for check in report["checks"]:
            print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}")
        print("all checks passed" if report["all_passed"] else "FAILURES present")
        return 0 if report["all_passed"] else 1

    model = build_model(args.model, {})
    dh = dilate_by_order(model, args.order, args.t, args.dt)
    dump_dilation(dh, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
