"""Command line interface.

    gouldrn run <scenario.json> --out <dir> [--tol <r>]
    gouldrn audit [--max-atoms N] [--seed S] --out <dir>
    gouldrn rn <scenario.json> --gamma G --measure M [--tol <r>]

Exit codes: 0 all checks passed, 1 some check failed, 2 infrastructure error
(unreadable or invalid input, unexpected exception).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import rn
from .audit import INJECTIONS, audit
from .checks import jsonable
from .errors import GouldError, HypothesisFailed
from .scenario import EXIT_FAIL, EXIT_INFRA, EXIT_PASS, load_scenario, run


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gouldrn", description="Gould integrals and Radon-Nikodym derivatives on finite spaces")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the tasks of a scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", required=True, help="directory for report.json and report.csv")
    r.add_argument("--tol", type=_rational, default=None, help="override the scenario tolerance")

    a = sub.add_parser("audit", help="randomized property audit")
    a.add_argument("--max-atoms", type=int, default=4)
    a.add_argument("--seed", type=int, default=1)
    a.add_argument("--cases", type=int, default=2, help="scenarios per atom count")
    a.add_argument("--out", required=True)
    a.add_argument("--inject", choices=INJECTIONS, default=None, help="plant a known defect (mutation test)")

    d = sub.add_parser("rn", help="derive a Radon-Nikodym derivative and print the transcript")
    d.add_argument("scenario")
    d.add_argument("--gamma", required=True)
    d.add_argument("--measure", required=True)
    d.add_argument("--tol", type=_rational, default=Fraction(1, 10**6))
    return p


def _cmd_rn(args) -> int:
    sc = load_scenario(args.scenario)
    for name in (args.gamma, args.measure):
        if name not in sc.measures:
            print(f"error: undeclared measure {name!r}", file=sys.stderr)
            return EXIT_INFRA
    G, M = sc.measures[args.gamma], sc.measures[args.measure]
    try:
        res = rn.rn_derive(G, M, args.tol)
    except HypothesisFailed as exc:
        out = {"hypothesis_failed": exc.reason, "message": str(exc), "stage": exc.stage,
               "alpha": jsonable(exc.alpha), "block": exc.block.key() if exc.block is not None else None}
        print(json.dumps(out, sort_keys=True, indent=2, ensure_ascii=False))
        return EXIT_FAIL
    print(json.dumps(res.to_json(), sort_keys=True, indent=2, ensure_ascii=False))
    return EXIT_PASS if res.diagnostics.get("verified", True) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run(load_scenario(args.scenario), args.out, args.tol)
        if args.command == "audit":
            return audit(args.out, args.max_atoms, args.seed, args.cases, args.inject)
        return _cmd_rn(args)
    except GouldError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except Exception as exc:  # anything else is a bug, but still an infrastructure failure
        print(f"error: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
