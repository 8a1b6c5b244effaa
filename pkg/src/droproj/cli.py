"""Command line entry point: ``droproj {solve,bench,fit,oracle-check}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, oracle
from .core import BoxSimplexInstance, ValidationError
from .rootfind import RootFindingError
from .solvers import METHODS, build_instance, solve

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

ORACLE_GAP_TOL = 5e-3
RESIDUAL_TOL = 1e-6


def _csv_list(text: str, conv=str) -> list:
    return [conv(x.strip()) for x in text.split(",") if x.strip()]


def _sizes(text: str) -> list:
    return [int(float(x)) for x in _csv_list(text)]


def _cmd_solve(args) -> int:
    data = json.loads(Path(args.input).read_text(encoding="utf-8"))
    if args.method != "simplex" and args.epsilon is None:
        raise ValidationError("--epsilon is required for DRO methods")
    inst = build_instance(args.method, data, args.epsilon)
    text = json.dumps(solve(inst).to_json(), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    methods = _csv_list(args.methods)
    records = bench.run_bench(methods, _sizes(args.sizes), trials=args.trials,
                              epsilon=args.epsilon, seed=args.seed)
    bench.write_csv(records, args.output)
    bench.write_metadata(args.output, seed=args.seed, epsilon=args.epsilon, trials=args.trials)
    failed = sum(r.failures for r in records)
    if failed:
        logging.getLogger(__name__).warning("%d trial(s) failed", failed)
    return EXIT_OK


def _cmd_fit(args) -> int:
    fits = bench.fit_by_method(bench.read_csv(args.input))
    print("method,a,b")
    for method, fit in fits.items():
        print(f"{method},{fit.a:.6e},{fit.b:.4f}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    cfg = oracle.GridConfig(args.step)
    worst_gap, worst_res, bad = 0.0, 0.0, 0
    for t in range(args.trials):
        inst = bench.make_instance(args.method, args.n, bench.trial_seed(args.seed, t), args.epsilon)
        res = solve(inst)
        if isinstance(inst, BoxSimplexInstance):
            _, ref = oracle.grid_solve_box(inst, cfg)
        else:
            _, ref = oracle.grid_solve(inst, cfg)
        rep = oracle.residuals(inst, res, ref)
        gap = rep.objective_gap_vs_oracle
        feas = max(v for k, v in rep.fields().items() if k != "objective_gap_vs_oracle")
        worst_gap, worst_res = max(worst_gap, gap), max(worst_res, feas)
        if gap > ORACLE_GAP_TOL or feas > RESIDUAL_TOL:
            bad += 1
    print(f"{args.method} n={args.n} trials={args.trials}: worst oracle gap {worst_gap:.3e}, "
          f"worst residual {worst_res:.3e}, failures {bad}")
    return EXIT_OK if bad == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="droproj", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance read from JSON")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="time solvers on generated instances")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--sizes", default="1000,10000,100000")
    p.add_argument("--trials", type=int, default=bench.DEFAULT_TRIALS)
    p.add_argument("--epsilon", type=float, default=bench.DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("fit", help="fit t = a n^b per method to a bench CSV")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("oracle-check", help="compare a solver with the grid oracle")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--n", type=int, choices=(2, 3), default=3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--epsilon", type=float, default=bench.DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RootFindingError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
