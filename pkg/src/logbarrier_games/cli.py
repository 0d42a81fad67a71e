"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or failed parameter validation,
3 numerical failure during a run.
"""

import argparse
import json
import os
import sys

from .efg import ExtensiveFormGame
from .errors import DomainError, GameError, NumericalError
from .fileio import load_game, read_records
from .harness import ALGORITHMS, RunConfig, SweepSpec, execute, fit_rate, sweep
from .matrix import MatrixGame
from .omd import ScheduleParams, derive_T0, validate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _t0(text):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("T0 must be positive")
    return value


def _stride(text):
    if text == "geometric":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'geometric' or a positive integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("stride must be positive")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="logbarrier-games",
        description="Uncoupled bandit learning in zero-sum games with log-barrier mirror descent.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="simulate one run and write a CSV of metrics")
    solve.add_argument("kind", choices=("matrix", "efg"))
    solve.add_argument("--game", required=True, help="game file (JSON)")
    solve.add_argument("--eta", type=float, default=0.05)
    solve.add_argument("--tau", type=float, default=10.0)
    solve.add_argument("--delta", type=float, default=0.05)
    solve.add_argument("--t0", type=_t0, default="auto")
    solve.add_argument("--steps", type=int, required=True)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--algorithm", choices=ALGORITHMS, default="logbarrier")
    solve.add_argument("--out", required=True, help="output CSV; run metadata goes to OUT.json")
    solve.add_argument("--log-stride", type=_stride, default="geometric")

    check = sub.add_parser("validate", help="check schedule constants")
    check.add_argument("--eta", type=float, required=True)
    check.add_argument("--tau", type=float, required=True)
    check.add_argument("--delta", type=float, required=True)
    check.add_argument("--k", type=int, required=True, help="total number of actions/sequences")
    check.add_argument("--sigma", type=float, default=2.0)
    check.add_argument("--t0", type=_t0, default="auto")

    fit = sub.add_parser("fit", help="fit the log-log slope of exploitability")
    fit.add_argument("--in", dest="path", required=True)
    fit.add_argument("--tail", type=float, default=0.5)
    fit.add_argument("--t0", type=int, default=None,
                     help="offset; read from the run's JSON sidecar when omitted")

    sw = sub.add_parser("sweep", help="run a grid of seeds and parameters")
    sw.add_argument("--config", required=True)
    return parser


def cmd_solve(args):
    game = load_game(args.game)
    expected = MatrixGame if args.kind == "matrix" else ExtensiveFormGame
    if not isinstance(game, expected):
        other = "efg" if args.kind == "matrix" else "matrix"
        print(f"error: {args.game} holds a {other} game, expected {args.kind}", file=sys.stderr)
        return EXIT_INVALID
    config = RunConfig(game, args.steps, args.algorithm, args.eta, args.tau, args.delta,
                       args.t0, args.seed, args.log_stride, None, args.out)
    result = execute(config)
    last = result.records[-1]
    print(f"T0 = {result.params['T0']}")
    print(f"final t = {last.t}  eg = {last.eg:.6g}  d_tau = {last.d_tau:.6g}")
    mon = result.monitor
    print(f"monitor: max ratio {mon.max_ratio:.6g}, doubling violations "
          f"{mon.doubling_violations}, rows above bound {mon.fraction_above_bound:.3g}")
    return EXIT_OK


def cmd_validate(args):
    T0 = derive_T0(args.eta, args.tau, args.delta) if args.t0 == "auto" else args.t0
    report = validate(ScheduleParams(args.eta, args.tau, T0, args.delta), args.k, args.sigma)
    print(f"T0 = {T0}")
    print(report.format())
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_fit(args):
    T0 = args.t0
    if T0 is None:
        sidecar = args.path + ".json"
        T0 = 0
        if os.path.exists(sidecar):
            with open(sidecar, encoding="utf-8") as fh:
                T0 = int(json.load(fh)["config"]["T0"])
    fit = fit_rate(read_records(args.path), args.tail, T0)
    print(f"slope = {fit.slope:.6g}")
    print(f"intercept = {fit.intercept:.6g}")
    print(f"r_squared = {fit.r_squared:.6g}")
    print(f"tail_fraction = {fit.tail_fraction:g}  points = {fit.num_points}  T0 = {T0}")
    return EXIT_OK


def cmd_sweep(args):
    with open(args.config, encoding="utf-8") as fh:
        spec = SweepSpec.from_json(json.load(fh))
    for row in sweep(spec):
        print(json.dumps(row, sort_keys=True))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "validate": cmd_validate, "fit": cmd_fit, "sweep": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (NumericalError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
