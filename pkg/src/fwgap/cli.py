"""Command-line entry point.

    fwgap run CONFIG [--strict|--lenient] [--seed N] [--out DIR]
    fwgap suite DIR  [--strict|--lenient] [--seed N] [--out DIR]
    fwgap check CONFIG
    fwgap rate TRACE.csv [--window A:B] [--column min_gap]

Exit codes: 0 success, 1 bound violation (strict), 2 usage/parse error,
3 numeric error.
"""

from __future__ import annotations

import argparse
import sys

from .checks import FAIL, BoundReport, check_trace, instance_invariants
from .config import load_config
from .errors import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, FWError
from .experiment import fit_rate, read_trace_csv, resolve_curvature, resolve_h0, run_experiment, run_suite
from .solver import SolverConfig, solve


def _common(p: argparse.ArgumentParser) -> None:
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="exit 1 on any bound violation (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="report violations but exit 0")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="output directory (default: current directory)")


def _window(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like A:B, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwgap", description="Frank-Wolfe runs with mechanically checked gap bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one config, write trace CSV and report JSON")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("suite", help="run every *.cfg in a directory")
    p.add_argument("directory")
    _common(p)

    p = sub.add_parser("check", help="run invariants for a config without writing a trace")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("rate", help="fit log(min gap) against log(t+1) on a trace CSV")
    p.add_argument("trace")
    p.add_argument("--window", type=_window, default=None, help="inclusive t range A:B")
    p.add_argument("--column", default="min_gap")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_run(args) -> int:
    res = run_experiment(_load(args), args.out)
    print(res.report.format_table())
    print(f"trace:  {res.trace_path}")
    print(f"report: {res.report_path}")
    return res.exit_code(args.strict)


def cmd_suite(args) -> int:
    summary = run_suite(args.directory, args.out, strict=args.strict, seed=args.seed)
    print(summary.format_table())
    return summary.exit_code


def cmd_check(args) -> int:
    cfg = _load(args)
    choice = resolve_curvature(cfg)
    obj, dom = cfg.objective, cfg.domain
    x0 = cfg.x0_vector()
    h0, prov = resolve_h0(obj, dom, x0)
    trace = solve(obj, dom, SolverConfig(cfg.step_rule, choice.C, cfg.epsilon, cfg.max_iters, cfg.seed), x0, h0, prov)
    report = check_trace(trace, obj, dom, certified=choice.certified)
    report.checks.extend(instance_invariants(obj, dom, choice.C, cfg.seed, certified=choice.certified))
    print(report.format_table())
    return EXIT_VIOLATION if args.strict and not report.ok else EXIT_OK


def cmd_rate(args) -> int:
    cols = read_trace_csv(args.trace)
    fit = fit_rate(cols, args.window, args.column)
    if fit is None:
        print(f"no fit: every {args.column} value in the window is zero (stationary point reached)")
        return EXIT_OK
    print(f"slope      {fit.slope:.6f}")
    print(f"intercept  {fit.intercept:.6f}")
    print(f"r_squared  {fit.r_squared:.9f}")
    print(f"window     {fit.window[0]}:{fit.window[1]} ({fit.n_points} points)")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "suite": cmd_suite, "check": cmd_check, "rate": cmd_rate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FWError as exc:
        print(f"fwgap: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
