"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 solver failure, 3 acceptance failure.
Inputs are validated before anything is written, so exit code 1 leaves no
files behind.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import fdm, harness, similarity
from .errors import (
    AmbiguousRootError,
    ConfigurationError,
    MushyBenchError,
    RootNotFoundError,
)
from .linearization import solve_mushy_diffusivity, write_scan_csv
from .material import load_material

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_ACCEPTANCE = 0, 1, 2, 3

DEFAULT_OUT = "mushybench_out"
ENV_OUT = "MUSHYBENCH_OUT"


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--material", required=True, help="material JSON file")
    common.add_argument("--out", help=f"output directory (default: ${ENV_OUT} or ./{DEFAULT_OUT})")
    common.add_argument("--t-end", type=float, default=500.0, help="final time, s")
    common.add_argument("--tau", type=float, default=0.1, help="time step, s")
    common.add_argument("--nodes", type=int, default=500, help="number of grid intervals N")
    common.add_argument("--length", type=float, default=0.5, help="domain length, m")
    common.add_argument("--t-out", type=float, default=800.0, help="boundary temperature at x=0, C")
    common.add_argument("--t-init", type=float, default=1650.0, help="initial melt temperature, C")
    common.add_argument("--samples", type=_float_list, help="profile times t1,t2,... in s")
    common.add_argument("--tolerance", type=float, help="acceptance bound on |eps_x| and |eps_T|, percent")

    parser = argparse.ArgumentParser(prog="mushybench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("linearize", parents=[common], help="solve for the mushy diffusivity")
    sub.add_parser("exact", parents=[common], help="front coefficients and exact profiles")
    sub.add_parser("fdm", parents=[common], help="run the finite-difference solver")
    p = sub.add_parser("compare", parents=[common], help="full benchmark with error report")
    p.add_argument("--levels", type=int, default=2, help="convergence levels (1 disables the study)")
    return parser


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(ENV_OUT) or DEFAULT_OUT)


def _samples(args):
    if args.samples is not None:
        return args.samples
    return tuple(sorted({min(20.0, args.t_end), args.t_end}))


def _scenario(args, props):
    samples = _samples(args)
    grid = fdm.GridSpec(d=args.length, N=args.nodes, tau=args.tau, t_end=args.t_end, sample_times=samples)
    t_end = grid.t_end
    thresholds = harness.Thresholds(window=(min(50.0, t_end), t_end), temp_times=tuple(s for s in samples if s > 0))
    if args.tolerance is not None:
        if not args.tolerance >= 0:
            raise ConfigurationError("--tolerance must be >= 0")
        thresholds = harness.Thresholds(
            front_pct=args.tolerance, temp_pct=args.tolerance,
            window=thresholds.window, temp_times=thresholds.temp_times,
        )
    return harness.Scenario(
        props=props, T_out=args.t_out, T_init=args.t_init, grid=grid,
        thresholds=thresholds, out_dir=_out_dir(args),
    )


def _print_summary(data, keys):
    for key in keys:
        if key in data:
            value = data[key]
            text = f"{value:.6g}" if isinstance(value, float) else str(value)
            print(f"{key:>22s} = {text}")


def cmd_linearize(args, props, scenario):
    lin = solve_mushy_diffusivity(props)
    out = scenario.out_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = harness.solution_summary(lin)
    harness.dump_json(summary, out / "linearization.json")
    write_scan_csv(lin, out / "linearization_scan.csv")
    _print_summary(summary, ["alpha_s", "alpha_sl", "alpha_l", "lambda_residual", "eutectic_experimental"])
    return EXIT_OK


def cmd_exact(args, props, scenario):
    samples = scenario.grid.sample_times
    if any(t <= 0 for t in samples):
        raise ConfigurationError("exact profiles need sample times > 0")
    lin = solve_mushy_diffusivity(props)
    sol = similarity.solve_exact(props, scenario.T_out, scenario.T_init, lin)
    out = scenario.out_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = harness.solution_summary(lin, sol)
    harness.dump_json(summary, out / "exact.json")
    x = scenario.grid.x
    for t in samples:
        similarity.write_profile_csv(sol, x, t, out / harness.exact_profile_filename(t))
    _print_summary(summary, ["alpha_sl", "k_s", "k_l", "relative_residual_s", "relative_residual_l"])
    return EXIT_OK


def cmd_fdm(args, props, scenario):
    lin = solve_mushy_diffusivity(props)
    result = fdm.run(props, lin.model, scenario.grid, scenario.T_out, scenario.T_init)
    out = scenario.out_dir
    out.mkdir(parents=True, exist_ok=True)
    fdm.write_trace_csv(result.trace, out / "front_trace.csv")
    fdm.write_profile_csvs(result, out)
    print(f"{len(result.trace)} front samples, {len(result.profiles)} profiles written to {out}")
    return EXIT_OK


def cmd_compare(args, props, scenario):
    if args.levels < 1:
        raise ConfigurationError("--levels must be >= 1")
    result = harness.run_benchmark(scenario, levels=args.levels, write=True)
    _print_summary(result.summary, ["alpha_sl", "k_s", "k_l", "max_abs_eps_xs_pct", "max_abs_eps_xl_pct"])
    for name, check in result.acceptance.items():
        print(f"{'PASS' if check['passed'] else 'FAIL'} {name}")
    if not result.passed:
        print("acceptance failed", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


COMMANDS = {"linearize": cmd_linearize, "exact": cmd_exact, "fdm": cmd_fdm, "compare": cmd_compare}


def _dump_scan(exc, out_dir):
    if not exc.scan:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "root_scan.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["argument", "residual"])
        for arg, val in exc.scan:
            writer.writerow([repr(float(arg)), repr(float(val))])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        props = load_material(args.material)
        scenario = _scenario(args, props)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args, props, scenario)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RootNotFoundError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        for arg, val in exc.scan:
            print(f"  {float(arg):.6g}  {float(val):.6g}", file=sys.stderr)
        _dump_scan(exc, scenario.out_dir)
        return EXIT_SOLVER
    except AmbiguousRootError as exc:
        print(f"solver failure: {exc}; brackets: {exc.brackets}", file=sys.stderr)
        return EXIT_SOLVER
    except MushyBenchError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
