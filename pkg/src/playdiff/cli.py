"""Command-line front end: ``playdiff <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import accmax, maxfun, verify
from .errors import (
    DecompositionError,
    DomainError,
    ParameterError,
    SignalFormatError,
    SolverError,
    StaleDecompositionError,
)
from .playstop import PlayConfig, local_partition, play, play_dir_derivative, play_newton
from .signal import NormSpec, PlSignal, StepLinSignal, read_signal_csv, write_signal_csv, write_steplin_csv
from .solver import load_problem, semismooth_newton

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _emit_steplin(sig: StepLinSignal, out: str | None) -> None:
    if out:
        write_steplin_csv(out, sig)
    else:
        print("t,left,right")
        for t, lv, rv in sig.rows():
            print(f"{t!r},{lv!r},{rv!r}")


def _emit_signal(sig: PlSignal, out: str | None) -> None:
    if out:
        write_signal_csv(out, sig)
    else:
        print("t,value")
        for t, v in zip(sig.t.tolist(), sig.v.tolist()):
            print(f"{t!r},{v!r}")


def _play_config(args) -> PlayConfig:
    if args.r is None:
        raise UsageError(f"{args.command}: --r is required for --op {args.op}")
    return PlayConfig(args.r, args.z0)


def cmd_eval(args) -> int:
    u = read_signal_csv(args.input)
    w, z = play(u, PlayConfig(args.r, args.z0))
    _emit_signal(w, args.out)
    if args.out_stop:
        write_signal_csv(args.out_stop, z)
    return EXIT_OK


def cmd_accmax(args) -> int:
    _emit_signal(accmax.accumulated_max(read_signal_csv(args.input)), args.out)
    return EXIT_OK


def cmd_derive(args) -> int:
    u = read_signal_csv(args.input)
    h = read_signal_csv(args.dir)
    rule = maxfun.SelectionRule.parse(args.rule)
    if args.op == "max":
        if args.flavor == "newton":
            val = maxfun.apply_measure(maxfun.newton_selection(u, rule), h)
        else:
            val = maxfun.directional_derivative(u, h)
        print(f"derivative={val!r}")
        return EXIT_OK
    if args.op == "accmax":
        if args.flavor == "newton":
            d = accmax.newton_apply(u, h, rule)
        else:
            d = accmax.pointwise_dir_derivative(u, h)
    else:
        cfg = _play_config(args)
        dec = local_partition(u, cfg)
        if args.flavor == "newton":
            d = play_newton(u, cfg.z0, dec, rule, flavor=args.op).apply(h, args.q0)
        else:
            d = play_dir_derivative(u, cfg.z0, h, args.q0, dec, flavor=args.op)
    _emit_steplin(d, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    u = read_signal_csv(args.input)
    dec = local_partition(u, PlayConfig(args.r, args.z0), n_samples=args.samples, seed=args.seed)
    _emit_json(dec.to_json(), args.out)
    return EXIT_OK


def cmd_rates(args) -> int:
    norm = NormSpec.parse(args.norm)
    if args.family == "counterexample":
        if args.op != "max":
            raise UsageError("rates: the counterexample family applies to --op max only")
        base = PlSignal([0.0, 1.0], [1.0, 0.0])
        family = verify.counterexample_family()
    else:
        if not args.input or not args.dir:
            raise UsageError("rates: --input and --dir are required for the scaled family")
        u = read_signal_csv(args.input)
        h = read_signal_csv(args.dir)
        base = (u, _play_config(args)) if args.op in ("play", "stop") else u
        family = verify.scaled_profile(h, args.q0 if args.op in ("play", "stop") else 0.0)
    report = verify.rate_study(
        args.op,
        base,
        family,
        norm,
        lq_exponent=args.lq,
        gammas=args.gamma,
        flavor=args.flavor,
        ladder=args.ladder or verify.DEFAULT_LADDER,
    )
    _emit_json(report.to_json(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    eq, u0 = load_problem(args.problem)
    rep = semismooth_newton(eq, u0, tol=args.tol, maxit=args.maxit, damping=not args.no_damping)
    sol = args.solution or str(Path(args.problem).with_name(Path(args.problem).stem + "_solution.csv"))
    write_signal_csv(sol, rep.u)
    doc = rep.to_json()
    doc["solution"] = sol
    _emit_json(doc, args.report)
    if not rep.converged:
        raise SolverError(rep.message)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    n, b = maxfun.counterexample_w11(args.lam)
    print(f"newton_ratio={n:.12g} bouligand_ratio={b:.12g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="playdiff", description="Play/stop operators, their derivatives and a semismooth Newton solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def play_flags(sp, required=True):
        sp.add_argument("--r", type=float, required=required, help="half-width of the characteristic")
        sp.add_argument("--z0", type=float, default=0.0, help="initial stop value")

    s = sub.add_parser("eval", help="play and stop trajectories")
    s.add_argument("--input", required=True)
    play_flags(s)
    s.add_argument("--out")
    s.add_argument("--out-stop")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("accmax", help="accumulated maximum")
    s.add_argument("--input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_accmax)

    s = sub.add_parser("derive", help="derivative action as a t,left,right CSV")
    s.add_argument("--op", choices=["play", "stop", "accmax", "max"], required=True)
    s.add_argument("--flavor", choices=["newton", "bouligand"], required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--dir", required=True)
    s.add_argument("--q0", type=float, default=0.0, help="perturbation of the initial stop value")
    s.add_argument("--rule", choices=["rightmost", "leftmost", "uniform"], default="rightmost")
    play_flags(s, required=False)
    s.add_argument("--out")
    s.set_defaults(func=cmd_derive)

    s = sub.add_parser("decompose", help="plus/minus decomposition as JSON")
    s.add_argument("--input", required=True)
    play_flags(s)
    s.add_argument("--samples", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("rates", help="remainder rate study as JSON")
    s.add_argument("--op", choices=list(verify.OPERATORS), required=True)
    s.add_argument("--flavor", choices=["newton", "bouligand"], required=True)
    s.add_argument("--norm", required=True, help="holder:A, w1p:P, sup or w11")
    s.add_argument("--lq", type=float, default=2.0)
    s.add_argument("--ladder", type=_float_list)
    s.add_argument("--gamma", type=_float_list, help="window end points")
    s.add_argument("--family", choices=["scaled", "counterexample"], default="scaled")
    s.add_argument("--input")
    s.add_argument("--dir")
    s.add_argument("--q0", type=float, default=0.0)
    play_flags(s, required=False)
    s.add_argument("--out")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("solve", help="semismooth Newton solve of a problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--maxit", type=int, default=50)
    s.add_argument("--no-damping", action="store_true")
    s.add_argument("--solution", help="solution CSV path (default: <problem>_solution.csv)")
    s.add_argument("--report", help="report JSON path (default: stdout)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("counterexample", help="W^{1,1} remainder ratios of the maximum functional")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.set_defaults(func=cmd_counterexample)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"playdiff: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SignalFormatError, DomainError) as exc:
        print(f"playdiff: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DecompositionError, StaleDecompositionError, SolverError, ArithmeticError) as exc:
        print(f"playdiff: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"playdiff: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
