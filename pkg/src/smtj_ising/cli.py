"""Command-line entry point: ``smtj-ising <command> [options]``.

Exit status: 0 on success, 1 when the solver finds no valid tour, 2 on
usage or input errors.  Artifacts go to ``--out`` (default
``$SMTJ_ISING_OUT`` or ``./runs``).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import OUT_ENV, ExperimentSpec, run_experiment
from .errors import CalibrationError, ContractViolation, TsplibParseError, UnsupportedFormat, UnsupportedInstance
from .tsp import FIXED_START, FULL

COMMANDS = {
    "solve-tsp": "solve_tsp",
    "solve-ctsp": "solve_ctsp",
    "pipeline": "pipeline",
    "success-curve": "success_curve",
    "device-trace": "device_trace",
    "spin-report": "spin_report",
    "calibrate": "calibrate",
}


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _int_list(text):
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(","))


def _float_list(text):
    return tuple(float(x) for x in text.split(","))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", default=[], metavar="PATH",
                        help="TSPLIB file or bundled name (st70, berlin52, ...); trace CSVs for calibrate")
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--iters", type=_positive, default=None, help="annealing sweeps per run")
    common.add_argument("--schedule", default=None, help="constant:C | linear:C0:C1 | ramp:C[:R]")
    common.add_argument("--w", type=float, default=None, help="distance weight w")
    common.add_argument("--theta", type=float, default=None, help="CTSP constraint strength")
    common.add_argument("--budget", type=_positive, default=None, help="spin budget")
    common.add_argument("--trials", type=_positive, default=1)
    common.add_argument("--mode", choices=("ideal", "faithful"), default="ideal")
    common.add_argument("--out", default=None, metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./runs)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="smtj-ising", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve-tsp", "solve-ctsp"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--n", type=int, default=None, help="synthetic instance size (no --input)")
        s.add_argument("--variant", choices=(FIXED_START, FULL), default=FIXED_START)
        if name == "solve-ctsp":
            s.add_argument("--pair", nargs=2, type=int, action="append", default=[], metavar=("A", "B"),
                           help="0-based cities that must be adjacent (repeatable)")
    s = sub.add_parser("pipeline", parents=[common])
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--passes", type=int, default=None, help="sliding-window passes")
    s = sub.add_parser("success-curve", parents=[common])
    s.add_argument("--n", type=int, default=9)
    s.add_argument("--sizes", type=_int_list, default=(), help="e.g. 5..9 or 5,7,9")
    s.add_argument("--variant", choices=(FIXED_START, FULL), default=FULL)
    s = sub.add_parser("device-trace", parents=[common])
    s.add_argument("--currents", type=_float_list, default=(3.0, 3.9, 5.0), help="uA, comma separated")
    s.add_argument("--samples", type=_positive, default=20_000)
    sub.add_parser("spin-report", parents=[common])
    sub.add_parser("calibrate", parents=[common])
    return p


def spec_from_args(args) -> ExperimentSpec:
    kind = COMMANDS[args.command]
    inputs = tuple(args.input)
    instance = None
    if kind in ("solve_tsp", "solve_ctsp", "pipeline"):
        if len(inputs) > 1:
            raise ContractViolation(f"{args.command} takes one --input")
        instance = inputs[0] if inputs else None
        if instance is None and getattr(args, "n", None) is None:
            raise ContractViolation(f"{args.command} needs --input PATH or --n N")
    overrides = {}
    if kind == "pipeline":
        if args.passes is not None:
            overrides["window_passes"] = args.passes
        if args.iters is not None:
            overrides["tsp_iterations"] = args.iters
    if kind == "success_curve":
        overrides["variant"] = args.variant
    return ExperimentSpec(
        kind=kind, instance=instance, n=getattr(args, "n", None), seed=args.seed,
        iterations=args.iters if kind != "pipeline" else None, schedule=args.schedule,
        w=args.w, theta=args.theta, budget=args.budget, trials=args.trials, mode=args.mode,
        variant=getattr(args, "variant", FIXED_START), pairs=tuple(tuple(p) for p in getattr(args, "pair", [])),
        sizes=getattr(args, "sizes", ()), currents=getattr(args, "currents", (3.0, 3.9, 5.0)),
        samples=getattr(args, "samples", 20_000),
        inputs=inputs if kind in ("calibrate", "spin_report") else (),
        overrides=overrides, out_dir=args.out)


def _report(spec, res):
    s = res.summary
    k = spec.kind
    if k in ("solve_tsp", "solve_ctsp"):
        print(f"instance {s['instance']}: {s['n']} cities, {s['spins']} spins, w={s['w']:.6g}"
              + (f", theta={s['theta']:.6g}" if s["theta"] is not None else ""))
        for i, r in enumerate(s["runs"]):
            def fmt(t):
                if t["valid"]:
                    return f"{t['length']:.6g}"
                return f"invalid ({t['row_violations']} row / {t['column_violations']} column violations)"
            print(f"run {i}: final length {fmt(r['final'])}, best length {fmt(r['best'])}")
        if s["best_length"] is not None:
            print(f"best tour length {s['best_length']:.6g}: {' '.join(map(str, s['best_order']))}")
        else:
            print("no valid tour found", file=sys.stderr)
    elif k == "pipeline":
        print(f"instance {s['instance']}: stitched {s['stitched_length']:.6g}, final length {s['final_length']:.6g}, "
              f"{s['total_iterations']} sweeps, largest sub-problem {s['max_spins']} spins")
    elif k == "success_curve":
        for n, p in s["success"].items():
            print(f"n={n}: success probability {p:.3f}")
    elif k == "device_trace":
        for r in s["traces"]:
            print(f"I={r['current_uA']:g} uA: occupancy {r['occupancy']:.4f}, p_ap {r['p_ap']:.4f}")
    elif k == "calibrate":
        print(f"a={s['a']:.6g} 1/uA, b={s['b']:.6g} uA")
    elif k == "spin_report":
        print(f"{'instance':<12}{'N':>6}{'conventional':>14}{'ours':>8}")
        for r in s["rows"]:
            print(f"{r['name']:<12}{r['n']:>6}{r['conventional']:>14}{r['ours']:>8}")
    for a in res.artifacts:
        print(f"wrote {a}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = spec_from_args(args)
        res = run_experiment(spec)
    except (ContractViolation, UnsupportedFormat, UnsupportedInstance, TsplibParseError,
            CalibrationError, FileNotFoundError) as exc:
        print(f"smtj-ising {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"smtj-ising {args.command}: error: {exc}", file=sys.stderr)
        return 2
    _report(spec, res)
    return 0 if res.ok else 1


if __name__ == "__main__":
    sys.exit(main())
