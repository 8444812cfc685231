"""Command line entry point ``efcm``.

Subcommands: ``run`` (one experiment), ``preset`` (a named benchmark
set), ``tableau`` (print a Butcher tableau) and ``bound`` (fixed-point
step-size advisor).  Exit codes: 0 success, 2 invalid input, 3 a run diverged.
"""
import argparse
import logging
import sys
from fractions import Fraction

from .errors import EfcmError, InvalidArgumentError
from .harness import (
    PRESETS,
    ExperimentSpec,
    energy_drift,
    iteration_table,
    run_preset,
    work_precision,
    write_gnuplot,
)
from .problems import get_problem
from .quadrature import rule_from_id
from .scheme import gauss_tableau, hbvm_tableau, radau_iia_tableau
from .solver import IterationPolicy, max_convergent_stepsize

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 2, 3

RUN_DEFAULTS = {
    "method": ["efcm:2,2"],
    "policy": "tol:1e-10",
    "kind": "work",
    "reference_tol": "1e-13",
    "tols": "1e-6,1e-8,1e-10,1e-12",
    "param": [],
    "gnuplot": False,
    "serial": False,
}


def _number(text):
    return float(Fraction(text.strip()))


def _numbers(values):
    out = []
    for v in values:
        out += [_number(x) for x in str(v).replace(",", " ").split()]
    return out


def read_config(path):
    """Read a ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    config = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgumentError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in ("method", "param", "h"):
                config.setdefault(key, []).extend(value.split())
            elif key in ("gnuplot", "serial"):
                config[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                config[key] = value
    return config


def _parse_params(items):
    params = {}
    for item in items:
        if "=" not in item:
            raise InvalidArgumentError(f"problem parameter must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        number = _number(value)
        params[key.strip()] = int(number) if number.is_integer() and key.strip() in ("N", "m") else number
    return params


def _merge(args, keys):
    """Fill unset flags from the config file, then from defaults; flags win."""
    config = read_config(args.config) if args.config else {}
    for key in keys:
        if getattr(args, key, None) in (None, []):
            if key in config:
                setattr(args, key, config[key])
            elif key in RUN_DEFAULTS:
                setattr(args, key, RUN_DEFAULTS[key])
    return args


def cmd_run(args):
    _merge(args, ["problem", "method", "h", "t_end", "policy", "out", "kind", "reference_tol",
                  "tols", "param", "gnuplot", "serial"])
    missing = [k for k in ("problem", "h", "t_end") if getattr(args, k, None) in (None, [])]
    if missing:
        raise InvalidArgumentError(f"missing required settings: {', '.join(missing)}")
    params = _parse_params(args.param)
    stepsizes = _numbers(args.h)
    t_end = _number(str(args.t_end))
    if args.kind == "iterations":
        if len(stepsizes) != 1:
            raise InvalidArgumentError("iteration tables take exactly one stepsize")
        table = iteration_table(get_problem(args.problem, **params), stepsizes[0], t_end,
                                _numbers([args.tols]), methods=args.method, output=args.out,
                                serial=args.serial)
        for method, row in table.items():
            print(method, *row)
        return EXIT_DIVERGED if any("div" in row for row in table.values()) else EXIT_OK
    spec = ExperimentSpec(problem=args.problem, methods=args.method, stepsizes=stepsizes,
                          t_end=t_end, policy=IterationPolicy.parse(args.policy), output=args.out,
                          problem_params=params, reference_tol=float(args.reference_tol),
                          serial=args.serial)
    func = energy_drift if args.kind == "drift" else work_precision
    records = func(spec)
    for r in records:
        print(f"{r.method:14s} h={r.h:<10g} error={r.global_error:.3e} "
              f"time={r.wall_time:.3f}s iterations={r.total_iterations}")
    if args.gnuplot and args.out:
        write_gnuplot(args.out, "drift" if args.kind == "drift" else "work")
    return EXIT_DIVERGED if any(r.diverged for r in records) else EXIT_OK


def cmd_preset(args):
    results = run_preset(args.name, args.out_dir, gnuplot=args.gnuplot, serial=args.serial)
    diverged = False
    for part, result in results.items():
        if part == "iterations":
            for method, row in result.items():
                print(method, *row)
        else:
            diverged |= any(r.diverged for r in result)
            for r in result:
                print(f"{part:5s} {r.method:14s} h={r.h:<10g} error={r.global_error:.3e} "
                      f"iterations={r.total_iterations}")
    # divergence of comparator runs is an expected outcome of the presets
    return EXIT_OK if not diverged else EXIT_DIVERGED


def cmd_tableau(args):
    family, _, rest = args.method.partition(":")
    family = family.lower()
    try:
        if family == "radau":
            tab = radau_iia_tableau(int(rest))
        elif family == "gauss":
            tab = gauss_tableau(int(rest))
        elif family == "hbvm":
            k, n = (int(x) for x in rest.split(",")[:2])
            tab = hbvm_tableau(k, n)
        else:
            raise ValueError
    except ValueError:
        raise InvalidArgumentError(f"cannot parse tableau id {args.method!r}") from None
    print(tab)
    return EXIT_OK


def cmd_bound(args):
    rule = rule_from_id(args.rule)
    h = max_convergent_stepsize(args.L, args.C, args.omega, rule, args.n)
    print(f"{h:.16g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="efcm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write CSV")
    run.add_argument("--config", help="key=value file; explicit flags override it")
    run.add_argument("--problem", help="henon-heiles, fpu, heat or oscillator")
    run.add_argument("--param", action="append", default=[], help="problem parameter key=value")
    run.add_argument("--method", action="append", default=[], help="e.g. efcm:2,2 hbvm:2,2 radau:3")
    run.add_argument("--h", action="append", default=[], help="stepsize(s); '1/8' or '0.1,0.05'")
    run.add_argument("--t-end", dest="t_end")
    run.add_argument("--policy", help="tol:1e-10 or fixed:1")
    run.add_argument("--kind", choices=["work", "drift", "iterations"])
    run.add_argument("--tols", help="tolerance list for --kind iterations")
    run.add_argument("--reference-tol", dest="reference_tol")
    run.add_argument("--out")
    run.add_argument("--gnuplot", action="store_true", default=None)
    run.add_argument("--serial", action="store_true", default=None)
    run.set_defaults(func=cmd_run)

    preset = sub.add_parser("preset", help="run a named benchmark preset at desk scale")
    preset.add_argument("name", choices=sorted(PRESETS))
    preset.add_argument("--out-dir", default=".")
    preset.add_argument("--gnuplot", action="store_true")
    preset.add_argument("--serial", action="store_true")
    preset.set_defaults(func=cmd_preset)

    tableau = sub.add_parser("tableau", help="print a Butcher tableau")
    tableau.add_argument("method", help="radau:k, gauss:k or hbvm:k,n")
    tableau.set_defaults(func=cmd_tableau)

    bound = sub.add_parser("bound", help="fixed-point step-size bound for EFCM")
    bound.add_argument("--L", type=float, required=True, help="Lipschitz constant of g")
    bound.add_argument("--C", type=float, default=1.0, help="semigroup constant")
    bound.add_argument("--omega", type=float, default=0.0, help="semigroup exponent")
    bound.add_argument("--rule", default="gauss:2")
    bound.add_argument("--n", type=int, default=2)
    bound.set_defaults(func=cmd_bound)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidArgumentError, ValueError, OSError) as exc:
        print(f"efcm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EfcmError as exc:
        print(f"efcm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
