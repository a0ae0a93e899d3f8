"""Command-line front end: ``qgps solve|certify|majorant|growth|eval|pipeline``."""

from __future__ import annotations

import argparse
import json
import re
import sys

from .errors import QGPSError
from .numeric import get_mp
from .pipeline import (
    analyse,
    certificate_artifact,
    closed_form_checks,
    coeffs_artifact,
    growth_artifact,
    growth_stage,
    load_coefficients,
    load_problem,
    majorant_artifact,
    majorant_stage,
    manifest,
    run_pipeline,
    solve_analysis,
    write_json,
)
from .solver import assemble, evaluate, export_csv

DEFAULT_ORDER = 20

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"[+-]?{_NUM}")
_COMPLEX = re.compile(rf"(?:(?P<re>[+-]?{_NUM})(?=[+-]))?(?P<im>[+-]?(?:{_NUM})?)[ijIJ]")


def parse_number(text):
    """Decimal real or complex literal (``1.5``, ``-2+0.3i``, ``4j``) as an mpmath value."""
    mp = get_mp(512)
    s = text.replace(" ", "")
    if _REAL.fullmatch(s):
        return mp.mpf(s)
    m = _COMPLEX.fullmatch(s)
    if not m:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    im = m.group("im")
    im = mp.mpf(im + "1") if im in ("", "+", "-") else mp.mpf(im)
    return mp.mpc(mp.mpf(m.group("re") or 0), im)


def parse_param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    name = name.strip()
    if not name:
        raise argparse.ArgumentTypeError("empty parameter name")
    return name, parse_number(value)


def parse_ray(text):
    try:
        ray = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ray must be comma-separated integers, got {text!r}") from None
    return ray


def _params(args):
    return dict(args.param or [])


def _emit(data, path):
    if path:
        write_json(path, data)
    else:
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _prepare(args):
    problem, text = load_problem(args.problem, args.precision, _params(args))
    an = analyse(problem)
    order = args.order if args.order is not None else DEFAULT_ORDER
    man = manifest(text, problem.precision, args.command, _params(args), order)
    return an, order, man


def cmd_solve(args):
    an, order, man = _prepare(args)
    table = solve_analysis(an, order)
    series = assemble(table, an.prefix)
    _emit(coeffs_artifact(an, table, man, closed_form_checks(an, series)), args.out)
    if args.csv:
        export_csv(table, args.csv, an.ctx.mp)
    return 0


def cmd_certify(args):
    an, _, man = _prepare(args)
    _emit(certificate_artifact(an, man), args.out)
    return 0


def cmd_majorant(args):
    an, order, man = _prepare(args)
    table = solve_analysis(an, order)
    run = majorant_stage(an, table)
    _emit(majorant_artifact(an, run, man), args.out)
    return 0


def _table_from_args(args):
    if args.coeffs:
        problem, prefix, table = load_coefficients(args.coeffs)
        return problem, prefix, table, problem.ctx
    if not args.problem:
        raise SystemExit("either --coeffs or --problem is required")
    an, order, _ = _prepare(args)
    table = solve_analysis(an, order)
    return an.problem, an.prefix, table, an.ctx


def cmd_growth(args):
    problem, _, table, ctx = _table_from_args(args)
    report, reason = growth_stage(table, ctx, args.ray)
    man = {"command": "growth", "source": args.coeffs or args.problem, "ray": list(args.ray) if args.ray else None}
    _emit(growth_artifact(report, reason, man), args.out)
    return 0


def cmd_eval(args):
    problem, prefix, table, ctx = _table_from_args(args)
    mp = ctx.mp
    if args.order is not None and args.coeffs:
        table.coeffs = {P: c for P, c in table.coeffs.items() if sum(P) <= args.order}
        table.degree_bound = min(table.degree_bound, args.order)
    series = assemble(table, prefix)
    z = parse_number(args.z)
    z_abs = abs(z)
    arg_z = mp.mpf(args.arg_z)
    value, residual = evaluate(series, ctx, z_abs, arg_z, problem.equation)
    out = {
        "z_abs": mp.nstr(z_abs, 20),
        "arg_z": mp.nstr(arg_z, 20),
        "degree_bound": table.degree_bound,
        "terms": len(series.terms),
        "value": {"re": mp.nstr(value.real, 30), "im": mp.nstr(value.imag, 30)},
        "residual": mp.nstr(residual, 10),
    }
    _emit(out, args.out)
    return 0


def cmd_pipeline(args):
    out = args.out or "qgps-out"
    result = run_pipeline(args.problem, args.order if args.order is not None else DEFAULT_ORDER, _params(args), out,
                          args.precision, args.ray)
    sys.stdout.write(result.artifacts["report.txt"])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="qgps", description="Generalized power series solutions of q-difference equations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem_required=True):
        p.add_argument("--problem", required=problem_required, help="problem file")
        p.add_argument("--order", type=int, help="total-degree bound N of the lattice recursion")
        p.add_argument("--precision", type=int, help="working precision in bits")
        p.add_argument("--param", action="append", type=parse_param, metavar="NAME=VALUE",
                       help="value of a free coefficient (repeatable)")
        p.add_argument("--out", help="output file (directory for pipeline)")

    p = sub.add_parser("solve", help="coefficient table")
    common(p)
    p.add_argument("--csv", help="also write a CSV table")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="characteristic polynomial, line verdict, convergence certificate")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("majorant", help="nu, majorant coefficients, dominance, radius estimate")
    common(p)
    p.set_defaults(func=cmd_majorant)

    p = sub.add_parser("growth", help="quadratic fit of log|c| along a lattice ray")
    common(p, problem_required=False)
    p.add_argument("--coeffs", help="coeffs.json from a previous solve")
    p.add_argument("--ray", type=parse_ray, help="ray direction, e.g. 1,0")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("eval", help="partial sum and residual at a point")
    common(p, problem_required=False)
    p.add_argument("--coeffs", help="coeffs.json from a previous solve")
    p.add_argument("--z", required=True, help="|z| or a complex z (its modulus is used)")
    p.add_argument("--arg-z", default="0", help="branch of arg z")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="all stages, artifacts into --out")
    common(p)
    p.add_argument("--ray", type=parse_ray, help="growth ray")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QGPSError as exc:
        print(f"qgps: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"qgps: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
