"""End-to-end run: problem file to coefficient table, certificate, majorant and growth."""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import __version__
from .errors import InsufficientData, QGPSError
from .exponents import ExponentVector, SemiGroup, enumerate_semigroup, format_exponent, numeric_value, re_value
from .majorant import build_majorant, compute_nu, dominance_check, majorant_coefficients, radius_estimate
from .newton import (
    CONVERGENT,
    assumption_A,
    assumption_B_scan,
    check_stabilization,
    classify_line,
    extract_semigroup,
    lemma1_reduce,
    resolve_seed,
    theorem1_certificate,
)
from .numeric import DEFAULT_PRECISION, complex_from_json, complex_to_json, get_mp
from .parsing import parse_problem, read_problem, render_problem
from .series import GeneralizedSeries
from .solver import (
    CoefficientTable,
    Resonance,
    assemble,
    growth_analysis,
    solve,
    table_to_json,
)

SCAN_LENGTH = 200
PRECISION_ENV = "QGPS_PRECISION"
_PRECISION_DIRECTIVE = re.compile(r"^\s*precision\s*=", re.M)


def resolve_precision(flag, problem_text=None):
    """Command-line flag, then the file's own directive, then QGPS_PRECISION."""
    if flag is not None:
        return int(flag)
    if problem_text is not None and _PRECISION_DIRECTIVE.search(problem_text):
        return None
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None
    return None


def load_problem(path, precision=None, params=None):
    text = None
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        pass
    return read_problem(path, resolve_precision(precision, text), params), text


@dataclass
class Analysis:
    problem: object
    phi: GeneralizedSeries
    solved: dict
    L: object
    red: object
    sg: SemiGroup
    line: object
    certificate: object
    scan: object
    seed_map: dict

    @property
    def ctx(self):
        return self.problem.ctx

    @property
    def prefix(self):
        return self.red.phi_m


def semigroup_stream(sg, lambda_m, count):
    """The first ``count`` exponents lambda_m + gamma in compare order."""
    min_re = min(re_value(g, sg.basis) for g in sg.generators)
    bound = min_re * 4
    while True:
        pts = enumerate_semigroup(sg, bound)
        if len(pts) >= count:
            return [lambda_m + e for _, e in pts[:count]]
        bound *= 2


def analyse(problem, scan_length=SCAN_LENGTH):
    """Everything before the coefficient recursion."""
    F, ctx = problem.equation, problem.ctx
    phi, solved = resolve_seed(F, problem.seed, ctx, problem.parameters)
    m = problem.reduce_at
    extra = phi.terms[m + 1] if len(phi.terms) > m + 1 else None
    L = assumption_A(F, phi.head(m + 1), ctx, extra=extra)
    red = lemma1_reduce(F, phi, m, ctx, L)
    lam_m = red.lambda_m
    beyond = [e - lam_m for e, _ in phi.terms[m + 1:]]
    sg, _ = extract_semigroup(red, extra=beyond, generators=problem.generators)
    line = classify_line(ctx, sg)
    cert = theorem1_certificate(L, line)
    scan = assumption_B_scan(L, ctx, semigroup_stream(sg, lam_m, scan_length), scan_length, sg.basis)
    names = {t.exponent: t.name for t in problem.seed}
    seed_map = {e: (names.get(e), c) for e, c in phi.terms[m + 1:]}
    return Analysis(problem, phi, solved, L, red, sg, line, cert, scan, seed_map)


def solve_analysis(an, N):
    """Coefficient table to total degree N; settles a pending stabilization check."""
    table = solve(an.red, an.sg, an.ctx, N, params=an.problem.parameters, seed=an.seed_map)
    if an.L.stabilization == "pending" and table.coeffs:
        P = min(table.coeffs, key=lambda p: (re_value(table.exponent_of(p), an.sg.basis), p))
        longer = GeneralizedSeries.from_terms(
            an.sg.basis, list(an.prefix.terms) + [(table.exponent_of(P), table.coeffs[P])]
        )
        check_stabilization(an.problem.equation, longer, an.ctx, an.L)
        an.L = replace(an.L, stabilization="recomputed")
    return table


@dataclass
class MajorantRun:
    status: str
    reason: str = None
    nu: object = None
    problem: object = None
    result: object = None


def majorant_stage(an, table):
    if an.certificate.status != CONVERGENT:
        return MajorantRun("skipped", f"certificate is {an.certificate.status}")
    if table.degree_bound < 1:
        return MajorantRun("skipped", "degree bound 0")
    nu = compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)
    prob = build_majorant(an.red, an.sg, nu.nu)
    C = majorant_coefficients(prob, table.degree_bound)
    result = dominance_check(table, C)
    try:
        result.radius_estimate = radius_estimate(C, an.sg.s, table.degree_bound, an.ctx.precision)
    except InsufficientData as exc:
        result.radius_estimate = None
        return MajorantRun("computed", str(exc), nu, prob, result)
    return MajorantRun("computed", None, nu, prob, result)


def default_ray(s):
    return (1,) + (0,) * (s - 1)


def growth_stage(table, ctx, ray=None, bound=None):
    ray = default_ray(table.sg.s) if ray is None else tuple(ray)
    try:
        return growth_analysis(table, ray, ctx, bound), None
    except InsufficientData as exc:
        return None, str(exc)


# -- closed-form checks ---------------------------------------------------------------


def is_euler_equation(F):
    """True for sigma y - z y - z = 0 up to a constant factor."""
    if F.n != 1 or len(F.monomials) != 3:
        return False
    basis = F.basis
    one = basis.rational(1)
    zero = basis.zero()
    found = {(m.alpha, m.powers): m.coeff for m in F.monomials}
    keys = {(zero, (0, 1)), (one, (1, 0)), (one, (0, 0))}
    if set(found) != keys:
        return False
    lead = found[(zero, (0, 1))]
    mp = get_mp(basis.precision)
    tol = mp.mpf(2) ** (-(basis.precision // 2))
    return all(abs(found[k] / lead + 1) <= tol for k in ((one, (1, 0)), (one, (0, 0))))


def closed_form_checks(an, series):
    out = []
    F = an.problem.equation
    if is_euler_equation(F):
        mp = an.ctx.mp
        basis = F.basis
        worst = mp.mpf(0)
        count = 0
        for e, c in series.terms:
            v = numeric_value(e, basis, an.ctx.precision)
            m = int(mp.nint(v.real))
            if v.imag != 0 or abs(v.real - m) > 0 or m < 1:
                continue
            err = abs(c * mp.exp(an.ctx.ln_q * m * (m + 1) / 2) - 1)
            worst = max(worst, err)
            count += 1
        out.append({
            "name": "closed form c_m*q^(m(m+1)/2) = 1",
            "terms": count,
            "max_deviation": mp.nstr(worst, 6),
            "passed": bool(count) and worst <= mp.mpf(10) ** -30,
        })
    return out


# -- artifacts ----------------------------------------------------------------------------


def manifest(problem_text, precision, command, params, order):
    return {
        "problem_sha256": hashlib.sha256(problem_text.encode("utf-8")).hexdigest(),
        "precision": precision,
        "command": command,
        "order": order,
        "parameters": {k: str(v) for k, v in sorted((params or {}).items())},
        "tool_version": __version__,
    }


def series_to_json(series, mp):
    basis = series.basis
    return [
        dict({"coords": [str(c) for c in e.coords], "exponent": format_exponent(e, basis)}, **complex_to_json(c, mp))
        for e, c in series.terms
    ]


def coeffs_artifact(an, table, man, checks=()):
    mp = an.ctx.mp
    basis = an.sg.basis
    return {
        "manifest": man,
        "problem": render_problem(an.problem),
        "prefix": series_to_json(an.prefix, mp),
        "lambda_m": {"coords": [str(c) for c in an.red.lambda_m.coords], "text": format_exponent(an.red.lambda_m, basis)},
        "generators": [
            {"coords": [str(c) for c in g.coords], "text": format_exponent(g, basis),
             "value": complex_to_json(numeric_value(g, basis), mp)}
            for g in an.sg.generators
        ],
        "solved_seed": {k: complex_to_json(v, mp) for k, v in sorted(an.solved.items())},
        "table": table_to_json(table, mp),
        "checks": list(checks),
    }


def certificate_artifact(an, man):
    mp = an.ctx.mp
    basis = an.sg.basis
    return {
        "manifest": man,
        "L": an.L.to_json(basis),
        "L_text": an.L.describe(),
        "lambda_m": format_exponent(an.red.lambda_m, basis),
        "generators": [format_exponent(g, basis) for g in an.sg.generators],
        "certificate": an.certificate.to_json(an.L, basis, mp, an.scan),
        "assumption_B": an.scan.to_json(basis, mp),
    }


def majorant_artifact(an, run, man):
    mp = an.ctx.mp
    out = {"manifest": man, "status": run.status, "reason": run.reason}
    if run.status == "computed":
        out["nu"] = run.nu.to_json(mp)
        out["majorant_problem"] = run.problem.to_json(mp)
        out["result"] = run.result.to_json(mp)
    return out


def growth_artifact(report, reason, man):
    out = {"manifest": man}
    if report is None:
        out.update({"status": "skipped", "reason": reason})
    else:
        out.update({"status": "computed"}, **report.to_json())
    return out


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- reloading a coefficient table ------------------------------------------------------------


def _ev(coords):
    return ExponentVector(tuple(Fraction(c) for c in coords))


def load_coefficients(path):
    """(problem, prefix series, CoefficientTable) from a coeffs.json artifact."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    problem = parse_problem(data["problem"], data["manifest"].get("precision"))
    basis = problem.basis
    mp = get_mp(basis.precision)
    prefix = GeneralizedSeries.from_terms(
        basis, [(_ev(t["coords"]), complex_from_json(t, mp)) for t in data["prefix"]]
    )
    sg = SemiGroup(basis, tuple(_ev(g["coords"]) for g in data["generators"]), independent=True)
    tab = data["table"]
    coeffs = {tuple(r["m"]): complex_from_json(r, mp) for r in tab["coeffs"]}
    res = [
        Resonance(tuple(r["m"]), r["name"], complex_from_json(r["value"], mp), mp.mpf(r["rhs_abs"]), r["status"])
        for r in tab["resonances"]
    ]
    table = CoefficientTable(sg, _ev(data["lambda_m"]["coords"]), coeffs, tab["degree_bound"], res)
    return problem, prefix, table


# -- full run -------------------------------------------------------------------------------


@dataclass
class PipelineResult:
    analysis: Analysis
    table: CoefficientTable
    majorant: MajorantRun
    growth: object
    growth_reason: str
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def run_pipeline(problem_path, N, params=None, out_dir=None, precision=None, ray=None, command="pipeline"):
    """Run every stage and (optionally) write the artifacts into ``out_dir``."""
    from .report import render_report

    timings = {}
    t0 = time.perf_counter()
    problem, text = load_problem(problem_path, precision, params)
    an = analyse(problem)
    timings["analyse"] = time.perf_counter() - t0
    t = time.perf_counter()
    table = solve_analysis(an, N)
    timings["solve"] = time.perf_counter() - t
    t = time.perf_counter()
    maj = majorant_stage(an, table)
    timings["majorant"] = time.perf_counter() - t
    growth, reason = growth_stage(table, an.ctx, ray)
    series = assemble(table, an.prefix)
    man = manifest(text, problem.precision, command, params, N)
    artifacts = {
        "coeffs.json": coeffs_artifact(an, table, man, closed_form_checks(an, series)),
        "certificate.json": certificate_artifact(an, man),
        "majorant.json": majorant_artifact(an, maj, man),
        "growth.json": growth_artifact(growth, reason, man),
    }
    artifacts["report.txt"] = render_report(artifacts)
    timings["total"] = time.perf_counter() - t0
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, data in artifacts.items():
            path = os.path.join(out_dir, name)
            if name.endswith(".json"):
                write_json(path, data)
            else:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(data)
        write_json(os.path.join(out_dir, "timings.json"), {k: round(v, 6) for k, v in timings.items()})
    return PipelineResult(an, table, maj, growth, reason, artifacts, timings)


def error_summary(exc):
    if isinstance(exc, QGPSError):
        return f"{type(exc).__name__}: {exc}", exc.exit_code
    return f"{type(exc).__name__}: {exc}", 1


__all__ = [
    "Analysis",
    "DEFAULT_PRECISION",
    "PipelineResult",
    "analyse",
    "closed_form_checks",
    "load_coefficients",
    "load_problem",
    "majorant_stage",
    "growth_stage",
    "run_pipeline",
    "solve_analysis",
]
