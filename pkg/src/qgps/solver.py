"""Coefficients of the reduced solution by total-degree recursion on the lattice.

With ``psi = sum c_P z**gamma_P`` the reduced equation reads, at every
lattice point P,

    L(q**(lambda_m + gamma_P)) c_P = [M(z, psi, sigma psi, ..., sigma**n psi)]_P

and the right side only involves points of smaller total degree because M
has no constant and no linear term in ``z**0``.  :class:`LatticeRecursion`
computes the right side degree by degree with memoised products; the same
engine drives the majorant recursion.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientData,
    MissingParameter,
    NotInSemigroup,
    PrecisionExhausted,
        SeedError,
    UnresolvedResonance,
)
from .exponents import format_exponent, lattice_points, membership, numeric_value
from .numeric import ZERO_GUARD_BITS, complex_to_json, get_mp, half_eps, zero_threshold
from .series import (
    TaylorSeries,
    dilate_embedded,
    q_power,
    q_power_log_abs,
    taylor_add,
    taylor_mul,
    unembed,
)

MIN_SAMPLES = 8
SEED_TOLERANCE = 1e-8


def lattice_monomials(M, sg):
    """M's monomials as ``(coeff, k, factors)``.

    ``k`` is the lattice point of ``z**alpha`` (zero vector for alpha = 0)
    and ``factors`` lists the shift index j once per factor ``sigma**j u``.
    """
    out = []
    s = sg.s
    for mono in M.monomials:
        if mono.alpha.is_zero():
            k = (0,) * s
        else:
            reps = membership(mono.alpha, sg)
            if not reps:
                raise NotInSemigroup(mono.alpha, f"exponent {format_exponent(mono.alpha, M.basis)} of M is not in the semigroup")
            k = reps[0]
        factors = tuple(j for j, p in enumerate(mono.powers) for _ in range(p))
        if sum(k) == 0 and len(factors) < 2:
            raise ValueError("monomial without z-power must be at least quadratic")
        out.append((mono.coeff, k, factors))
    return out


def box(P):
    """Lattice points Q with 0 <= Q <= P componentwise, Q != 0, Q != P."""
    for Q in itertools.product(*(range(p + 1) for p in P)):
        if any(Q) and Q != P:
            yield Q


def _sub(P, Q):
    return tuple(a - b for a, b in zip(P, Q))


class LatticeRecursion:
    """Degree-by-degree evaluation of the right side of a lattice recursion.

    ``monomials`` are ``(coeff, k, factors)`` triples; ``g[j][P]`` holds the
    coefficient of the j-th factor series at P (``q**(j gamma_P) c_P`` for the
    solver, ``C_P`` for the majorant).  Products of several factors are
    memoised by their sorted factor tuple.
    """

    def __init__(self, s, monomials, precision, zero):
        self.s = s
        self.monomials = monomials
        self.zero = zero
        self.tol = zero_threshold(precision)
        js = sorted({j for _, _, f in monomials for j in f})
        self.g = {j: {} for j in js}
        keys = set()
        for _, _, f in monomials:
            f = tuple(sorted(f))
            for i in range(len(f) - 1):
                keys.add(f[i:])
        self.keys = sorted(keys, key=len)
        self.Q = {key: {} for key in self.keys}

    def _factor_map(self, key):
        return self.g[key[0]] if len(key) == 1 else self.Q[key]

    def products(self, P):
        for key in self.keys:
            first = self.g[key[0]]
            rest = self._factor_map(key[1:])
            total = self.zero
            scale = 0
            for P1 in box(P):
                a = first.get(P1)
                if a is None:
                    continue
                b = rest.get(_sub(P, P1))
                if b is None:
                    continue
                t = a * b
                total += t
                scale += abs(t)
            if total != 0 and abs(total) > self.tol * scale:
                self.Q[key][P] = total

    def rhs(self, P):
        """Right side at P and the sum of absolute values of its contributions."""
        total = self.zero
        scale = 0
        for coeff, k, factors in self.monomials:
            R = _sub(P, k)
            if any(x < 0 for x in R):
                continue
            if not factors:
                if any(R):
                    continue
                t = coeff
            else:
                if not any(R):
                    continue
                v = self._factor_map(tuple(sorted(factors))).get(R)
                if v is None:
                    continue
                t = coeff * v
            total += t
            scale += abs(t)
        return total, scale

    def store(self, P, values):
        """Install the factor coefficients ``values[j]`` at P."""
        for j, v in values.items():
            if v != 0:
                self.g[j][P] = v


@dataclass(frozen=True)
class Resonance:
    point: tuple
    name: str
    value: object
    rhs_abs: object
    status: str = "FreeParameter"


@dataclass
class CoefficientTable:
    sg: object
    lambda_m: object
    coeffs: dict
    degree_bound: int
    resonances: list = field(default_factory=list)
    divisors: dict = field(default_factory=dict)
    max_lost_bits: float = 0.0

    @property
    def basis(self):
        return self.sg.basis

    def __getitem__(self, P):
        return self.coeffs.get(tuple(P), get_mp(self.basis.precision).mpc(0))

    def points(self, degree=None):
        d = self.degree_bound if degree is None else degree
        for k in range(1, d + 1):
            yield from lattice_points(self.sg.s, k)

    def taylor(self):
        return TaylorSeries(self.sg, dict(self.coeffs), self.degree_bound)

    def exponent_of(self, P):
        return self.lambda_m + self.sg.exponent_of(P)


def default_name(P):
    if all(x < 10 for x in P):
        return "c" + "".join(str(x) for x in P)
    return "c" + "_".join(str(x) for x in P)


def _lookup_param(params, name, P):
    for key in (name, tuple(P), ",".join(str(x) for x in P)):
        if key in params and params[key] is not None:
            return params[key]
    return None


def solve(red, sg, ctx, N, params=None, seed=None, fixed=None):
    """Coefficients c_P for all lattice points of total degree 1..N.

    ``seed`` maps exponents (beyond the reduction index) to
    ``(name, value)``; a resonant point takes its value from there or from
    ``params``.  ``fixed`` optionally supplies coefficients to use instead
    of computing them (degree-wise triangularity checks).
    """
    mp = ctx.mp
    prec = ctx.precision
    basis = sg.basis
    params = dict(params or {})
    seed = dict(seed or {})
    fixed = fixed or {}
    Ls = red.L_shifted
    monos = lattice_monomials(red.M, sg)
    eng = LatticeRecursion(sg.s, monos, prec, mp.mpc(0))
    eps = half_eps(prec)
    coeffs, divisors, resonances = {}, {}, []
    lost_max = 0.0
    for d in range(1, N + 1):
        pts = list(lattice_points(sg.s, d))
        for P in pts:
            eng.products(P)
        for P in pts:
            gamma = sg.exponent_of(P)
            xi = q_power(ctx, gamma, basis)
            rhs, scale = eng.rhs(P)
            if rhs != 0 and abs(rhs) <= eng.tol * scale:
                rhs = mp.mpc(0)
            den = Ls(xi)
            divisors[P] = den
            e = red.lambda_m + gamma
            seed_entry = seed.get(e)
            if P in fixed:
                c = mp.mpc(fixed[P])
            elif Ls.is_resonant(xi):
                if abs(rhs) > eps * scale:
                    raise UnresolvedResonance(P, mp.nstr(rhs, 10))
                name = seed_entry[0] if seed_entry and seed_entry[0] else default_name(P)
                value = seed_entry[1] if seed_entry else None
                if value is None:
                    value = _lookup_param(params, name, P)
                if value is None:
                    raise MissingParameter(
                        name,
                        f"resonance at lattice point {P} (exponent {format_exponent(e, basis)}): "
                        f"coefficient {name!r} is free; pass --param {name}=...",
                    )
                c = mp.mpc(value)
                resonances.append(Resonance(P, name, c, abs(rhs)))
            else:
                c = rhs / den
                lost = 0.0
                if rhs != 0:
                    lost += float(mp.log(scale / abs(rhs), 2))
                    size = Ls.size_at(xi)
                    lost += float(mp.log(size / abs(den), 2))
                    if lost > prec - ZERO_GUARD_BITS:
                        raise PrecisionExhausted(P)
                lost_max = max(lost_max, lost)
                if seed_entry is not None and seed_entry[1] is not None:
                    v = mp.mpc(seed_entry[1])
                    if abs(c - v) > SEED_TOLERANCE * max(abs(c), abs(v)):
                        raise SeedError(
                            f"seed coefficient at {format_exponent(e, basis)} is {mp.nstr(v, 12)} "
                            f"but the equation forces {mp.nstr(c, 12)}"
                        )
            if c != 0:
                coeffs[P] = c
                eng.store(P, {j: c * xi**j for j in eng.g})
    return CoefficientTable(sg, red.lambda_m, coeffs, N, resonances, divisors, lost_max)


def assemble(table, prefix):
    """phi = phi_m + z**lambda_m * psi as a generalized series."""
    psi = unembed(table.taylor())
    return prefix + psi.shift(table.lambda_m)


def identity_residuals(red, sg, ctx, table):
    """Per-point relative defect of the reduced equation on the computed table.

    Evaluated through the Taylor-series ring (embedding, products, induced
    dilatation) independently of the memoised recursion used by :func:`solve`.
    """
    mp = ctx.mp
    N = table.degree_bound
    psi = TaylorSeries(sg, dict(table.coeffs), N)
    Ls = red.L_shifted
    lhs = TaylorSeries(sg, {}, N)
    for k, a in enumerate(Ls.A):
        if a != 0:
            lhs = taylor_add(lhs, dilate_embedded(psi, ctx, k), a)
    shifted = {}

    def sig(j):
        if j not in shifted:
            shifted[j] = dilate_embedded(psi, ctx, j)
        return shifted[j]

    def absolute(ts):
        return TaylorSeries(sg, {P: abs(c) for P, c in ts.coeffs.items()}, ts.degree_bound)

    rhs = TaylorSeries(sg, {}, N)
    scale = TaylorSeries(sg, {}, N)
    for coeff, k, factors in lattice_monomials(red.M, sg):
        prod = prod_abs = None
        for j in factors:
            f, fa = sig(j), absolute(sig(j))
            prod = f if prod is None else taylor_mul(prod, f, N)
            prod_abs = fa if prod_abs is None else taylor_mul(prod_abs, fa, N)
        if any(k):
            zk = TaylorSeries(sg, {k: 1}, None)
            prod = zk if prod is None else taylor_mul(zk, prod, N)
            prod_abs = zk if prod_abs is None else taylor_mul(zk, prod_abs, N)
        rhs = taylor_add(rhs, prod.truncate(N), coeff)
        scale = taylor_add(scale, prod_abs.truncate(N), abs(coeff))
    out = {}
    for P in table.points():
        a, b = lhs[P], rhs[P]
        xi = q_power(ctx, sg.exponent_of(P), sg.basis)
        size = Ls.size_at(xi) * abs(table[P])
        # the absolute-value route bounds the rounding scale where c_P = 0
        ref = max(abs(a), abs(b), size, abs(scale[P]))
        out[P] = mp.mpf(0) if ref == 0 else abs(a - b) / ref
    return out


# -- growth along a ray ---------------------------------------------------------------


@dataclass
class GrowthReport:
    ray: tuple
    samples: list
    quadratic_fit: tuple
    sigma_a: float
    q_gevrey_order: object
    verdict: str
    t_max: int
    bound_check: dict = None

    def to_json(self):
        return {
            "ray": list(self.ray),
            "samples": [{"t": t, "log_abs": v} for t, v in self.samples],
            "quadratic_fit": {"a": self.quadratic_fit[0], "b": self.quadratic_fit[1], "c": self.quadratic_fit[2]},
            "sigma_a": self.sigma_a,
            "q_gevrey_order": self.q_gevrey_order,
            "verdict": self.verdict,
            "bound_check": self.bound_check,
        }


def fit_growth(samples):
    """Least-squares fit log|c| = a t**2 + b t + c; returns (a, b, c, sigma_a)."""
    t = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    X = np.column_stack([t**2, t, np.ones_like(t)])
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(len(t) - 3, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return float(coef[0]), float(coef[1]), float(coef[2]), math.sqrt(max(cov[0, 0], 0.0))


def classify_growth(a, sigma_a, t_max):
    if a > 3 * sigma_a and a * t_max**2 >= 1:
        return "ZeroRadiusEvidence"
    if abs(a) * t_max**2 < 1 or a < -3 * sigma_a:
        return "BoundedRadius"
    return "Inconclusive"


def growth_samples(coeffs, ray, degree_bound, mp):
    out = []
    t = 1
    while sum(ray) * t <= degree_bound:
        P = tuple(r * t for r in ray)
        c = coeffs.get(P)
        if c is not None and c != 0:
            out.append((t, float(mp.log(abs(c)))))
        t += 1
    return out


def growth_analysis(table, ray, ctx, bound=None):
    """Quadratic fit of log|c| along ``t * ray``.

    ``bound`` optionally requests the explicit check
    ``log|c_t| > log_ref + (t+offset)(t+offset+1)/2 * log_base`` for
    ``t_min <= t <= t_max``; pass a dict with those keys.
    """
    mp = ctx.mp
    ray = tuple(int(r) for r in ray)
    if len(ray) != table.sg.s or any(r < 0 for r in ray) or not any(ray):
        raise ValueError(f"ray must be a non-zero vector of {table.sg.s} non-negative integers")
    samples = growth_samples(table.coeffs, ray, table.degree_bound, mp)
    if len(samples) < MIN_SAMPLES:
        raise InsufficientData(f"{len(samples)} non-zero samples along ray {ray}, need {MIN_SAMPLES}")
    a, b, c, sa = fit_growth(samples)
    t_max = samples[-1][0]
    verdict = classify_growth(a, sa, t_max)
    alpha = table.sg.exponent_of(ray)
    log_q = abs(float(q_power_log_abs(ctx, alpha, table.basis)))
    order = 2 * a / log_q if log_q > 0 else None
    check = None
    if bound is not None:
        check = lower_bound_check(samples, **bound)
    return GrowthReport(ray, samples, (a, b, c), sa, order, verdict, t_max, check)


def lower_bound_check(samples, log_base, log_ref=0.0, offset=0, t_min=1, t_max=None):
    rows = []
    ok = True
    for t, v in samples:
        if t < t_min or (t_max is not None and t > t_max):
            continue
        rhs = log_ref + (t + offset) * (t + offset + 1) / 2 * log_base
        passed = v > rhs
        ok = ok and passed
        rows.append({"t": t, "log_abs": v, "log_bound": rhs, "passed": passed})
    return {"passed": ok and bool(rows), "rows": rows}


# -- evaluation -----------------------------------------------------------------------


def z_power(lam_value, z_abs, arg_z, mp):
    """z**lambda = exp(lambda (ln|z| + i arg z)) on the chosen branch."""
    if z_abs == 0:
        if lam_value == 0:
            return mp.mpc(1)
        return mp.mpc(0)
    return mp.exp(lam_value * mp.mpc(mp.log(z_abs), arg_z))


def evaluate(series, ctx, z_abs, arg_z=0, F=None, n_terms=None):
    """Partial sum of ``series`` at the point |z| e^{i arg z} and the residual |F|.

    The residual plugs the values of ``sigma**k phi`` (each exponent
    contributes ``c q**(k lambda) z**lambda``) into F evaluated the same way.
    """
    mp = ctx.mp
    basis = series.basis
    z_abs = mp.mpf(z_abs)
    arg_z = mp.mpf(arg_z)
    terms = series.terms if n_terms is None else series.terms[:n_terms]
    n = F.n if F is not None else 0
    ys = [mp.mpc(0)] * (n + 1)
    for e, c in terms:
        v = numeric_value(e, basis, ctx.precision)
        zp = z_power(v, z_abs, arg_z, mp)
        for k in range(n + 1):
            ys[k] += c * zp * (q_power(ctx, e.scale(k), basis) if k else 1)
    value = ys[0]
    if F is None:
        return value, None
    total = mp.mpc(0)
    for m in F.monomials:
        t = m.coeff * z_power(numeric_value(m.alpha, basis, ctx.precision), z_abs, arg_z, mp)
        for k, p in enumerate(m.powers):
            if p:
                t *= ys[k] ** p
        total += t
    return value, abs(total)


# -- persistence ---------------------------------------------------------------------


def table_to_json(table, mp):
    basis = table.basis
    rows = []
    for P in sorted(table.coeffs):
        e = table.exponent_of(P)
        row = {"m": list(P), "exponent": format_exponent(e, basis)}
        row.update(complex_to_json(table.coeffs[P], mp))
        rows.append(row)
    return {
        "degree_bound": table.degree_bound,
        "lambda_m": [str(c) for c in table.lambda_m.coords],
        "coeffs": rows,
        "resonances": [
            {
                "m": list(r.point),
                "name": r.name,
                "status": r.status,
                "value": complex_to_json(r.value, mp),
                "rhs_abs": mp.nstr(r.rhs_abs, 6),
            }
            for r in table.resonances
        ],
        "max_lost_bits": round(table.max_lost_bits, 3),
    }


def export_csv(table, path, mp):
    basis = table.basis
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "re_exponent", "im_exponent", "re_c", "im_c", "log10_abs_c"])
        for P in sorted(table.coeffs):
            v = numeric_value(table.exponent_of(P), basis)
            c = table.coeffs[P]
            w.writerow([
                " ".join(str(x) for x in P),
                mp.nstr(v.real, 20),
                mp.nstr(v.imag, 20),
                mp.nstr(c.real, 20),
                mp.nstr(c.imag, 20),
                float(mp.log10(abs(c))),
            ])
