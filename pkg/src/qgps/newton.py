"""Hypothesis side of the construction.

* :func:`assumption_A` extracts the characteristic polynomial ``L`` from the
  leading terms of ``dF/dy_k`` along the seed;
* :func:`lemma1_reduce` performs ``y = phi_m + z**lambda_m * u`` and splits
  the result into ``L(q**lambda_m sigma) u = M(z, u, ..., sigma**n u)``;
* :func:`extract_semigroup`, :func:`classify_line` and
  :func:`theorem1_certificate` decide whether the convergence theorem applies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .equation import QPolynomial, partial_derivative, substitute
from .errors import (
    AllDerivativesVanish,
    AssumptionAViolated,
    HypothesisViolated,
    IndependenceUndecided,
    MissingParameter,
    NonvanishingConstant,
    NotInSemigroup,
    NotStabilized,
    SearchBoundExceeded,
    SeedError,
)
from .exponents import (
    D_MAX,
    SemiGroup,
    compare,
    enumerate_semigroup,
    format_exponent,
    lattice_points,
    membership,
    numeric_value,
    rank,
    re_value,
    reduce_generators,
    sort_exponents,
    _numeric_relation,
)
from .numeric import complex_to_json, get_mp, half_eps, real_to_json
from .series import GeneralizedSeries, SeriesAccumulator, dilate, mul, power, q_power, q_power_value

ABOVE = "Above"
UNDER = "Under"
ONLINE = "OnLine"
MIXED = "Mixed"

CONVERGENT = "Convergent"
NOT_APPLICABLE = "NotApplicable"
SMALL_DIVISOR = "SmallDivisorRegime"

K_RANGE = 100


def _re_close(a, b, precision):
    return abs(a - b) <= half_eps(precision) * max(1, abs(a), abs(b))


# -- characteristic polynomial ---------------------------------------------------------


@dataclass(frozen=True)
class CharPoly:
    """L(xi) = sum A_k xi**k with the common leading exponent ``base_exponent``."""

    base_exponent: object
    A: tuple
    precision: int
    stabilization: str = "structural"

    def __post_init__(self):
        mp = get_mp(self.precision)
        object.__setattr__(self, "A", tuple(mp.mpc(a) for a in self.A))
        if all(a == 0 for a in self.A):
            raise AllDerivativesVanish("all coefficients of L vanish")

    @property
    def n(self):
        return len(self.A) - 1

    @property
    def mp(self):
        return get_mp(self.precision)

    def __call__(self, xi):
        acc = self.mp.mpc(0)
        for a in reversed(self.A):
            acc = acc * xi + a
        return acc

    def scale_at(self, xi):
        """sum |A_k| max(1, |xi|)**n, the reference size for resonance tests."""
        return sum(abs(a) for a in self.A) * max(1, abs(xi)) ** self.n

    def size_at(self, xi):
        """sum |A_k| |xi|**k, the rounding scale of a Horner evaluation."""
        return sum(abs(a) * abs(xi) ** k for k, a in enumerate(self.A))

    def is_resonant(self, xi):
        return abs(self(xi)) <= half_eps(self.precision) * self.size_at(xi)

    def shifted(self, factor):
        """The polynomial xi -> L(factor * xi)."""
        return CharPoly(
            self.base_exponent,
            tuple(a * factor**k for k, a in enumerate(self.A)),
            self.precision,
            self.stabilization,
        )

    def degree(self):
        return max(k for k, a in enumerate(self.A) if a != 0)

    def low_order(self):
        return min(k for k, a in enumerate(self.A) if a != 0)

    def proportional_to(self, other):
        """True when the coefficient vectors are proportional (same roots)."""
        if len(self.A) != len(other.A):
            return False
        k = max(range(len(self.A)), key=lambda j: abs(other.A[j]))
        if other.A[k] == 0 or self.A[k] == 0:
            return False
        ratio = self.A[k] / other.A[k]
        tol = half_eps(self.precision)
        return all(abs(a - ratio * b) <= tol * max(abs(a), abs(ratio * b), 1e-300) for a, b in zip(self.A, other.A))

    def to_json(self, basis):
        mp = self.mp
        return {
            "base_exponent": format_exponent(self.base_exponent, basis),
            "A": [complex_to_json(a, mp) for a in self.A],
            "stabilization": self.stabilization,
        }

    def describe(self, digits=12):
        mp = self.mp
        parts = []
        for k, a in enumerate(self.A):
            if a == 0:
                continue
            c = mp.nstr(a, digits)
            parts.append(c if k == 0 else f"({c})*xi" + (f"^{k}" if k > 1 else ""))
        return " + ".join(parts)


def _leading(series):
    return series.terms[0] if series.terms else None


def _char_from(F, phi, ctx):
    basis = F.basis
    mp = get_mp(basis.precision)
    leads = []
    for k in range(F.n + 1):
        d = partial_derivative(F, k)
        s = substitute(d, phi, ctx) if d.monomials else GeneralizedSeries.zero(basis)
        leads.append(_leading(s))
    present = [t for t in leads if t is not None]
    if not present:
        raise AllDerivativesVanish("dF/dy_k vanishes along the seed for every k")
    lam = sort_exponents([t[0] for t in present], basis)[0]
    lam_re = re_value(lam, basis)
    A = []
    for t in leads:
        if t is not None and t[0] == lam:
            A.append(t[1])
        else:
            if t is not None and _re_close(re_value(t[0], basis), lam_re, basis.precision):
                raise AssumptionAViolated(
                    f"leading exponents {format_exponent(lam, basis)} and "
                    f"{format_exponent(t[0], basis)} share the real part but differ"
                )
            A.append(mp.mpc(0))
    return lam, tuple(A)


def _structural_bound(F, phi, rho):
    """Smallest Re-exponent a tail with Re >= rho can add to any dF/dy_k."""
    basis = F.basis
    mp = get_mp(basis.precision)
    low = phi.min_re() if phi.terms else rho
    low = min(low, rho)
    best = mp.inf
    for k in range(F.n + 1):
        for m in partial_derivative(F, k).monomials:
            if m.degree == 0:
                continue
            best = min(best, re_value(m.alpha, basis) + (m.degree - 1) * low + rho)
    return best


def assumption_A(F, phi_m, ctx, extra=None):
    """Characteristic polynomial of ``F`` along the truncation ``phi_m``.

    ``extra`` is an optional next term ``(exponent, coefficient)``; when given,
    ``L`` is recomputed with it and must not change.  The returned
    ``stabilization`` is ``structural`` when every neglected term provably
    enters ``dF/dy_k`` beyond the leading exponent, ``recomputed`` when only
    the recomputation confirms it, and ``pending`` when neither is available
    (the caller re-checks once further terms are known).
    """
    basis = F.basis
    lam, A = _char_from(F, phi_m, ctx)
    lam_re = re_value(lam, basis)
    eps = half_eps(basis.precision)
    if extra is not None:
        rho = re_value(extra[0], basis)
    elif phi_m.terms:
        rho = re_value(phi_m.terms[-1][0], basis)
    else:
        rho = 0
    structural = _structural_bound(F, phi_m, rho) > lam_re + eps * max(1, abs(lam_re))
    if extra is not None:
        longer = GeneralizedSeries.from_terms(basis, list(phi_m.terms) + [extra])
        check_stabilization(F, longer, ctx, CharPoly(lam, A, basis.precision))
        status = "structural" if structural else "recomputed"
    else:
        status = "structural" if structural else "pending"
    return CharPoly(lam, A, basis.precision, status)


def check_stabilization(F, longer, ctx, L):
    """Raise NotStabilized if a longer truncation changes ``L``."""
    lam2, A2 = _char_from(F, longer, ctx)
    tol = half_eps(L.precision)
    same = lam2 == L.base_exponent and all(
        abs(a - b) <= tol * max(1, abs(a), abs(b)) for a, b in zip(L.A, A2)
    )
    if not same:
        raise NotStabilized(
            "the leading terms of dF/dy_k change when the next term of the solution is included; "
            "reduce at a larger index"
        )
    return True


# -- seed coefficients -------------------------------------------------------------------


def _interpolate(values, mp):
    """Coefficients of the polynomial through (v, values[v]) for v = 0..D."""
    D = len(values) - 1
    V = mp.matrix([[mp.mpf(v) ** j for j in range(D + 1)] for v in range(D + 1)])
    rhs = mp.matrix([mp.mpc(x) for x in values])
    sol = mp.lu_solve(V, rhs)
    return [sol[j] for j in range(D + 1)]


def resolve_seed(F, seed_terms, ctx, params=None):
    """Turn seed terms into a series, solving unknown leading coefficients.

    A coefficient without a value is determined from the lowest exponent of
    ``F(z, prefix + v z**lambda)`` that depends on ``v``.  If that lowest
    exponent does not involve ``v`` the coefficient is free and must be
    supplied as a parameter.  Returns ``(series, solved)``.
    """
    basis = F.basis
    mp = get_mp(basis.precision)
    params = dict(params or {})
    ordered = sort_exponents([t.exponent for t in seed_terms], basis)
    by_exp = {t.exponent: t for t in seed_terms}
    if len(by_exp) != len(seed_terms):
        raise SeedError("seed has repeated exponents")
    prefix = []
    solved = {}
    D = max(F.total_degree(), 1)
    tol_rel = half_eps(basis.precision)
    for e in ordered:
        t = by_exp[e]
        value = t.value
        if t.name is not None and params.get(t.name) is not None:
            value = mp.mpc(params[t.name])
        if value is None:
            rows = []
            for v in range(D + 1):
                trial = GeneralizedSeries.from_terms(basis, prefix + [(e, v)] if v else prefix)
                rows.append(substitute(F, trial, ctx).as_dict())
            exps = sort_exponents(list({x for r in rows for x in r}), basis)
            value = None
            for x in exps:
                coeffs = _interpolate([r.get(x, 0) for r in rows], mp)
                size = max(abs(c) for c in coeffs)
                if size == 0:
                    continue
                live = [abs(c) > tol_rel * size for c in coeffs]
                if not any(live):
                    continue
                if not any(live[1:]):
                    raise MissingParameter(
                        t.name,
                        f"seed coefficient {t.name!r} is not determined by the equation "
                        f"(free at exponent {format_exponent(e, basis)}); pass --param {t.name}=...",
                    )
                deg = max(j for j, flag in enumerate(live) if flag)
                poly = [coeffs[j] if live[j] else 0 for j in range(deg, -1, -1)]
                roots = mp.polyroots(poly, maxsteps=200, extraprec=basis.precision) if deg > 1 else [-poly[1] / poly[0]]
                scale = max(abs(r) for r in roots) if roots else 0
                nonzero = [r for r in roots if abs(r) > tol_rel * max(scale, 1)]
                nonzero = _dedupe(nonzero, mp, tol_rel)
                if len(nonzero) != 1:
                    shown = ", ".join(mp.nstr(r, 10) for r in nonzero) or "none"
                    raise SeedError(
                        f"seed coefficient {t.name!r} has {len(nonzero)} admissible values "
                        f"({shown}); fix one with --param"
                    )
                value = mp.mpc(nonzero[0])
                break
            if value is None:
                raise MissingParameter(t.name)
            solved[t.name] = value
        prefix.append((e, value))
    return GeneralizedSeries.from_terms(basis, prefix), solved


def _dedupe(values, mp, tol):
    out = []
    for v in values:
        if not any(abs(v - w) <= tol * max(1, abs(v)) for w in out):
            out.append(v)
    return out


# -- resonance scan -------------------------------------------------------------------


@dataclass
class ScanReport:
    status: str  # AutoSatisfied | Scanned
    scanned: int
    resonances: list = field(default_factory=list)  # (position, exponent, |L|)
    min_abs: object = None
    note: str = ""

    def to_json(self, basis, mp):
        return {
            "status": self.status,
            "scanned": self.scanned,
            "min_abs_L": None if self.min_abs is None else real_to_json(self.min_abs, mp),
            "resonances": [
                {"position": j, "exponent": format_exponent(e, basis), "abs_L": real_to_json(v, mp)}
                for j, e, v in self.resonances
            ],
            "note": self.note,
        }


def assumption_B_scan(L, ctx, exps, J=200, basis=None):
    """Evaluate |L(q**lambda_j)| along the first J exponents of a stream."""
    mp = ctx.mp
    exps = list(itertools.islice(iter(exps), J))
    if basis is None:
        raise ValueError("basis is required")
    real = all(numeric_value(e, basis).imag == 0 for e in exps)
    auto = real and abs(ctx.abs_q - 1) > half_eps(ctx.precision)
    res = []
    lo = None
    for j, e in enumerate(exps):
        xi = q_power(ctx, e, basis)
        v = abs(L(xi))
        lo = v if lo is None else min(lo, v)
        if L.is_resonant(xi):
            res.append((j, e, v))
    if auto:
        note = "real exponents and |q| != 1: q**lambda_j tends to 0 or infinity, so L(q**lambda_j) vanishes finitely often"
        return ScanReport("AutoSatisfied", len(exps), res, lo, note)
    note = f"finite scan of {len(exps)} exponents; the condition concerns all j and is not decided beyond the scan"
    return ScanReport("Scanned", len(exps), res, lo, note)


# -- unit roots ----------------------------------------------------------------------------


def unit_root_in_semigroup(sg, ctx, k_range=K_RANGE, d_max=D_MAX):
    """Lattice points m with sum m_i alpha_i = 2 pi i k / ln q for 0 < |k| <= k_range."""
    mp = ctx.mp
    basis = sg.basis
    eps = half_eps(ctx.precision)
    vals = sg.values()
    min_re = min(v.real for v in vals)
    hits = []
    for k in range(-k_range, k_range + 1):
        if k == 0:
            continue
        tau = 2 * mp.pi * mp.mpc(0, 1) * k / ctx.ln_q
        if tau.real <= eps:
            continue
        for p in _solve_lattice(vals, tau, mp, eps, min_re, d_max, sg):
            hits.append((k, p))
    return hits


def _solve_lattice(vals, tau, mp, eps, min_re, d_max, sg):
    tol = eps * max(1, abs(tau))
    s = len(vals)
    if s == 1:
        x = tau / vals[0]
        m = int(mp.nint(x.real))
        if m >= 1 and abs(m * vals[0] - tau) <= tol:
            return [(m,)]
        return []
    if s == 2:
        a, b = vals
        det = a.real * b.imag - a.imag * b.real
        if abs(det) > eps:
            x = (tau.real * b.imag - tau.imag * b.real) / det
            y = (a.real * tau.imag - a.imag * tau.real) / det
            m1, m2 = int(mp.nint(x)), int(mp.nint(y))
            if m1 >= 0 and m2 >= 0 and m1 + m2 >= 1 and abs(m1 * a + m2 * b - tau) <= tol:
                return [(m1, m2)]
            return []
    if tau.real / min_re > d_max:
        raise SearchBoundExceeded(f"unit-root search needs degree above {d_max}")
    out = []
    for d in range(1, int(tau.real / min_re) + 2):
        for p in lattice_points(s, d):
            v = sum((m * x for m, x in zip(p, vals)), mp.mpc(0))
            if abs(v - tau) <= tol:
                out.append(p)
    return out


# -- reduction -------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedEquation:
    """L(q**lambda_m sigma) u = M(z, u, sigma u, ..., sigma**n u)."""

    L: CharPoly
    lambda_m: object
    M: QPolynomial
    phi_m: GeneralizedSeries
    m: int
    ctx: object

    @property
    def basis(self):
        return self.M.basis

    @property
    def L_shifted(self):
        """xi -> L(q**lambda_m xi); its value at q**gamma divides the coefficient at gamma."""
        return self.L.shifted(q_power(self.ctx, self.lambda_m, self.basis))


def lemma1_reduce(F, phi, m, ctx, L):
    """Substitute ``y = phi_m + z**lambda_m u`` and divide by ``z**(lambda_m + lambda)``.

    ``phi`` is the known part of the solution (at least ``m + 1`` terms).
    """
    basis = F.basis
    mp = get_mp(basis.precision)
    eps = half_eps(basis.precision)
    if m < 0 or m >= len(phi.terms):
        raise HypothesisViolated(f"reduction index {m} needs at least {m + 1} known terms")
    phi_m = phi.head(m + 1)
    lam_m = phi.terms[m][0]
    lam = L.base_exponent
    re_m, re_l = re_value(lam_m, basis), re_value(lam, basis)
    if re_m < re_l - eps * max(1, abs(re_l)):
        raise HypothesisViolated(
            f"Re lambda_m = {mp.nstr(re_m, 8)} is below Re lambda = {mp.nstr(re_l, 8)}"
        )
    if len(phi.terms) > m + 1:
        nxt = re_value(phi.terms[m + 1][0], basis)
        if nxt <= re_m + eps * max(1, abs(re_m)):
            raise HypothesisViolated("Re lambda_{m+1} must exceed Re lambda_m")
    lam_tot = lam_m + lam
    re_tot = re_value(lam_tot, basis)

    dil = [dilate(phi_m, ctx, k) for k in range(F.n + 1)]
    w = [q_power(ctx, lam_m.scale(k), basis) for k in range(F.n + 1)]
    pcache = {}

    def ppow(k, e):
        if (k, e) not in pcache:
            pcache[(k, e)] = power(dil[k], e)
        return pcache[(k, e)]

    accs = {}
    for mono in F.monomials:
        for beta in itertools.product(*(range(p + 1) for p in mono.powers)):
            b = sum(beta)
            coeff = mono.coeff
            for k, (p, bk) in enumerate(zip(mono.powers, beta)):
                if bk:
                    coeff *= math.comb(p, bk) * w[k] ** bk
            prod = GeneralizedSeries.monomial(basis, mono.alpha + lam_m.scale(b), coeff)
            for k, (p, bk) in enumerate(zip(mono.powers, beta)):
                if p - bk:
                    prod = mul(prod, ppow(k, p - bk))
            acc = accs.setdefault(beta, SeriesAccumulator(basis))
            for e, c in prod.terms:
                acc.add(e, c)

    out = []
    for beta in sorted(accs):
        series = accs[beta].finish(None)
        b = sum(beta)
        for e, c in series.terms:
            alpha = e - lam_tot
            r = re_value(e, basis)
            above = r > re_tot + eps * max(1, abs(re_tot))
            if b == 0:
                if not above:
                    raise NonvanishingConstant(format_exponent(e, basis), mp.nstr(c, 12))
            elif b == 1:
                if e == lam_tot:
                    continue  # this is the L(q^lambda_m sigma) part
                if not above:
                    if _re_close(r, re_tot, basis.precision):
                        raise AssumptionAViolated(
                            f"linear term at {format_exponent(e, basis)} has the real part of the "
                            "leading exponent but differs from it"
                        )
                    raise HypothesisViolated(f"linear term below the leading exponent at {format_exponent(e, basis)}")
            else:
                if r < re_tot - eps * max(1, abs(re_tot)) or (not above and not alpha.is_zero()):
                    raise HypothesisViolated(
                        f"nonlinear term at z^({format_exponent(alpha, basis)}) has Re < 0 after division"
                    )
            out.append((-c, alpha, beta))
    M = QPolynomial.from_terms(F.n, out, basis)
    for mono in M.monomials:
        if mono.degree <= 1 and re_value(mono.alpha, basis) <= 0:
            raise HypothesisViolated("reduced right side has a term with Re alpha <= 0")
    return ReducedEquation(L, lam_m, M, phi_m, m, ctx)


# -- semigroup and line classification ------------------------------------------------------


def extract_semigroup(red, extra=(), generators=None):
    """Semigroup generated by the exponents alpha of M (plus ``extra`` shifts).

    ``generators`` optionally fixes the generator list (and its order); every
    alpha must then be a member.  Returns ``(SemiGroup, mapping)``.
    """
    basis = red.basis
    alphas = sort_exponents({m.alpha for m in red.M.monomials if not m.alpha.is_zero()}, basis)
    for e in extra:
        if not e.is_zero() and e not in alphas:
            alphas.append(e)
    if not alphas:
        raise HypothesisViolated("the reduced equation has no exponent with Re > 0")
    if generators is None:
        return reduce_generators(alphas, basis)
    gens = list(generators)
    if rank([g.coords for g in gens]) != len(gens):
        raise IndependenceUndecided("declared generators are linearly dependent over Q")
    if not basis.tags_guarantee_independence:
        if _numeric_relation([numeric_value(g, basis) for g in gens], get_mp(basis.precision)):
            raise IndependenceUndecided("declared generators satisfy a numeric integer relation")
    sg = SemiGroup(basis, tuple(gens), independent=True)
    mapping = {}
    for a in alphas:
        reps = membership(a, sg)
        if not reps:
            raise NotInSemigroup(a, f"exponent {format_exponent(a, basis)} is not in the declared semigroup")
        mapping[a] = reps[0]
    return sg, mapping


@dataclass(frozen=True)
class LineClass:
    verdict: str
    k_bound: object
    d: tuple

    def to_json(self, mp):
        return {
            "verdict": self.verdict,
            "k_bound": None if self.k_bound is None else real_to_json(self.k_bound, mp)["value"],
            "d": [mp.nstr(x, 20) for x in self.d],
        }


def line_margins(ctx, sg):
    """d_i = Re alpha_i ln|q| - Im alpha_i arg q."""
    return tuple(v.real * ctx.ln_q.real - v.imag * ctx.ln_q.imag for v in sg.values(ctx.precision))


def classify_line(ctx, sg):
    if not sg.generators:
        raise ValueError("empty semigroup")
    d = line_margins(ctx, sg)
    eps = half_eps(ctx.precision)
    if any(abs(x) <= eps for x in d):
        return LineClass(ONLINE, None, d)
    if all(x < 0 for x in d):
        return LineClass(ABOVE, max(d), d)
    if all(x > 0 for x in d):
        return LineClass(UNDER, min(d), d)
    return LineClass(MIXED, None, d)


@dataclass(frozen=True)
class Certificate:
    status: str
    reasons: tuple
    line: LineClass
    required_coefficient: str = None

    def to_json(self, L, basis, mp, scan=None):
        out = {
            "status": self.status,
            "verdict": self.line.verdict,
            "k_bound": self.line.to_json(mp)["k_bound"],
            "d": self.line.to_json(mp)["d"],
            "required_coefficient": self.required_coefficient,
            "reasons": list(self.reasons),
            "A": [complex_to_json(a, mp) for a in L.A],
            "resonances": [] if scan is None else scan.to_json(basis, mp)["resonances"],
        }
        return out


def theorem1_certificate(L, line):
    A0, An = L.A[0], L.A[-1]
    if line.verdict == ABOVE:
        if A0 != 0:
            return Certificate(CONVERGENT, ("generators above the line and A0 != 0",), line, "A0")
        return Certificate(NOT_APPLICABLE, ("A0 = 0",), line, "A0")
    if line.verdict == UNDER:
        if An != 0:
            return Certificate(CONVERGENT, (f"generators under the line and A{L.n} != 0",), line, f"A{L.n}")
        return Certificate(NOT_APPLICABLE, (f"A{L.n} = 0",), line, f"A{L.n}")
    if line.verdict == MIXED:
        reason = "generators straddle line L"
    else:
        reason = "a generator lies on line L"
    return Certificate(SMALL_DIVISOR, (reason, "small divisors are not analysed"), line, None)
