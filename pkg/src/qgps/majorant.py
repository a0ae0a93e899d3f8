"""Majorant witness for convergence: nu, the majorant equation, its coefficients.

Above the line the divisors ``L(q**(lambda_m + gamma))`` tend to ``A_0``
and ``nu W = sum |A| z**k W**p`` majorizes the reduced solution directly.
Under the line they grow like ``A_n q**(n (lambda_m + gamma))``; there we
bound ``|L| / |q**(n gamma)|`` from below and majorize the rescaled
coefficients ``q**(n gamma_P) c_P``, which dominate ``c_P`` because
``|q**gamma| >= 1`` on the whole semigroup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InsufficientData, NonpositiveNu, PreconditionFailed, ZeroDivisorHit
from .exponents import lattice_points
from .newton import ABOVE, CONVERGENT, UNDER
from .numeric import get_mp, half_eps, real_to_json
from .series import q_power
from .solver import LatticeRecursion, lattice_monomials

TAIL_FRACTION = 2
MAX_SCAN_DEGREE = 10_000


@dataclass(frozen=True)
class NuCertificate:
    nu: object
    m_star: int
    case: str
    limit: object
    finite_min: object
    argmin: tuple

    def to_json(self, mp):
        return {
            "nu": real_to_json(self.nu, mp),
            "M_star": self.m_star,
            "case": self.case,
            "tail_limit": real_to_json(self.limit, mp),
            "tail_bound": real_to_json(self.limit / TAIL_FRACTION, mp),
            "finite_min": None if self.finite_min is None else real_to_json(self.finite_min, mp),
            "argmin": None if self.argmin is None else list(self.argmin),
        }


def _tail(B, kb, d, mp, under):
    """Upper bound for the non-dominant part of L at total degree d."""
    n = len(B) - 1
    if under:
        return sum(abs(B[k]) * mp.exp((k - n) * kb * d) for k in range(n))
    return sum(abs(B[k]) * mp.exp(k * kb * d) for k in range(1, n + 1))


def compute_nu(L, lambda_m, sg, ctx, certificate):
    """Effective positive lower bound for the divisors on the whole semigroup.

    ``L`` is the characteristic polynomial before the shift by
    ``q**lambda_m``.  Returns a :class:`NuCertificate`; ``m_star`` is the
    largest total degree scanned explicitly.
    """
    if certificate.status != CONVERGENT:
        raise PreconditionFailed(f"certificate is {certificate.status}, not {CONVERGENT}")
    mp = ctx.mp
    line = certificate.line
    under = line.verdict == UNDER
    if line.verdict not in (ABOVE, UNDER):
        raise PreconditionFailed(f"line verdict {line.verdict}")
    Ls = L.shifted(q_power(ctx, lambda_m, sg.basis))
    B = Ls.A
    n = len(B) - 1
    limit = abs(B[n]) if under else abs(B[0])
    if limit == 0:
        raise PreconditionFailed("the dominant coefficient of L vanishes")
    kb = line.k_bound
    m_star = 0
    while _tail(B, kb, m_star + 1, mp, under) > limit / TAIL_FRACTION:
        m_star += 1
        if m_star > MAX_SCAN_DEGREE:
            raise PreconditionFailed("tail bound does not settle; the line margin is too small")
    finite_min, argmin = None, None
    for d in range(1, m_star + 1):
        for P in lattice_points(sg.s, d):
            xi = q_power(ctx, sg.exponent_of(P), sg.basis)
            if Ls.is_resonant(xi):
                raise ZeroDivisorHit(f"L vanishes at lattice point {P}; reduce at a larger index")
            v = abs(Ls(xi))
            if under:
                v = v / abs(xi) ** n
            if finite_min is None or v < finite_min:
                finite_min, argmin = v, P
    nu = limit / TAIL_FRACTION if finite_min is None else min(finite_min, limit / TAIL_FRACTION)
    return NuCertificate(nu, m_star, UNDER if under else ABOVE, limit, finite_min, argmin)


def nu_ratio(Ls, xi, under):
    """The quantity bounded below by nu at a semigroup point with ``q**gamma = xi``."""
    v = abs(Ls(xi))
    return v / abs(xi) ** Ls.n if under else v


@dataclass(frozen=True)
class MajorantProblem:
    nu: object
    s: int
    abs_monomials: tuple
    precision: int

    def __post_init__(self):
        if not self.nu > 0:
            raise NonpositiveNu(f"nu must be positive, got {self.nu}")
        for a, k, p in self.abs_monomials:
            if a < 0:
                raise ValueError("majorant coefficients must be non-negative")
            if not any(k) and p < 2:
                raise ValueError("a monomial without z-power must be at least quadratic in W")

    def to_json(self, mp):
        return {
            "nu": real_to_json(self.nu, mp),
            "monomials": [
                {"abs_coeff": real_to_json(a, mp), "k": list(k), "p": p} for a, k, p in self.abs_monomials
            ],
        }


def build_majorant(red, sg, nu):
    """nu W = sum |A| z**k W**p from the reduced right side."""
    mp = get_mp(red.basis.precision)
    if not nu > 0:
        raise NonpositiveNu(f"nu must be positive, got {nu}")
    merged = {}
    for coeff, k, factors in lattice_monomials(red.M, sg):
        key = (k, len(factors))
        merged[key] = merged.get(key, mp.mpf(0)) + abs(coeff)
    monos = tuple((a, k, p) for (k, p), a in sorted(merged.items()))
    return MajorantProblem(mp.mpf(nu), sg.s, monos, red.basis.precision)


def majorant_coefficients(problem, N):
    """C_P for 1 <= |P| <= N from nu C_P = [sum |A| z**k W**p]_P."""
    if N < 1:
        raise ValueError("N must be at least 1")
    mp = get_mp(problem.precision)
    monos = [(a, k, (0,) * p) for a, k, p in problem.abs_monomials]
    eng = LatticeRecursion(problem.s, monos, problem.precision, mp.mpf(0))
    if 0 not in eng.g:
        eng.g[0] = {}
    C = {}
    for d in range(1, N + 1):
        pts = list(lattice_points(problem.s, d))
        for P in pts:
            eng.products(P)
        for P in pts:
            rhs, _ = eng.rhs(P)
            c = rhs / problem.nu
            assert c >= 0, "majorant coefficient became negative"
            if c != 0:
                C[P] = c
                eng.store(P, {0: c})
    return C


@dataclass
class MajorantResult:
    C: dict
    degree_bound: int
    pointwise: dict = field(default_factory=dict)
    overall: bool = True
    first_failure: object = None
    radius_estimate: object = None

    def to_json(self, mp):
        rows = []
        for d in range(1, self.degree_bound + 1):
            for P in lattice_points(len(next(iter(self.C), (0,))), d) if self.C else ():
                c = self.C.get(P)
                rows.append({
                    "m": list(P),
                    "log10_C": None if not c else float(mp.log10(c)),
                    "dominated": self.pointwise.get(P, True),
                })
        return {
            "degree_bound": self.degree_bound,
            "C": rows,
            "dominance": self.overall,
            "first_failure": None if self.first_failure is None else list(self.first_failure),
            "radius_estimate": None if self.radius_estimate is None else (
                "inf" if self.radius_estimate == mp.inf else mp.nstr(self.radius_estimate, 12)
            ),
        }


def dominance_check(table, C, precision=None):
    """Pointwise |c_P| <= C_P (1 + eps) over the table's degree range."""
    prec = precision or table.basis.precision
    mp = get_mp(prec)
    eps = half_eps(prec)
    pointwise = {}
    first = None
    for d in range(1, table.degree_bound + 1):
        for P in lattice_points(table.sg.s, d):
            c = abs(table.coeffs.get(P, 0))
            ok = c <= C.get(P, mp.mpf(0)) * (1 + eps)
            pointwise[P] = ok
            if not ok and first is None:
                first = P
    return MajorantResult(C, table.degree_bound, pointwise, first is None, first)


def diagonal_maxima(C, s, N):
    return [max((C.get(P, 0) for P in lattice_points(s, d)), default=0) for d in range(1, N + 1)]


def radius_estimate(C, s, N, precision):
    """Root-test estimate of the convergence radius of W along its diagonals.

    Fits ``log max_{|P|=d} C_P ~ d log(1/r) + beta log d + c`` over the
    last half of the diagonals.  An estimate, not a bound; returns
    ``mp.inf`` when the tail diagonals vanish.
    """
    import numpy as np

    mp = get_mp(precision)
    if N < 8:
        raise InsufficientData(f"{N} diagonals, need 8")
    maxima = diagonal_maxima(C, s, N)
    tail = [(d, m) for d, m in zip(range(1, N + 1), maxima) if d > N // 2 and m > 0]
    if not tail:
        return mp.inf
    if len(tail) < 3:
        return mp.mpf(1) / max(m ** (mp.mpf(1) / d) for d, m in tail)
    d = np.array([t[0] for t in tail], dtype=float)
    y = np.array([float(mp.log(t[1])) for t in tail])
    X = np.column_stack([d, np.log(d), np.ones_like(d)])
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    return mp.exp(-mp.mpf(float(coef[0])))
