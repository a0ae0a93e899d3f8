"""Polynomials F(z, y0, ..., yn) with complex powers of z, and series substitution.

``y_k`` stands for ``sigma**k y``.  A polynomial is a sorted tuple of
:class:`EqMonomial` values ``coeff * z**alpha * prod y_k**p_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

from .errors import DegenerateEquation, IncompatibleBasis
from .exponents import compare, format_exponent
from .numeric import decimal_string, get_mp
from .series import GeneralizedSeries, SeriesAccumulator, dilate, mul


@dataclass(frozen=True)
class EqMonomial:
    coeff: object
    alpha: object
    powers: tuple

    @property
    def degree(self):
        return sum(self.powers)


def _monomial_key(basis):
    def cmp(a, b):
        if a.powers != b.powers:
            return -1 if a.powers > b.powers else 1
        return compare(a.alpha, b.alpha, basis)

    return cmp_to_key(cmp)


@dataclass(frozen=True)
class QPolynomial:
    """Polynomial in z**alpha and y_0..y_n; no validity requirements."""

    n: int
    monomials: tuple
    basis: object

    def __post_init__(self):
        pass

    @classmethod
    def from_terms(cls, n, terms, basis):
        """Merge ``(coeff, alpha, powers)`` triples, drop zeros, sort."""
        mp = get_mp(basis.precision)
        acc = {}
        for coeff, alpha, powers in terms:
            powers = tuple(powers) + (0,) * (n + 1 - len(powers))
            if len(powers) != n + 1:
                raise ValueError("powers longer than the order")
            key = (alpha, powers)
            acc[key] = acc.get(key, 0) + mp.mpc(coeff)
        monos = [EqMonomial(c, a, p) for (a, p), c in acc.items() if c != 0]
        monos.sort(key=_monomial_key(basis))
        return cls(n, tuple(monos), basis)

    def terms(self):
        return [(m.coeff, m.alpha, m.powers) for m in self.monomials]

    def __len__(self):
        return len(self.monomials)

    def _lift(self, other):
        if other.basis != self.basis:
            raise IncompatibleBasis("polynomials over different bases")
        return max(self.n, other.n)

    def __add__(self, other):
        n = self._lift(other)
        return QPolynomial.from_terms(n, self.terms() + other.terms(), self.basis)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        mp = get_mp(self.basis.precision)
        return QPolynomial.from_terms(self.n, [(mp.mpc(c) * k, a, p) for k, a, p in self.terms()], self.basis)

    def total_degree(self):
        return max((m.degree for m in self.monomials), default=0)

    def as_equation(self):
        return QDifferenceEquation(self.n, self.monomials, self.basis)


class QDifferenceEquation(QPolynomial):
    """F(z, y, sigma y, ..., sigma**n y) = 0; F must genuinely involve y."""

    def __post_init__(self):
        if not any(m.degree > 0 for m in self.monomials):
            raise DegenerateEquation("equation does not involve the unknown y")
        if len(self.monomials) < 2:
            raise DegenerateEquation("a single monomial only admits the zero solution")

    @classmethod
    def from_terms(cls, n, terms, basis):
        return QPolynomial.from_terms(n, terms, basis).as_equation()

    def scale(self, c):
        return QPolynomial.scale(self, c).as_equation()


def partial_derivative(F, k):
    """Symbolic dF/dy_k."""
    if not 0 <= k <= F.n:
        raise ValueError(f"k must lie in 0..{F.n}")
    out = []
    for m in F.monomials:
        p = m.powers[k]
        if p == 0:
            continue
        powers = list(m.powers)
        powers[k] -= 1
        out.append((m.coeff * p, m.alpha, tuple(powers)))
    return QPolynomial.from_terms(F.n, out, F.basis)


class _PowerCache:
    def __init__(self, s, ctx, n, re_bound):
        self.ctx = ctx
        self.re_bound = re_bound
        self.dilated = {}
        self.powers = {}
        self.s = s

    def sigma(self, k):
        if k not in self.dilated:
            self.dilated[k] = dilate(self.s, self.ctx, k)
        return self.dilated[k]

    def power(self, k, p):
        key = (k, p)
        if key not in self.powers:
            if p == 1:
                self.powers[key] = self.sigma(k)
            else:
                self.powers[key] = mul(self.power(k, p - 1), self.sigma(k), self.re_bound)
        return self.powers[key]


def substitute(F, s, ctx, re_bound=None):
    """F(z, s, sigma s, ..., sigma**n s) truncated at Re <= re_bound.

    With ``re_bound=None`` the bound is the order bound of ``s`` (``+inf``
    for an exact finite series, giving the complete finite residual).
    """
    if F.basis != s.basis:
        raise IncompatibleBasis("equation and series over different bases")
    mp = get_mp(F.basis.precision)
    bound = s.order_bound if re_bound is None else min(mp.mpf(re_bound), s.order_bound)
    if mp.isinf(bound):
        bound = None
    cache = _PowerCache(s, ctx, F.n, bound)
    acc = SeriesAccumulator(F.basis)
    order_bound = mp.inf if bound is None else bound
    for m in F.monomials:
        prod = GeneralizedSeries.monomial(F.basis, m.alpha, m.coeff)
        for k, p in enumerate(m.powers):
            if p:
                prod = mul(prod, cache.power(k, p), bound)
        order_bound = min(order_bound, prod.order_bound)
        for e, c in prod.terms:
            acc.add(e, c)
    out = acc.finish(order_bound)
    return out.truncate(bound) if bound is not None else out


def format_coefficient(c, mp, digits=None):
    """Round-trippable complex literal."""
    c = mp.mpc(c)
    if digits is None:
        re_s, im_s = decimal_string(c.real, mp), decimal_string(c.imag, mp)
    else:
        re_s, im_s = mp.nstr(c.real, digits), mp.nstr(c.imag, digits)
    if c.imag == 0:
        return f"({re_s})"
    if c.real == 0:
        return f"({im_s}*i)"
    return f"({re_s} + ({im_s})*i)"


def render_polynomial(F, digits=None):
    """Text form accepted by the parser (``S<k>(y)`` for sigma**k y)."""
    mp = get_mp(F.basis.precision)
    parts = []
    for m in F.monomials:
        factors = [format_coefficient(m.coeff, mp, digits)]
        if not m.alpha.is_zero():
            factors.append(f"z^({format_exponent(m.alpha, F.basis)})")
        for k, p in enumerate(m.powers):
            if p == 0:
                continue
            name = "y" if k == 0 else f"S{k}(y)"
            factors.append(name if p == 1 else f"{name}^{p}")
        parts.append("*".join(factors))
    return " + ".join(parts) if parts else "0"
