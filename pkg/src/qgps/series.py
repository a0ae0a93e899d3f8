"""Generalized power series with complex exponents and their lattice embedding.

A :class:`GeneralizedSeries` is a finite truncation ``sum c_j z**lambda_j``
together with ``order_bound``: every term with ``Re(lambda) <= order_bound``
is present.  Exact (finite) series carry ``order_bound = +inf``.

Once the exponents are known to lie in a semigroup with Z-independent
generators, :func:`embed` maps the series to a multivariate Taylor series
indexed by lattice points; :func:`dilate_embedded` is the induced action of
the dilatation operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key

from .errors import (
    AmbiguousRepresentation,
    IncompatibleBasis,
    NotInSemigroup,
    QPowerOverflow,
    ViolatesConditionI,
    ViolatesConditionII,
)
from .exponents import (
    ExponentVector,
    SemiGroup,
    compare,
    format_exponent,
    membership,
    numeric_value,
    re_value,
)
from .numeric import DEFAULT_PRECISION, complex_to_json, get_mp, half_eps, zero_threshold

MAX_LOG_ABS = 10**12


@dataclass(frozen=True)
class QContext:
    """The dilatation parameter q with the branch 0 <= arg q < 2*pi."""

    q: object
    ln_q: object
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        mp = self.mp
        object.__setattr__(self, "q", mp.mpc(self.q))
        object.__setattr__(self, "ln_q", mp.mpc(self.ln_q))
        if self.q == 0 or self.q == 1:
            raise ValueError("q must differ from 0 and 1")
        if not (0 <= self.ln_q.imag < 2 * mp.pi):
            raise ValueError("ln q must satisfy 0 <= Im(ln q) < 2*pi")
        if abs(mp.exp(self.ln_q) - self.q) > half_eps(self.precision) * abs(self.q):
            raise ValueError("exp(ln q) != q")

    @property
    def mp(self):
        return get_mp(self.precision)

    @classmethod
    def from_q(cls, q, precision=DEFAULT_PRECISION):
        mp = get_mp(precision)
        q = mp.mpc(q)
        if q == 0:
            raise ValueError("q must be non-zero")
        arg = mp.arg(q)
        if arg < 0:
            arg += 2 * mp.pi
        return cls(q, mp.mpc(mp.log(abs(q)), arg), precision)

    @classmethod
    def from_ln_q(cls, ln_q, precision=DEFAULT_PRECISION):
        mp = get_mp(precision)
        ln_q = mp.mpc(ln_q)
        return cls(mp.exp(ln_q), ln_q, precision)

    @property
    def abs_q(self):
        return abs(self.q)

    @property
    def arg_q(self):
        return self.ln_q.imag


def q_power_value(ctx, value):
    """q**value on the fixed branch; ``value`` is a complex number."""
    mp = ctx.mp
    w = mp.mpc(value) * ctx.ln_q
    if abs(w.real) > MAX_LOG_ABS:
        raise QPowerOverflow(w.real)
    return mp.exp(w)


def q_power(ctx, lam, basis):
    """q**lam for an exact exponent, ``|q**lam| = exp(Re lam ln|q| - Im lam arg q)``."""
    return q_power_value(ctx, numeric_value(lam, basis, ctx.precision))


def q_power_log_abs(ctx, lam, basis):
    """ln|q**lam| without forming the power."""
    v = numeric_value(lam, basis, ctx.precision)
    return v.real * ctx.ln_q.real - v.imag * ctx.ln_q.imag


class SeriesAccumulator:
    """Sums contributions per exponent, keeping the sum of absolute values so
    that cancellation down to rounding noise can be recognised as zero."""

    def __init__(self, basis):
        self.basis = basis
        self.mp = get_mp(basis.precision)
        self.data = {}

    def add(self, ev, value, scale=None):
        if value == 0:
            return
        s = abs(value) if scale is None else scale
        slot = self.data.get(ev)
        if slot is None:
            self.data[ev] = [value, s]
        else:
            slot[0] += value
            slot[1] += s

    def finish(self, order_bound):
        tol = zero_threshold(self.basis.precision)
        terms = [(ev, v) for ev, (v, s) in self.data.items() if v != 0 and abs(v) > tol * s]
        return GeneralizedSeries.from_terms(self.basis, terms, order_bound, merged=True)


@dataclass(frozen=True)
class GeneralizedSeries:
    basis: object
    terms: tuple = ()
    order_bound: object = None

    def __post_init__(self):
        mp = get_mp(self.basis.precision)
        ob = mp.inf if self.order_bound is None else mp.mpf(self.order_bound)
        object.__setattr__(self, "order_bound", ob)
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def from_terms(cls, basis, terms, order_bound=None, merged=False):
        """Normalised series: equal exponents merged, zeros dropped, sorted."""
        mp = get_mp(basis.precision)
        if not merged:
            acc = {}
            for ev, c in terms:
                if len(ev) != len(basis):
                    raise IncompatibleBasis("term exponent over a different basis")
                acc[ev] = acc.get(ev, 0) + mp.mpc(c)
            terms = acc.items()
        terms = [(ev, mp.mpc(c)) for ev, c in terms if c != 0]
        terms.sort(key=cmp_to_key(lambda a, b: compare(a[0], b[0], basis)))
        return cls(basis, tuple(terms), order_bound)

    @classmethod
    def monomial(cls, basis, exponent, coeff=1):
        return cls.from_terms(basis, [(exponent, coeff)])

    @classmethod
    def zero(cls, basis, order_bound=None):
        return cls(basis, (), order_bound)

    @property
    def mp(self):
        return get_mp(self.basis.precision)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def coefficient(self, ev):
        for e, c in self.terms:
            if e == ev:
                return c
        return self.mp.mpc(0)

    def exponents(self):
        return [e for e, _ in self.terms]

    def as_dict(self):
        return dict(self.terms)

    def min_re(self):
        if not self.terms:
            return self.mp.inf
        return min(re_value(e, self.basis) for e, _ in self.terms)

    def leading(self):
        return self.terms[0] if self.terms else None

    def is_exact(self):
        return self.mp.isinf(self.order_bound)

    def _check(self, other):
        if other.basis != self.basis:
            raise IncompatibleBasis("series over different bases")

    def __add__(self, other):
        self._check(other)
        acc = SeriesAccumulator(self.basis)
        for e, c in self.terms + other.terms:
            acc.add(e, c)
        return acc.finish(min(self.order_bound, other.order_bound))

    def __neg__(self):
        return GeneralizedSeries(self.basis, tuple((e, -c) for e, c in self.terms), self.order_bound)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        k = self.mp.mpc(k)
        if k == 0:
            return GeneralizedSeries.zero(self.basis, self.order_bound)
        return GeneralizedSeries(self.basis, tuple((e, k * c) for e, c in self.terms), self.order_bound)

    def shift(self, lam, coeff=1):
        """Multiply by ``coeff * z**lam``."""
        k = self.mp.mpc(coeff)
        if k == 0:
            return GeneralizedSeries.zero(self.basis, self.order_bound + re_value(lam, self.basis))
        terms = [(e + lam, k * c) for e, c in self.terms]
        return GeneralizedSeries.from_terms(
            self.basis, terms, self.order_bound + re_value(lam, self.basis), merged=True
        )

    def truncate(self, re_bound):
        re_bound = self.mp.mpf(re_bound)
        tol = half_eps(self.basis.precision) * max(1, abs(re_bound)) if not self.mp.isinf(re_bound) else 0
        terms = tuple((e, c) for e, c in self.terms if re_value(e, self.basis) <= re_bound + tol)
        return GeneralizedSeries(self.basis, terms, min(self.order_bound, re_bound))

    def head(self, count):
        """The first ``count`` terms as an exact series."""
        return GeneralizedSeries(self.basis, self.terms[:count], None)

    def __repr__(self):
        body = " + ".join(
            f"({self.mp.nstr(c, 8)})*z^({format_exponent(e, self.basis)})" for e, c in self.terms[:6]
        )
        if len(self.terms) > 6:
            body += f" + ... ({len(self.terms)} terms)"
        return f"GeneralizedSeries[{body or '0'}; complete to Re <= {self.mp.nstr(self.order_bound, 6)}]"


def mul(a, b, re_bound=None):
    """Truncated product keeping exponents with Re <= re_bound."""
    a._check(b)
    mp = a.mp
    re_bound = mp.inf if re_bound is None else mp.mpf(re_bound)
    tol = 0 if mp.isinf(re_bound) else half_eps(a.basis.precision) * max(1, abs(re_bound))
    acc = SeriesAccumulator(a.basis)
    b_re = [(e, c, re_value(e, a.basis)) for e, c in b.terms]
    for ea, ca in a.terms:
        ra = re_value(ea, a.basis)
        for eb, cb, rb in b_re:
            if ra + rb > re_bound + tol:
                continue
            acc.add(ea + eb, ca * cb)
    ob = min(re_bound, a.order_bound + b.min_re(), b.order_bound + a.min_re())
    return acc.finish(ob)


def power(s, p, re_bound=None):
    if p < 0:
        raise ValueError("negative power")
    out = GeneralizedSeries.monomial(s.basis, s.basis.zero(), 1)
    for _ in range(p):
        out = mul(out, s, re_bound)
    return out


def dilate(s, ctx, j=1):
    """sigma**j: the coefficient at z**lam is multiplied by q**(j*lam)."""
    if j < 0:
        raise ValueError("j must be non-negative")
    if j == 0:
        return s
    terms = tuple((e, c * q_power(ctx, e.scale(j), s.basis)) for e, c in s.terms)
    return GeneralizedSeries(s.basis, terms, s.order_bound)


@dataclass(frozen=True)
class ValidationReport:
    condition_i: bool
    condition_ii: bool
    condition_iii: str
    n_terms: int
    min_re: object


def validate(s, sg=None):
    """Check conditions (i) Re >= 0 and (ii) non-decreasing Re on the stored terms.

    Condition (iii) (Re -> infinity) is certified structurally when every
    exponent lies in ``sg``; otherwise it is reported as unchecked.
    """
    mp = s.mp
    eps = half_eps(s.basis.precision)
    prev = None
    for e, c in s.terms:
        r = re_value(e, s.basis)
        if r < -eps:
            raise ViolatesConditionI((e, c))
        if prev is not None and r < prev - eps * max(1, abs(prev)):
            raise ViolatesConditionII((e, c))
        prev = r
    iii = "unchecked"
    if sg is not None:
        base = s.terms[0][0] if s.terms else None
        ok = all(
            ev == base or (membership(ev - base, sg) if base is not None else False)
            for ev, _ in s.terms
        )
        iii = "certified" if ok else "not-certified"
    return ValidationReport(True, True, iii, len(s.terms), s.min_re() if s.terms else mp.inf)


# -- lattice embedding -------------------------------------------------------------


@dataclass(frozen=True)
class TaylorSeries:
    """Multivariate Taylor series without constant term, indexed by lattice points.

    ``degree_bound`` is the largest total degree up to which all
    coefficients are known (``None`` means exact / unbounded).
    """

    sg: SemiGroup
    coeffs: dict = field(default_factory=dict)
    degree_bound: object = None

    def __post_init__(self):
        if tuple([0] * self.sg.s) in self.coeffs:
            raise ValueError("constant term is not allowed")
        mp = get_mp(self.sg.basis.precision)
        object.__setattr__(
            self, "coeffs", {tuple(k): mp.mpc(v) for k, v in self.coeffs.items() if v != 0}
        )

    def __getitem__(self, point):
        return self.coeffs.get(tuple(point), get_mp(self.sg.basis.precision).mpc(0))

    def points(self):
        return sorted(self.coeffs)

    def truncate(self, degree):
        db = degree if self.degree_bound is None else min(degree, self.degree_bound)
        return TaylorSeries(self.sg, {k: v for k, v in self.coeffs.items() if sum(k) <= degree}, db)


def _degree_bound_from_re(order_bound, sg):
    mp = get_mp(sg.basis.precision)
    if mp.isinf(order_bound):
        return None
    max_re = max(re_value(g, sg.basis) for g in sg.generators)
    eps = half_eps(sg.basis.precision)
    return max(0, int(mp.floor(order_bound / max_re + eps)))


def embed(psi, sg):
    """iota: place the coefficient of z**gamma at the unique lattice point of gamma."""
    if not sg.independent:
        raise AmbiguousRepresentation("semigroup generators are not known to be independent")
    coeffs = {}
    for e, c in psi.terms:
        reps = membership(e, sg)
        if not reps:
            raise NotInSemigroup(e, f"exponent {format_exponent(e, psi.basis)} is not in the semigroup")
        if len(reps) > 1:
            raise AmbiguousRepresentation(f"exponent {format_exponent(e, psi.basis)} has several representations")
        coeffs[reps[0]] = c
    return TaylorSeries(sg, coeffs, _degree_bound_from_re(psi.order_bound, sg))


def unembed(t):
    """Inverse of :func:`embed`."""
    sg = t.sg
    mp = get_mp(sg.basis.precision)
    terms = [(sg.exponent_of(p), c) for p, c in t.coeffs.items()]
    if t.degree_bound is None:
        ob = None
    else:
        min_re = min(re_value(g, sg.basis) for g in sg.generators)
        ob = (t.degree_bound + 1) * min_re * (1 - half_eps(sg.basis.precision))
    return GeneralizedSeries.from_terms(sg.basis, terms, ob if ob is not None else mp.inf, merged=True)


def taylor_mul(a, b, degree=None):
    """Product of two Taylor series truncated at total degree ``degree``."""
    if a.sg != b.sg:
        raise IncompatibleBasis("Taylor series over different semigroups")
    bounds = [x for x in (a.degree_bound, b.degree_bound) if x is not None]
    # no constant terms: degree-d coefficient of a*b needs a, b below degree d
    db = min(bounds) + 1 if bounds else None
    if degree is not None:
        db = degree if db is None else min(db, degree)
    mp = get_mp(a.sg.basis.precision)
    tol = zero_threshold(a.sg.basis.precision)
    acc = {}
    for pa, ca in a.coeffs.items():
        da = sum(pa)
        for pb, cb in b.coeffs.items():
            if db is not None and da + sum(pb) > db:
                continue
            key = tuple(x + y for x, y in zip(pa, pb))
            slot = acc.setdefault(key, [mp.mpc(0), mp.mpf(0)])
            slot[0] += ca * cb
            slot[1] += abs(ca * cb)
    coeffs = {k: v for k, (v, s) in acc.items() if abs(v) > tol * s}
    return TaylorSeries(a.sg, coeffs, db)


def taylor_add(a, b, scale_b=1):
    if a.sg != b.sg:
        raise IncompatibleBasis("Taylor series over different semigroups")
    out = dict(a.coeffs)
    for k, v in b.coeffs.items():
        out[k] = out.get(k, 0) + scale_b * v
    bounds = [x for x in (a.degree_bound, b.degree_bound) if x is not None]
    return TaylorSeries(a.sg, out, min(bounds) if bounds else None)


def lattice_q_power(ctx, sg, point, j=1):
    """q**(j * sum m_i alpha_i)."""
    return q_power(ctx, sg.exponent_of(point).scale(j), sg.basis)


def dilate_embedded(t, ctx, j=1):
    """The induced operator: coefficient at m times q**(j * sum m_i alpha_i)."""
    if j == 0:
        return t
    coeffs = {p: c * lattice_q_power(ctx, t.sg, p, j) for p, c in t.coeffs.items()}
    return TaylorSeries(t.sg, coeffs, t.degree_bound)


def taylor_to_json(t):
    basis = t.sg.basis
    mp = get_mp(basis.precision)
    gens = []
    for g in t.sg.generators:
        v = numeric_value(g, basis)
        gens.append({
            "coords": [str(c) for c in g.coords],
            "text": format_exponent(g, basis),
            "value": complex_to_json(v, mp),
        })
    coeffs = []
    for p in sorted(t.coeffs):
        entry = {"m": list(p)}
        entry.update(complex_to_json(t.coeffs[p], mp))
        coeffs.append(entry)
    return {
        "basis": list(basis.names),
        "generators": gens,
        "degree_bound": t.degree_bound,
        "coeffs": coeffs,
    }


def taylor_from_json(data, sg):
    mp = get_mp(sg.basis.precision)
    coeffs = {tuple(e["m"]): mp.mpc(mp.mpf(e["re"]), mp.mpf(e["im"])) for e in data["coeffs"]}
    return TaylorSeries(sg, coeffs, data.get("degree_bound"))


def generators_from_json(data, basis):
    from fractions import Fraction

    return tuple(ExponentVector(tuple(Fraction(c) for c in g["coords"])) for g in data["generators"])
