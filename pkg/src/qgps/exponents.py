"""Exact complex power exponents over a finite Q-basis of complex numbers.

An exponent is stored as a vector of rationals, one per basis symbol, so that
equality and semigroup membership are decided exactly.  Numeric values are
only used for ordering by real part and for evaluating ``q**lambda``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from typing import Iterable, Sequence

from .errors import (
    BasisMismatch,
    IndependenceUndecided,
    InvalidBasis,
    SearchBoundExceeded,
)
from .numeric import DEFAULT_PRECISION, get_mp, half_eps

RATIONAL = "rational"
NAMED = "named-irrational"
PARAMETER = "parameter"

B_REL = 10**6
D_MAX = 64

_SQRT_RE = re.compile(r"^sqrt(\d+)$")


def _squarefree_part(n):
    out, p = 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
        if n % p == 0:
            out *= p
            n //= p
        p += 1
    return out * n


def builtin_symbol_value(name, mp):
    """Numeric value of a reserved basis name, or None if not reserved."""
    if name == "1":
        return mp.mpc(1)
    if name == "i":
        return mp.mpc(0, 1)
    if name == "pi":
        return mp.mpc(mp.pi)
    m = _SQRT_RE.match(name)
    if m:
        return mp.mpc(mp.sqrt(int(m.group(1))))
    return None


def is_reserved(name):
    return name in ("1", "i", "pi") or bool(_SQRT_RE.match(name))


@dataclass(frozen=True)
class BasisSymbol:
    name: str
    tag: str
    value: object  # mpc

    def __repr__(self):
        return f"BasisSymbol({self.name!r}, {self.tag})"


@dataclass(frozen=True)
class QBasis:
    """Named complex numbers spanning the exponents of a problem over Q."""

    symbols: tuple
    precision: int = DEFAULT_PRECISION
    declared_q_independent: bool = False

    def __post_init__(self):
        names = [s.name for s in self.symbols]
        if "1" not in names:
            raise InvalidBasis("basis must contain the element 1")
        if len(set(names)) != len(names):
            raise InvalidBasis(f"duplicate basis symbols in {names}")
        mp = get_mp(self.precision)
        vals = [mp.mpc(s.value) for s in self.symbols]
        for s, v in zip(self.symbols, vals):
            if not (mp.isfinite(v.real) and mp.isfinite(v.imag)):
                raise InvalidBasis(f"basis symbol {s.name} has non-finite value")
        tol = half_eps(self.precision)
        for (a, va), (b, vb) in itertools.combinations(zip(names, vals), 2):
            if abs(va - vb) <= tol * max(1, abs(va)):
                raise InvalidBasis(f"basis symbols {a} and {b} have equal values")
        if self.symbols[names.index("1")].value != 1:
            raise InvalidBasis("basis element 1 must have value 1")

    @classmethod
    def build(cls, entries=("1",), precision=DEFAULT_PRECISION, declared_q_independent=False):
        """Build a basis from names or ``(name, value)`` pairs.

        Reserved names (``1``, ``i``, ``pi``, ``sqrt<n>``) get their exact
        tags and built-in values.  Any other name is a parameter and needs a
        value.  ``1`` is inserted first when missing.
        """
        mp = get_mp(precision)
        symbols = []
        for entry in entries:
            name, value = (entry, None) if isinstance(entry, str) else entry
            builtin = builtin_symbol_value(name, mp)
            if builtin is not None:
                m = _SQRT_RE.match(name)
                if m and math.isqrt(int(m.group(1))) ** 2 == int(m.group(1)):
                    raise InvalidBasis(f"{name} is rational; write it as an integer")
                if value is not None:
                    given = mp.mpc(value)
                    if abs(given - builtin) > mp.mpf(10) ** -6 * max(1, abs(builtin)):
                        raise InvalidBasis(f"value given for {name} disagrees with its built-in value")
                tag = RATIONAL if name == "1" else NAMED
                symbols.append(BasisSymbol(name, tag, builtin))
            else:
                if value is None:
                    raise InvalidBasis(f"basis symbol {name!r} needs a numeric value")
                symbols.append(BasisSymbol(name, PARAMETER, mp.mpc(value)))
        if "1" not in [s.name for s in symbols]:
            symbols.insert(0, BasisSymbol("1", RATIONAL, mp.mpc(1)))
        return cls(tuple(symbols), int(precision), bool(declared_q_independent))

    def __len__(self):
        return len(self.symbols)

    @property
    def names(self):
        return tuple(s.name for s in self.symbols)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise BasisMismatch(f"{name!r} is not a basis symbol") from None

    def exponent(self, **coords):
        """``basis.exponent(sqrt2=1, **{"1": -1})`` style constructor."""
        v = [Fraction(0)] * len(self)
        for name, c in coords.items():
            v[self.index(name)] = Fraction(c)
        return ExponentVector(tuple(v))

    def unit(self, name, coeff=1):
        v = [Fraction(0)] * len(self)
        v[self.index(name)] = Fraction(coeff)
        return ExponentVector(tuple(v))

    def zero(self):
        return ExponentVector((Fraction(0),) * len(self))

    def rational(self, x):
        return self.unit("1", Fraction(x))

    @property
    def tags_guarantee_independence(self):
        """True when the symbols are provably linearly independent over Q."""
        if self.declared_q_independent:
            return True
        if any(s.tag == PARAMETER for s in self.symbols):
            return False
        parts = []
        for s in self.symbols:
            m = _SQRT_RE.match(s.name)
            if m:
                parts.append(_squarefree_part(int(m.group(1))))
        return len(parts) == len(set(parts))

    def real_symbol_mask(self):
        """Per-symbol flag: value is real."""
        return tuple(s.value.imag == 0 for s in self.symbols)


@dataclass(frozen=True)
class ExponentVector:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    def _check(self, other):
        if len(self.coords) != len(other.coords):
            raise BasisMismatch("exponent vectors over different bases")

    def __add__(self, other):
        self._check(other)
        return ExponentVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return ExponentVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return ExponentVector(tuple(-a for a in self.coords))

    def scale(self, k):
        k = Fraction(k)
        return ExponentVector(tuple(k * a for a in self.coords))

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __len__(self):
        return len(self.coords)

    def __repr__(self):
        return "ExponentVector(" + ", ".join(str(c) for c in self.coords) + ")"


def format_exponent(ev, basis):
    """Render as a Q-linear combination of basis names, e.g. ``1 + (-1/2)*sqrt2``."""
    if len(ev) != len(basis):
        raise BasisMismatch("basis/vector length mismatch")
    parts = []
    for c, name in zip(ev.coords, basis.names):
        if c == 0:
            continue
        if name == "1":
            parts.append(f"({c})" if c.denominator != 1 or c < 0 else str(c))
        elif c == 1:
            parts.append(name)
        else:
            parts.append(f"({c})*{name}")
    return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=1 << 16)
def _numeric_value(ev, basis, precision):
    mp = get_mp(precision)
    total = mp.mpc(0)
    for c, sym in zip(ev.coords, basis.symbols):
        if c:
            value = builtin_symbol_value(sym.name, mp) if sym.tag != PARAMETER else sym.value
            total += mp.mpf(c.numerator) / c.denominator * mp.mpc(value)
    return total


def numeric_value(ev, basis, precision=None):
    """Complex value of an exponent vector at the requested binary precision."""
    if len(ev) != len(basis):
        raise BasisMismatch(f"vector of length {len(ev)} over basis of size {len(basis)}")
    return _numeric_value(ev, basis, precision or basis.precision)


def compare(a, b, basis):
    """Total order: real part (with tolerance), imaginary part, then coordinates."""
    if a.coords == b.coords:
        return 0
    va, vb = numeric_value(a, basis), numeric_value(b, basis)
    eps = half_eps(basis.precision)
    for x, y in ((va.real, vb.real), (va.imag, vb.imag)):
        if abs(x - y) > eps * max(1, abs(x), abs(y)):
            return -1 if x < y else 1
    return -1 if a.coords < b.coords else 1


def sort_exponents(exps, basis):
    return sorted(exps, key=cmp_to_key(lambda a, b: compare(a, b, basis)))


def re_value(ev, basis):
    return numeric_value(ev, basis).real


# -- exact linear algebra over Q -------------------------------------------------

def _rank_and_pivots(rows):
    """Row-reduce a copy of ``rows``; return (rank, reduced rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    return rank, m[:rank], pivots


def solve_exact(columns, target):
    """Solve ``sum x_i columns[i] = target`` over Q; columns must be independent.

    Returns the unique solution or None when the system is inconsistent.
    """
    n = len(columns)
    dim = len(target)
    aug = [[columns[i][r] for i in range(n)] + [target[r]] for r in range(dim)]
    rank, red, pivots = _rank_and_pivots(aug)
    if n in pivots:
        return None
    if rank != n:
        raise ValueError("columns are linearly dependent")
    x = [Fraction(0)] * n
    for row, col in zip(red, pivots):
        x[col] = row[n]
    return x


def rank(vectors):
    if not vectors:
        return 0
    return _rank_and_pivots([list(v) for v in vectors])[0]


# -- semigroups --------------------------------------------------------------------

@dataclass(frozen=True)
class SemiGroup:
    """Additive semigroup generated by exponents with positive real part."""

    basis: QBasis
    generators: tuple
    independent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            if len(g) != len(self.basis):
                raise BasisMismatch("generator over a different basis")
            if re_value(g, self.basis) <= 0:
                raise ValueError(f"generator {format_exponent(g, self.basis)} has Re <= 0")

    @property
    def s(self):
        return len(self.generators)

    def exponent_of(self, point):
        out = self.basis.zero()
        for m, g in zip(point, self.generators):
            if m:
                out = out + g.scale(m)
        return out

    def values(self, precision=None):
        return [numeric_value(g, self.basis, precision) for g in self.generators]

    def full_rank(self):
        return rank([g.coords for g in self.generators]) == self.s


def lattice_points(s, degree):
    """All m in Z_+^s with sum(m) == degree, in lexicographic order."""
    if s == 0:
        if degree == 0:
            yield ()
        return
    if s == 1:
        yield (degree,)
        return
    for first in range(degree + 1):
        for rest in lattice_points(s - 1, degree - first):
            yield (first,) + rest


def enumerate_semigroup(sg, re_bound):
    """Lattice points of the semigroup with Re(exponent) <= re_bound, in compare order."""
    mp = get_mp(sg.basis.precision)
    re_bound = mp.mpf(re_bound)
    min_re = min(re_value(g, sg.basis) for g in sg.generators)
    max_deg = int(mp.floor(re_bound / min_re)) if re_bound >= 0 else 0
    pts = []
    for d in range(1, max_deg + 1):
        for p in lattice_points(sg.s, d):
            e = sg.exponent_of(p)
            if re_value(e, sg.basis) <= re_bound:
                pts.append((p, e))
    key = cmp_to_key(lambda a, b: compare(a[1], b[1], sg.basis))
    return sorted(pts, key=key)


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _cone_coordinates(edges, vectors):
    """Coordinates of each vector in the edge basis, or None if not all >= 0."""
    out = []
    for v in vectors:
        x = solve_exact(edges, v)
        if x is None or any(c < 0 for c in x):
            return None
        out.append(x)
    return out


def _simplicial_subset(vectors):
    r = rank(vectors)
    for idx in itertools.combinations(range(len(vectors)), r):
        edges = [vectors[i] for i in idx]
        if rank(edges) != r:
            continue
        coords = _cone_coordinates(edges, vectors)
        if coords is not None:
            return edges, coords
    return None


def _span_basis(vectors):
    """Independent subset of ``vectors`` spanning the same Q-space."""
    chosen = []
    for v in vectors:
        if rank(chosen + [v]) > len(chosen):
            chosen.append(v)
    return chosen


def _enclosing_simplex(vectors, real_parts):
    """Simplicial cone containing all ``vectors`` (given in span coordinates).

    ``real_parts`` holds Re of each span-basis element; a rational approximation
    of that functional cuts the cone in a bounded section which is enclosed
    in a simplex.  Returns edge vectors or None.
    """
    r = len(vectors[0])
    g = [Fraction(float(x)).limit_denominator(2**40) for x in real_parts]
    gv = [sum(a * b for a, b in zip(g, v)) for v in vectors]
    if any(x <= 0 for x in gv):
        return None
    w = [[c / gx for c in v] for v, gx in zip(vectors, gv)]
    center = [sum(col) / len(w) for col in zip(*w)]
    p = next(i for i, x in enumerate(g) if x != 0)
    others = [k for k in range(r) if k != p]
    ys = [[wj[k] - center[k] for k in others] for wj in w]
    a = max([Fraction(0)] + [-y for row in ys for y in row]) + 1
    b = max(sum(row) for row in ys) + 1

    def lift(y):
        vec = list(center)
        for k, yk in zip(others, y):
            vec[k] += yk
            vec[p] -= g[k] / g[p] * yk
        return vec

    dim = r - 1
    verts = [[-a] * dim]
    for k in range(dim):
        y = [-a] * dim
        y[k] = b + (dim - 1) * a
        verts.append(y)
    return [lift(y) for y in verts]


def _numeric_relation(values, mp, bound=B_REL):
    """Search for sum k_i v_i = 0 with integer |k_i| <= bound (both Re and Im)."""
    if len(values) < 2:
        return None
    tol = mp.ldexp(1, -(mp.prec // 2))
    thetas = [mp.euler + mp.sqrt(7) / 11, mp.mpf(1) / mp.e + mp.cbrt(5)]
    for theta in thetas:
        xs = [v.real + theta * v.imag for v in values]
        try:
            rel = mp.pslq(xs, tol=tol, maxcoeff=bound, maxsteps=20000)
        except (ValueError, ZeroDivisionError):
            rel = None
        if rel is None:
            continue
        resid = abs(mp.fsum(k * v for k, v in zip(rel, values)))
        scale = max(abs(k) * abs(v) for k, v in zip(rel, values))
        if resid <= tol * scale:
            return rel
    return None


def reduce_generators(gens, basis):
    """Replace a generator list by Z-independent generators.

    Returns ``(SemiGroup, mapping)`` where ``mapping[g]`` is the non-negative
    integer expression of input generator ``g`` in the new generators; the
    new semigroup contains the old one.
    """
    gens = list(dict.fromkeys(gens))
    if not gens:
        raise ValueError("no generators")
    for g in gens:
        if re_value(g, basis) <= 0:
            raise ValueError(f"generator {format_exponent(g, basis)} has Re <= 0")
    coords = [list(g.coords) for g in gens]
    r = rank(coords)

    if r == len(gens):
        edges_ev = gens
        mapping = {g: tuple(1 if i == j else 0 for j in range(r)) for i, g in enumerate(gens)}
    else:
        span = _span_basis(coords)
        local = [solve_exact(span, v) for v in coords]
        found = _simplicial_subset(local)
        if found is not None:
            edges, cone = found
        else:
            span_vals = [numeric_value(ExponentVector(tuple(v)), basis) for v in span]
            edges = _enclosing_simplex(local, [v.real for v in span_vals])
            cone = _cone_coordinates(edges, local) if edges else None
            if cone is None:
                raise IndependenceUndecided("could not find a simplicial cone containing the generators")
        # scale each edge so every input has integer coordinates
        scales = []
        for i in range(r):
            d = 1
            for x in cone:
                d = _lcm(d, x[i].denominator)
            scales.append(d)
        edges_ev = []
        for e, d in zip(edges, scales):
            full = [sum(e[k] * span[k][c] for k in range(r)) / d for c in range(len(basis))]
            edges_ev.append(ExponentVector(tuple(full)))
        for e in edges_ev:
            if re_value(e, basis) <= 0:
                raise IndependenceUndecided("enclosing cone has an edge with Re <= 0")
        mapping = {g: tuple(int(x[i] * scales[i]) for i in range(r)) for g, x in zip(gens, cone)}

    sg = SemiGroup(basis, tuple(edges_ev), independent=True)
    if not basis.tags_guarantee_independence:
        mp = get_mp(basis.precision)
        rel = _numeric_relation(sg.values(), mp)
        if rel is not None:
            raise IndependenceUndecided(
                f"numeric integer relation {rel} among generators cannot be confirmed "
                "or refuted from the basis tags"
            )
    return sg, mapping


def membership(gamma, sg, d_max=D_MAX):
    """All representations gamma = sum m_i alpha_i with m_i >= 0, sum m_i >= 1."""
    if len(gamma) != len(sg.basis):
        raise BasisMismatch("exponent over a different basis")
    if gamma.is_zero():
        return []
    cols = [list(g.coords) for g in sg.generators]
    if sg.full_rank():
        x = solve_exact(cols, list(gamma.coords))
        if x is None or any(c < 0 or c.denominator != 1 for c in x):
            return []
        return [tuple(int(c) for c in x)]
    target_re = re_value(gamma, sg.basis)
    min_re = min(re_value(g, sg.basis) for g in sg.generators)
    hits = []
    for d in range(1, d_max + 1):
        for p in lattice_points(sg.s, d):
            if sg.exponent_of(p) == gamma:
                hits.append(p)
    if d_max * min_re <= target_re:
        raise SearchBoundExceeded(
            f"enumeration to degree {d_max} does not cover Re = {float(target_re):.6g}"
        )
    return hits


def identify_exponent(value, basis, bound=10**4):
    """Try to write a complex number as a rational combination of the basis."""
    mp = get_mp(basis.precision)
    vals = [mp.mpc(s.value) for s in basis.symbols]
    theta = mp.euler + mp.sqrt(7) / 11
    xs = [value.real + theta * value.imag] + [v.real + theta * v.imag for v in vals]
    try:
        rel = mp.pslq(xs, tol=mp.ldexp(1, -(mp.prec // 2)), maxcoeff=bound, maxsteps=20000)
    except (ValueError, ZeroDivisionError):
        return None
    if rel is None or rel[0] == 0:
        return None
    ev = ExponentVector(tuple(Fraction(-k, rel[0]) for k in rel[1:]))
    if abs(numeric_value(ev, basis) - value) > mp.ldexp(1, -(mp.prec // 2)) * max(1, abs(value)):
        return None
    return ev
