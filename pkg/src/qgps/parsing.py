"""Problem-file reader and writer.

Line-oriented format, ``#`` starts a comment::

    precision = 256
    basis = [1, sqrt2]
    q = 0.5
    eq: S2(y) - 2^(-sqrt2)*S1(y) + y^2 - 5*z = 0
    seed: c00*z^(1) + c01*z^(sqrt2)
    param c01 = 1.0
    reduce_at = 0

Other directives: ``order = n`` (declared order, raised to the largest
``S<k>`` present), ``let r = (3/10)*i`` (named exponent) and
``basis = [..., name:value]`` for parameter-valued basis symbols.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .equation import QDifferenceEquation, QPolynomial, format_coefficient, render_polynomial
from .errors import (
    DegenerateEquation,
    InvalidBasis,
    ProblemFileMissing,
    ProblemSyntaxError,
    UndeclaredSymbol,
)
from .exponents import ExponentVector, QBasis, format_exponent, is_reserved, numeric_value
from .numeric import DEFAULT_PRECISION, decimal_string, get_mp
from .series import QContext

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),\[\]:=])
    """,
    re.VERBOSE,
)

_SHIFT_RE = re.compile(r"^S(\d+)$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    imag: bool = False


def tokenize(text, line=1, col0=1):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            if m.group("num") is not None:
                out.append(Token("num", m.group("num"), line, col0 + pos, bool(m.group("imag"))))
            elif m.group("name") is not None:
                out.append(Token("name", m.group("name"), line, col0 + pos))
            else:
                op = m.group("op")
                out.append(Token("op", "^" if op == "**" else op, line, col0 + pos))
        pos = m.end()
    out.append(Token("end", "", line, col0 + len(text)))
    return out


# -- expression trees ------------------------------------------------------------
# Nodes are tuples (kind, token, *children).


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self, text=None, kind=None):
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text or kind
            found = t.text or "end of line"
            raise ProblemSyntaxError(f"expected {want!r}, found {found!r}", t.line, t.col)
        self.i += 1
        return t

    def at(self, text):
        return self.tok.kind == "op" and self.tok.text == text

    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()
            node = ("add" if op.text == "+" else "sub", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take()
            node = ("mul" if op.text == "*" else "div", op, node, self.unary())
        return node

    def unary(self):
        if self.at("-") or self.at("+"):
            op = self.take()
            inner = self.unary()
            return ("neg", op, inner) if op.text == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            op = self.take()
            return ("pow", op, base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return ("num", t)
        if t.kind == "name":
            self.i += 1
            m = _SHIFT_RE.match(t.text)
            if m and self.at("("):
                self.take("(")
                arg = self.take(kind="name")
                if arg.text != "y":
                    raise ProblemSyntaxError("shift operator must be applied to y", arg.line, arg.col)
                self.take(")")
                return ("shift", t, int(m.group(1)))
            return ("name", t)
        if self.at("("):
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        raise ProblemSyntaxError(f"unexpected {t.text or 'end of line'!r}", t.line, t.col)

    def finish(self):
        if self.tok.kind != "end":
            raise ProblemSyntaxError(f"unexpected {self.tok.text!r}", self.tok.line, self.tok.col)


def parse_expression(text, line=1, col0=1):
    p = _Parser(tokenize(text, line, col0))
    node = p.expr()
    p.finish()
    return node


def _err(node, message, cls=ProblemSyntaxError):
    t = node[1]
    return cls(message, t.line, t.col)


def _fraction(tok):
    return Fraction(tok.text)


class _Env:
    """Symbol tables used while evaluating expression trees."""

    def __init__(self, basis, lets=None, params=None, q=None):
        self.basis = basis
        self.mp = get_mp(basis.precision)
        self.lets = lets or {}
        self.params = params or {}
        self.q = q

    # exact linear forms over the basis
    def linear(self, node):
        kind = node[0]
        zero = self.basis.zero()
        if kind == "num":
            v = _fraction(node[1])
            if node[1].imag:
                if "i" not in self.basis.names:
                    raise _err(node, "imaginary exponent needs i in the basis", UndeclaredSymbol)
                return self.basis.unit("i", v)
            return self.basis.rational(v)
        if kind == "name":
            name = node[1].text
            if name in self.lets:
                return self.lets[name]
            if name in self.basis.names:
                return self.basis.unit(name)
            raise _err(node, f"undeclared exponent symbol {name!r}", UndeclaredSymbol)
        if kind == "neg":
            return -self.linear(node[2])
        if kind in ("add", "sub"):
            a, b = self.linear(node[2]), self.linear(node[3])
            return a + b if kind == "add" else a - b
        if kind in ("mul", "div"):
            a, b = self.linear(node[2]), self.linear(node[3])
            sb = self._scalar(b)
            if kind == "div":
                if sb is None or sb == 0:
                    raise _err(node, "exponents may only be divided by a non-zero rational")
                return a.scale(1 / sb)
            sa = self._scalar(a)
            if sa is not None:
                return b.scale(sa)
            if sb is not None:
                return a.scale(sb)
            raise _err(node, "product of two non-rational exponents")
        if kind == "pow":
            a, b = self.linear(node[2]), self.linear(node[3])
            sa, sb = self._scalar(a), self._scalar(b)
            if sa is None or sb is None or sb.denominator != 1:
                raise _err(node, "only rational^integer is allowed inside an exponent")
            if sa == 0 and sb < 0:
                raise _err(node, "division by zero")
            return self.basis.rational(sa ** int(sb))
        if kind == "shift":
            raise _err(node, "the unknown cannot appear in an exponent")
        raise _err(node, "invalid exponent")  # pragma: no cover

    def _scalar(self, ev):
        k = self.basis.index("1")
        if all(c == 0 for j, c in enumerate(ev.coords) if j != k):
            return ev.coords[k]
        return None

    # complex constants
    def const(self, node):
        mp = self.mp
        kind = node[0]
        if kind == "num":
            v = mp.mpf(node[1].text)
            return mp.mpc(0, v) if node[1].imag else mp.mpc(v)
        if kind == "name":
            name = node[1].text
            if name == "q":
                if self.q is None:
                    raise _err(node, "q is not available here", UndeclaredSymbol)
                return self.q
            if name in self.params:
                if self.params[name] is None:
                    raise _err(node, f"parameter {name!r} has no value", UndeclaredSymbol)
                return self.params[name]
            if name in self.lets:
                return numeric_value(self.lets[name], self.basis)
            if name in self.basis.names:
                return self.basis.symbols[self.basis.index(name)].value
            if name in ("i", "pi"):
                return mp.mpc(0, 1) if name == "i" else mp.mpc(mp.pi)
            raise _err(node, f"undeclared symbol {name!r}", UndeclaredSymbol)
        if kind == "neg":
            return -self.const(node[2])
        if kind in ("add", "sub", "mul", "div"):
            a, b = self.const(node[2]), self.const(node[3])
            if kind == "add":
                return a + b
            if kind == "sub":
                return a - b
            if kind == "mul":
                return a * b
            if b == 0:
                raise _err(node, "division by zero")
            return a / b
        if kind == "pow":
            return branch_power(self.const(node[2]), node[3], self)
        raise _err(node, "the unknown cannot appear in a constant")

    def is_const(self, node):
        kind = node[0]
        if kind == "shift":
            return False
        if kind == "name":
            return node[1].text not in ("y", "z")
        if kind == "num":
            return True
        return all(self.is_const(c) for c in node[2:])


def _integer_literal(node, env):
    """The exponent as a Python int when it is an exact integer, else None."""
    try:
        ev = env.linear(node)
    except ProblemSyntaxError:
        return None
    s = env._scalar(ev)
    if s is not None and s.denominator == 1:
        return int(s)
    return None


def branch_power(base, exp_node, env):
    """base**exp with ln(base) taken on the branch 0 <= arg < 2*pi."""
    mp = env.mp
    k = _integer_literal(exp_node, env)
    if k is not None:
        if base == 0 and k < 0:
            raise _err(exp_node, "division by zero")
        return mp.mpc(base) ** k
    e = env.const(exp_node)
    if base == 0:
        if e.real > 0:
            return mp.mpc(0)
        raise _err(exp_node, "0 raised to a power with Re <= 0")
    arg = mp.arg(base)
    if arg < 0:
        arg += 2 * mp.pi
    return mp.exp(e * mp.mpc(mp.log(abs(base)), arg))


# -- polynomial evaluation ----------------------------------------------------------


def _max_shift(node):
    if node[0] == "shift":
        return node[2]
    if node[0] in ("num", "name"):
        return 0
    return max(_max_shift(c) for c in node[2:])


class _PolyEval:
    def __init__(self, env, n):
        self.env = env
        self.n = n
        self.basis = env.basis

    def one(self, coeff=1):
        return {(self.basis.zero(), (0,) * (self.n + 1)): self.env.mp.mpc(coeff)}

    def add(self, a, b, sign=1):
        out = dict(a)
        for k, v in b.items():
            out[k] = out.get(k, 0) + sign * v
        return {k: v for k, v in out.items() if v != 0}

    def mul(self, a, b):
        out = {}
        for (al, pa), ca in a.items():
            for (bl, pb), cb in b.items():
                key = (al + bl, tuple(x + y for x, y in zip(pa, pb)))
                out[key] = out.get(key, 0) + ca * cb
        return {k: v for k, v in out.items() if v != 0}

    def eval(self, node):
        env = self.env
        kind = node[0]
        if env.is_const(node):
            return {k: v for k, v in self.one(env.const(node)).items() if v != 0}
        if kind == "name":
            name = node[1].text
            if name == "z":
                return {(self.basis.rational(1), (0,) * (self.n + 1)): env.mp.mpc(1)}
            powers = [0] * (self.n + 1)
            powers[0] = 1
            return {(self.basis.zero(), tuple(powers)): env.mp.mpc(1)}
        if kind == "shift":
            powers = [0] * (self.n + 1)
            powers[node[2]] = 1
            return {(self.basis.zero(), tuple(powers)): env.mp.mpc(1)}
        if kind == "neg":
            return {k: -v for k, v in self.eval(node[2]).items()}
        if kind in ("add", "sub"):
            return self.add(self.eval(node[2]), self.eval(node[3]), 1 if kind == "add" else -1)
        if kind == "mul":
            return self.mul(self.eval(node[2]), self.eval(node[3]))
        if kind == "div":
            if not env.is_const(node[3]):
                raise _err(node, "division by a non-constant expression")
            d = env.const(node[3])
            if d == 0:
                raise _err(node, "division by zero")
            return {k: v / d for k, v in self.eval(node[2]).items()}
        if kind == "pow":
            base = node[2]
            if base[0] == "name" and base[1].text == "z":
                alpha = env.linear(node[3])
                return {(alpha, (0,) * (self.n + 1)): env.mp.mpc(1)}
            k = _integer_literal(node[3], env)
            if k is None or k < 0:
                raise _err(node, "the unknown may only be raised to a non-negative integer power")
            inner = self.eval(base)
            out = self.one()
            for _ in range(k):
                out = self.mul(out, inner)
            return out
        raise _err(node, "invalid expression")  # pragma: no cover


# -- problem files -------------------------------------------------------------------


@dataclass(frozen=True)
class SeedTerm:
    """Leading term ``value * z**exponent``; ``value`` is None while unknown."""

    exponent: ExponentVector
    value: object = None
    name: str = None


@dataclass(frozen=True)
class ProblemFile:
    ctx: QContext
    equation: QDifferenceEquation
    seed: tuple
    parameters: dict = field(default_factory=dict)
    lets: dict = field(default_factory=dict)
    reduce_at: int = 0
    declared_order: int = None
    generators: tuple = None

    @property
    def basis(self):
        return self.equation.basis

    @property
    def precision(self):
        return self.ctx.precision


_DIRECTIVE_RE = re.compile(r"^\s*(?P<key>[A-Za-z_][A-Za-z0-9_]*)(?P<rest>.*)$")

_ORDERED_KEYS = ("precision", "basis", "let", "param", "q", "order", "eq", "seed", "reduce_at", "generators")


def _split_lines(text):
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _DIRECTIVE_RE.match(line)
        if not m:
            raise ProblemSyntaxError("expected a directive", lineno, 1)
        key = m.group("key")
        if key not in _ORDERED_KEYS:
            raise ProblemSyntaxError(f"unknown directive {key!r}", lineno, m.start("key") + 1)
        rest = m.group("rest")
        col = m.start("rest") + 1
        entries.append((key, rest, lineno, col))
    return entries


def _after(rest, sep, lineno, col):
    """Text after the leading separator ``sep`` and its column."""
    stripped = rest.lstrip()
    col += len(rest) - len(stripped)
    if not stripped.startswith(sep):
        raise ProblemSyntaxError(f"expected {sep!r}", lineno, col)
    return stripped[len(sep):], col + len(sep)


def _parse_basis(rest, lineno, col, precision, independent):
    body, col = _after(rest, "=", lineno, col)
    toks = tokenize(body, lineno, col)
    p = _Parser(toks)
    p.take("[")
    entries = []
    while True:
        t = p.tok
        if t.kind == "num" and t.text == "1" and not t.imag:
            p.take()
            entries.append("1")
        else:
            name = p.take(kind="name").text
            if p.at(":"):
                p.take(":")
                node = p.expr()
                env = _Env(QBasis.build(["1"], precision))
                try:
                    value = env.const(node)
                except ProblemSyntaxError as exc:
                    raise ProblemSyntaxError(f"basis value: {exc}", t.line, t.col) from None
                entries.append((name, value))
            else:
                entries.append(name)
        if p.at(","):
            p.take(",")
            continue
        p.take("]")
        break
    p.finish()
    try:
        return QBasis.build(entries, precision, independent)
    except InvalidBasis as exc:
        raise InvalidBasis(f"line {lineno}: {exc}") from None


def _seed_terms(node, env, pending):
    """Flatten a seed expression into SeedTerm values."""
    terms = []

    def walk(n, sign):
        if n[0] == "add":
            walk(n[2], sign)
            walk(n[3], sign)
        elif n[0] == "sub":
            walk(n[2], sign)
            walk(n[3], -sign)
        elif n[0] == "neg":
            walk(n[2], -sign)
        else:
            terms.append((sign, n))

    walk(node, 1)
    out = []
    for sign, t in terms:
        factors = []

        def flat(n):
            if n[0] == "mul":
                flat(n[2])
                flat(n[3])
            else:
                factors.append(n)

        flat(t)
        exponent = env.basis.zero()
        value = env.mp.mpc(sign)
        name = None
        for f in factors:
            if f[0] == "name" and f[1].text == "z":
                exponent = exponent + env.basis.rational(1)
            elif f[0] == "pow" and f[2][0] == "name" and f[2][1].text == "z":
                exponent = exponent + env.linear(f[3])
            elif f[0] == "name" and f[1].text in pending:
                if name is not None:
                    raise _err(f, "a seed term may contain one unknown coefficient")
                name = f[1].text
            elif env.is_const(f):
                value *= env.const(f)
            else:
                raise _err(f, "seed terms have the form coefficient*z^(exponent)")
        if name is not None:
            if value != 1:
                raise _err(t, "a named seed coefficient must appear without a numeric factor")
            out.append(SeedTerm(exponent, env.params.get(name), name))
        else:
            out.append(SeedTerm(exponent, value, None))
    return out


def parse_problem(text, precision=None, params=None):
    """Parse problem-file text.

    ``precision`` overrides the file's ``precision`` directive and ``params``
    (name -> number) overrides or adds ``param`` values.
    """
    entries = _split_lines(text)
    by_key = {}
    for key, rest, lineno, col in entries:
        if key not in ("let", "param") and key in by_key:
            raise ProblemSyntaxError(f"duplicate directive {key!r}", lineno, 1)
        by_key.setdefault(key, []).append((rest, lineno, col))
    for key in ("q", "eq"):
        if key not in by_key:
            raise ProblemSyntaxError(f"missing directive {key!r}", len(text.splitlines()) or 1, 1)

    prec = DEFAULT_PRECISION
    if "precision" in by_key:
        rest, lineno, col = by_key["precision"][0]
        body, col = _after(rest, "=", lineno, col)
        try:
            prec = int(body.strip())
        except ValueError:
            raise ProblemSyntaxError("precision must be an integer", lineno, col) from None
        if prec < 32:
            raise ProblemSyntaxError("precision must be at least 32 bits", lineno, col)
    if precision is not None:
        prec = int(precision)
    mp = get_mp(prec)

    if "basis" in by_key:
        rest, lineno, col = by_key["basis"][0]
        basis = _parse_basis(rest, lineno, col, prec, False)
    else:
        basis = QBasis.build(["1"], prec)

    env = _Env(basis)
    lets = {}
    for rest, lineno, col in by_key.get("let", []):
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*", rest)
        if not m:
            raise ProblemSyntaxError("expected a name after let", lineno, col)
        name = m.group(1)
        if name in basis.names or name in ("q", "y", "z", "i") or name in lets:
            raise ProblemSyntaxError(f"cannot redefine {name!r}", lineno, col + m.start(1))
        body, bcol = _after(rest[m.end():], "=", lineno, col + m.end())
        lets[name] = env.linear(parse_expression(body, lineno, bcol))
    env.lets = lets

    param_values = {}
    for rest, lineno, col in by_key.get("param", []):
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*", rest)
        if not m:
            raise ProblemSyntaxError("expected a name after param", lineno, col)
        name = m.group(1)
        if is_reserved(name) or name in basis.names or name in lets or name in ("q", "y", "z"):
            raise ProblemSyntaxError(f"cannot use {name!r} as a parameter", lineno, col + m.start(1))
        body, bcol = _after(rest[m.end():], "=", lineno, col + m.end())
        param_values[name] = env.const(parse_expression(body, lineno, bcol))
    for name, value in (params or {}).items():
        param_values[name] = mp.mpc(value)
    env.params = dict(param_values)

    rest, lineno, col = by_key["q"][0]
    body, bcol = _after(rest, "=", lineno, col)
    q = env.const(parse_expression(body, lineno, bcol))
    try:
        ctx = QContext.from_q(q, prec)
    except ValueError as exc:
        raise ProblemSyntaxError(str(exc), lineno, bcol) from None
    env.q = ctx.q

    declared = None
    if "order" in by_key:
        rest, lineno, col = by_key["order"][0]
        body, bcol = _after(rest, "=", lineno, col)
        try:
            declared = int(body.strip())
        except ValueError:
            raise ProblemSyntaxError("order must be an integer", lineno, bcol) from None

    rest, lineno, col = by_key["eq"][0]
    body, bcol = _after(rest, ":", lineno, col)
    if body.count("=") != 1:
        raise ProblemSyntaxError("equation needs exactly one '='", lineno, bcol)
    lhs_text, rhs_text = body.split("=")
    lhs = parse_expression(lhs_text, lineno, bcol)
    rhs = parse_expression(rhs_text, lineno, bcol + len(lhs_text) + 1)
    n = max(_max_shift(lhs), _max_shift(rhs), declared or 0)
    ev = _PolyEval(env, n)
    poly = ev.add(ev.eval(lhs), ev.eval(rhs), -1)
    terms = [(c, a, p) for (a, p), c in poly.items()]
    try:
        equation = QDifferenceEquation.from_terms(n, terms, basis)
    except DegenerateEquation as exc:
        raise DegenerateEquation(str(exc), lineno, bcol) from None

    seed = ()
    if "seed" in by_key:
        rest, lineno, col = by_key["seed"][0]
        body, bcol = _after(rest, ":", lineno, col)
        node = parse_expression(body, lineno, bcol)
        pending = _seed_names(node, env)
        seed = tuple(_seed_terms(node, env, pending))
        for name in pending:
            param_values.setdefault(name, None)
    reduce_at = 0
    if "reduce_at" in by_key:
        rest, lineno, col = by_key["reduce_at"][0]
        body, bcol = _after(rest, "=", lineno, col)
        try:
            reduce_at = int(body.strip())
        except ValueError:
            raise ProblemSyntaxError("reduce_at must be an integer", lineno, bcol) from None

    generators = None
    if "generators" in by_key:
        rest, lineno, col = by_key["generators"][0]
        body, bcol = _after(rest, "=", lineno, col)
        p = _Parser(tokenize(body, lineno, bcol))
        p.take("[")
        gens = [env.linear(p.expr())]
        while p.at(","):
            p.take(",")
            gens.append(env.linear(p.expr()))
        p.take("]")
        p.finish()
        generators = tuple(gens)

    return ProblemFile(ctx, equation, seed, param_values, lets, reduce_at, declared, generators)


def _seed_names(node, env):
    """Coefficient names in a seed: every name that is not a known symbol."""
    builtin = {"z", "q", "i", "pi"} | set(env.basis.names) | set(env.lets)
    names = []
    for t in _named_factors(node):
        if t not in builtin and t not in names:
            names.append(t)
    return names


def _named_factors(node):
    out = []
    if node[0] == "name":
        out.append(node[1].text)
    elif node[0] in ("add", "sub", "mul"):
        for c in node[2:]:
            out.extend(_named_factors(c))
    elif node[0] == "neg":
        out.extend(_named_factors(node[2]))
    elif node[0] == "shift":
        raise _err(node, "the unknown cannot appear in a seed")
    return out


def read_problem(path, precision=None, params=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileMissing(f"cannot read problem file {path}: {exc.strerror}") from None
    return parse_problem(text, precision, params)


def render_problem(problem):
    """Problem-file text that parses back to an equal :class:`ProblemFile`."""
    basis = problem.basis
    mp = get_mp(problem.precision)
    lines = [f"precision = {problem.precision}"]
    items = []
    for s in basis.symbols:
        if s.tag == "parameter":
            items.append(f"{s.name}:{format_coefficient(s.value, mp)}")
        else:
            items.append(s.name)
    lines.append("basis = [" + ", ".join(items) + "]")
    for name, ev in problem.lets.items():
        lines.append(f"let {name} = {format_exponent(ev, basis)}")
    for name, value in problem.parameters.items():
        if value is not None:
            lines.append(f"param {name} = {format_coefficient(value, mp)}")
    lines.append(f"q = {format_coefficient(problem.ctx.q, mp)}")
    if problem.declared_order is not None:
        lines.append(f"order = {problem.declared_order}")
    lines.append(f"eq: {render_polynomial(problem.equation)} = 0")
    if problem.seed:
        parts = []
        for t in problem.seed:
            z = f"z^({format_exponent(t.exponent, basis)})"
            if t.name is not None:
                parts.append(f"{t.name}*{z}")
            else:
                parts.append(f"{format_coefficient(t.value, mp)}*{z}")
        lines.append("seed: " + " + ".join(parts))
    lines.append(f"reduce_at = {problem.reduce_at}")
    if problem.generators is not None:
        gens = ", ".join(format_exponent(g, basis) for g in problem.generators)
        lines.append(f"generators = [{gens}]")
    return "\n".join(lines) + "\n"
