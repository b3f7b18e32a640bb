"""Text DSL for expressions, PDE systems and vector fields.

Grammar::

    system   := "system" IDENT "{" stmt* "}"
    stmt     := "eq" ":" expr "=" expr ";"
              | "dep" IDENT ("," IDENT)* ";"        # declare dependents
              | "indep" INT ";"                     # number of x variables
              | "lead" ":" jetref ("," jetref)* ";" # solved-form pivots
    field    := ["field"] IDENT "=" expr ";"?       # expr linear in d/dx<i>, d/d<dep>
    expr     := usual + - * / ^ precedence, integer literals, parentheses,
                dt(.) dx1(.) dx2(.) dx3(.) dot(A,B) cross(A,B,k) div(A) curl(A,k)

``dt``/``dxk`` of a dependent is a jet variable; of any jet-free expression
it is the total derivative.  ``A``, ``B`` in vector forms are names whose
components ``A1..A3`` are dependents (E, H, v).  Comments run from ``#``
to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import expr as ex
from .errors import JetOrderError, ParseError
from .expr import (
    KIND_BASIS,
    KIND_JET,
    ONE,
    ZERO,
    Polynomial,
    RationalFunction,
    as_rational,
    basis_symbol,
    basis_target,
    kind,
    var_name,
)
from .model import EH_SPACE, JetSpace, PdeSystem, VectorField, levi_civita, to_solved_form

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<dop>d/d[A-Za-z_][A-Za-z_0-9]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),=;:{}])
    """,
    re.VERBOSE,
)

_JETFUNCS = {"dt": 0, "dx1": 1, "dx2": 2, "dx3": 3}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        k = m.lastgroup
        if k == "nl":
            line += 1
            start = m.end()
        elif k not in ("ws", "comment"):
            toks.append(Tok(k, m.group(), line, m.start() - start + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, space: JetSpace, params=(), allow_dops=False):
        self.toks = tokenize(text)
        self.i = 0
        self.space = space
        self.params = set(params)
        self.allow_dops = allow_dops
        self._set_space(space)

    def _set_space(self, space):
        self.space = space
        self.deps = {n: ex.dep(n) for n in space.dependents}

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, expected=()):
        t = self.tok
        raise ParseError(msg, t.line, t.col, expected)

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            got = self.tok.text or "end of input"
            self.error(f"unexpected {got!r}", [repr(text)])

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["identifier"])
        t = self.tok.text
        self.i += 1
        return t

    def integer(self) -> int:
        if self.tok.kind != "num":
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["integer"])
        v = int(self.tok.text)
        self.i += 1
        return v

    # -- expressions -----------------------------------------------------
    def expr(self):
        neg = False
        if self.accept("-"):
            neg = True
        elif self.accept("+"):
            pass
        v = self.term()
        if neg:
            v = -v
        while True:
            if self.accept("+"):
                v = v + self.term()
            elif self.accept("-"):
                v = v - self.term()
            else:
                return v

    def term(self):
        v = self.factor()
        while True:
            if self.accept("*"):
                v = v * self.factor()
            elif self.tok.text == "/" and self.tok.kind == "op":
                t = self.tok
                self.i += 1
                d = self.factor()
                if isinstance(d, Polynomial) and d.is_constant():
                    if d.is_zero():
                        raise ParseError("division by zero", t.line, t.col)
                    v = v / d.constant_value()
                else:
                    v = as_rational(v) / d
            else:
                return _simplify(v)

    def factor(self):
        base = self.unary()
        if self.accept("^"):
            neg = self.accept("-")
            if neg:
                self.error("negative exponent", ["nonnegative integer"])
            n = self.integer()
            base = base ** n
        return base

    def unary(self):
        if self.accept("-"):
            return -self.unary()
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Polynomial.const(int(t.text))
        if t.kind == "dop":
            if not self.allow_dops:
                self.error("operator symbol outside a vector field", ["expression"])
            self.i += 1
            target = t.text[3:]
            m = re.fullmatch(r"x(\d+)", target)
            if m and int(m.group(1)) < self.space.n_independent:
                code = ex.x(int(m.group(1)))
            elif target in self.deps:
                code = self.deps[target]
            else:
                raise ParseError(f"unknown coordinate in {t.text!r}", t.line, t.col,
                                 [f"d/dx{k}" for k in range(self.space.n_independent)]
                                 + [f"d/d{n}" for n in self.deps])
            return Polynomial.var(basis_symbol(code))
        if self.accept("("):
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "ident":
            name = t.text
            if self.toks[self.i + 1].text == "(" and name in _FUNCS:
                self.i += 2
                v = _FUNCS[name](self)
                self.expect(")")
                return v
            self.i += 1
            return self.variable(name, t)
        self.error(f"unexpected {t.text or 'end of input'!r}", ["number", "identifier", "'('"])

    def variable(self, name, t):
        m = re.fullmatch(r"x(\d+)", name)
        if m and int(m.group(1)) < self.space.n_independent:
            return Polynomial.var(ex.x(int(m.group(1))))
        if name in self.deps:
            return Polynomial.var(self.deps[name])
        if name in self.params:
            return Polynomial.var(ex.param(name))
        m = re.fullmatch(r"c(\d+)", name)
        if m:
            return Polynomial.var(ex.coef(int(m.group(1))))
        expected = [f"x{k}" for k in range(self.space.n_independent)] + list(self.deps) + sorted(self.params)
        raise ParseError(f"unknown identifier {name!r}", t.line, t.col, expected)

    def vector(self):
        t = self.tok
        name = self.ident()
        comps = [f"{name}{k}" for k in (1, 2, 3)]
        if not all(c in self.deps for c in comps):
            raise ParseError(f"{name!r} is not a vector of dependents", t.line, t.col,
                             sorted({n[:-1] for n in self.deps if n[-1:] in "123"}))
        return [Polynomial.var(self.deps[c]) for c in comps]

    def component(self) -> int:
        t = self.tok
        k = self.integer()
        if k not in (1, 2, 3):
            raise ParseError("vector component must be 1, 2 or 3", t.line, t.col, ["1", "2", "3"])
        return k


def _simplify(v):
    if isinstance(v, RationalFunction):
        return v.simplify()
    return v


def _jet_func(mu):
    def f(p: _Parser):
        t = p.tok
        if mu >= p.space.n_independent:
            raise ParseError(f"no independent variable x{mu}", t.line, t.col)
        arg = p.expr()
        if isinstance(arg, Polynomial) and len(arg.terms) == 1:
            (m, c), = arg.terms.items()
            if c == 1 and len(m) == 1 and kind(m[0]) == ex.KIND_U:
                return Polynomial.var(ex.jet(m[0], mu))
        try:
            if isinstance(arg, RationalFunction):
                n, d = arg.num.total_derivative(mu), arg.den.total_derivative(mu)
                return RationalFunction(n * arg.den - arg.num * d, arg.den * arg.den)
            return arg.total_derivative(mu)
        except JetOrderError as e:
            raise ParseError(str(e), t.line, t.col) from None
    return f


def _dot(p):
    a = p.vector()
    p.expect(",")
    b = p.vector()
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(p):
    a = p.vector()
    p.expect(",")
    b = p.vector()
    p.expect(",")
    k = p.component()
    return cross(a, b)[k - 1]


def _div(p):
    a = p.vector()
    return sum((c.total_derivative(k + 1) for k, c in enumerate(a)), ZERO)


def _curl(p):
    a = p.vector()
    p.expect(",")
    k = p.component()
    return curl(a)[k - 1]


_FUNCS = {**{n: _jet_func(mu) for n, mu in _JETFUNCS.items()},
          "dot": _dot, "cross": _cross, "div": _div, "curl": _curl}


def cross(a, b):
    return [sum((levi_civita(k, l, n) * a[l - 1] * b[n - 1] for l in (1, 2, 3) for n in (1, 2, 3)), ZERO)
            for k in (1, 2, 3)]


def curl(a):
    """Components of curl of a vector of jet-free expressions."""
    return [sum((levi_civita(k, l, n) * a[n - 1].total_derivative(l) for l in (1, 2, 3) for n in (1, 2, 3)), ZERO)
            for k in (1, 2, 3)]


# -- public parsing API ---------------------------------------------------

def parse_expr(text: str, space: JetSpace = EH_SPACE, params=()):
    """Parse one expression into a Polynomial or RationalFunction."""
    p = _Parser(text, space, params)
    v = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}", ["operator", "end of input"])
    return _simplify(v)


def _lower_field(p: _Parser, poly, name, t) -> VectorField:
    if isinstance(poly, RationalFunction):
        raise ParseError("vector field coefficients must be polynomial", t.line, t.col)
    coeffs: dict[int, dict] = {}
    for m, c in poly.terms.items():
        ops = [v for v in m if kind(v) == KIND_BASIS]
        if len(ops) != 1:
            raise ParseError("each term of a vector field needs exactly one d/d symbol", t.line, t.col,
                             ["d/dx<i>", "d/d<dependent>"])
        rest = tuple(v for v in m if kind(v) != KIND_BASIS)
        if any(kind(v) == KIND_JET for v in rest):
            raise ParseError("vector field coefficients must not contain jet variables", t.line, t.col)
        coeffs.setdefault(basis_target(ops[0]), {})[rest] = c
    return VectorField.from_dict({v: Polynomial(d) for v, d in coeffs.items()}, p.space, name)


def _field_stmt(p: _Parser) -> VectorField:
    p.accept("field")
    t = p.tok
    name = p.ident()
    p.expect("=")
    t = p.tok
    p.allow_dops = True
    poly = p.expr()
    p.allow_dops = False
    p.accept(";")
    return _lower_field(p, poly, name, t)


def parse_vecfield(text: str, space: JetSpace = EH_SPACE) -> VectorField:
    fields = parse_fields(text, space)
    if len(fields) != 1:
        raise ParseError(f"expected one vector field, found {len(fields)}")
    return fields[0]


def parse_fields(text: str, space: JetSpace = EH_SPACE) -> list[VectorField]:
    p = _Parser(text, space)
    out = []
    while p.tok.kind != "eof":
        out.append(_field_stmt(p))
    return out


def parse_system(text: str, space: JetSpace | None = None) -> PdeSystem:
    p = _Parser(text, space or JetSpace(4, ()))
    p.expect("system")
    name = p.ident()
    p.expect("{")
    n_indep = p.space.n_independent
    deps: list[str] = list(p.space.dependents)
    eqs: list = []
    lead_text: list[tuple] = []
    declared = space is not None
    while not p.accept("}"):
        t = p.tok
        if p.accept("dep"):
            while True:
                deps.append(p.ident())
                if not p.accept(","):
                    break
            p.expect(";")
            p._set_space(JetSpace(n_indep, tuple(deps)))
            declared = True
        elif p.accept("indep"):
            n_indep = p.integer()
            p.expect(";")
            p._set_space(JetSpace(n_indep, tuple(deps)))
        elif p.accept("eq"):
            if not declared:
                p._set_space(JetSpace(n_indep, tuple(deps) or EH_SPACE.dependents))
                deps = list(p.space.dependents)
                declared = True
            p.expect(":")
            lhs = p.expr()
            p.expect("=")
            rhs = p.expr()
            p.expect(";")
            e = _simplify(as_rational(lhs) - as_rational(rhs))
            if isinstance(e, RationalFunction):
                e = e.num
            if e.is_zero():
                raise ParseError("equation is identically zero", t.line, t.col)
            eqs.append(e)
        elif p.accept("lead"):
            p.expect(":")
            while True:
                lt = p.tok
                v = p.expr()
                if not (isinstance(v, Polynomial) and len(v.terms) == 1
                        and next(iter(v.terms.items()))[1] == 1
                        and len(next(iter(v.terms))) == 1 and kind(next(iter(v.terms))[0]) == KIND_JET):
                    raise ParseError("lead entries must be jet variables", lt.line, lt.col, ["dt(u)", "dxk(u)"])
                lead_text.append(next(iter(v.terms))[0])
                if not p.accept(","):
                    break
            p.expect(";")
        else:
            p.error(f"unexpected {t.text or 'end of input'!r}", ["eq", "dep", "indep", "lead", "'}'"])
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}", ["end of input"])
    sys = PdeSystem(p.space, tuple(eqs), name=name)
    if lead_text:
        sys = to_solved_form(sys, lead_text)
    return sys


# -- printing -------------------------------------------------------------

def print_expr(e) -> str:
    return str(e)


def _wrap(p: Polynomial) -> str:
    s = str(p)
    return f"({s})" if len(p.terms) > 1 else s


def print_vecfield(X: VectorField, name: str | None = None) -> str:
    name = name or X.name or "X"
    parts = []
    for v, c in zip(X.space.point_vars(), X.components):
        if c.is_zero():
            continue
        op = "d/d" + var_name(v)
        neg = False
        if len(c.terms) == 1:
            (m, k), = c.terms.items()
            if k < 0:
                neg, c = True, -c
        body = op if c == ONE else f"{_wrap(c)}*{op}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return f"field {name} = {' '.join(parts) if parts else '0*d/dx0'};"


def print_fields(fields) -> str:
    return "\n".join(print_vecfield(f) for f in fields) + "\n"


def print_system(sys: PdeSystem) -> str:
    lines = [f"system {sys.name} {{"]
    if sys.jet.n_independent != 4:
        lines.append(f"  indep {sys.jet.n_independent};")
    lines.append(f"  dep {', '.join(sys.jet.dependents)};")
    for e in sys.equations:
        lines.append(f"  eq: {e} = 0;")
    if sys.leading:
        lines.append(f"  lead: {', '.join(var_name(v) for v in sys.leading)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
