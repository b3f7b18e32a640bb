"""Exact multivariate polynomials and rational functions over Q.

Variables are small integers ("codes") whose high bits carry the variable
kind, so sorting codes sorts by ``(kind, index)``:

    kind 0  independent x_mu           payload mu
    kind 1  dependent u^a              payload = interned name index
    kind 2  first-order jet u^a_mu     payload = (name index << 4) | mu
    kind 3  unknown coefficient c_i    payload i
    kind 4  parameter (theta, ...)     payload = interned name index
    kind 5  formal basis symbol d/dv   payload = code of v (parser only)

A monomial is a sorted tuple of codes with repetition, e.g. E1^2*H2 is
``(E1, E1, H2)``.  Coefficients are ``int`` when integral and
``Fraction`` otherwise.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import groupby
from numbers import Rational as _RationalABC

from .errors import DenominatorZero, JetOrderError, MissingVariable

KIND_X, KIND_U, KIND_JET, KIND_COEF, KIND_PARAM, KIND_BASIS = range(6)
KIND_NAMES = ("independent", "dependent", "jet", "coefficient", "parameter", "basis")
_SHIFT = 24
_MASK = (1 << _SHIFT) - 1

_dep_names: list[str] = []
_dep_index: dict[str, int] = {}
_param_names: list[str] = []
_param_index: dict[str, int] = {}


def _intern(name, names, index):
    i = index.get(name)
    if i is None:
        i = len(names)
        names.append(name)
        index[name] = i
    return i


for _n in ("E1", "E2", "E3", "H1", "H2", "H3", "v1", "v2", "v3", "u"):
    _intern(_n, _dep_names, _dep_index)
for _n in ("theta", "c", "s"):
    _intern(_n, _param_names, _param_index)


def x(mu: int) -> int:
    if not 0 <= mu < 16:
        raise ValueError(f"independent index out of range: {mu}")
    return mu


def dep(name: str) -> int:
    return (KIND_U << _SHIFT) | _intern(name, _dep_names, _dep_index)


def jet(u: int | str, mu: int) -> int:
    if isinstance(u, str):
        u = dep(u)
    if kind(u) != KIND_U:
        raise JetOrderError(f"jets are defined for dependent variables only, got {var_name(u)}")
    return (KIND_JET << _SHIFT) | ((u & _MASK) << 4) | mu


def coef(i: int) -> int:
    return (KIND_COEF << _SHIFT) | i


def param(name: str) -> int:
    return (KIND_PARAM << _SHIFT) | _intern(name, _param_names, _param_index)


def basis_symbol(v: int) -> int:
    # only independents and dependents get a d/dv symbol; payload packs the kind
    return (KIND_BASIS << _SHIFT) | (kind(v) << 20) | (v & 0xFFFFF)


def basis_target(b: int) -> int:
    return (((b >> 20) & 0xF) << _SHIFT) | (b & 0xFFFFF)


def kind(code: int) -> int:
    return code >> _SHIFT


def jet_parts(code: int) -> tuple[int, int]:
    """Split a jet code into ``(dependent code, mu)``."""
    p = code & _MASK
    return (KIND_U << _SHIFT) | (p >> 4), p & 0xF


def is_dependent_name(name: str) -> bool:
    return name in _dep_index


def var_name(code: int) -> str:
    k = kind(code)
    p = code & _MASK
    if k == KIND_X:
        return f"x{p}"
    if k == KIND_U:
        return _dep_names[p]
    if k == KIND_JET:
        u, mu = jet_parts(code)
        return f"{'dt' if mu == 0 else f'dx{mu}'}({_dep_names[u & _MASK]})"
    if k == KIND_COEF:
        return f"c{p}"
    if k == KIND_PARAM:
        return _param_names[p]
    if k == KIND_BASIS:
        return "d/d" + var_name(basis_target(code))
    raise ValueError(f"bad variable code {code}")


def _q(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


def _as_scalar(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return _q(v)
    if isinstance(v, _RationalABC):
        return _q(Fraction(v.numerator, v.denominator))
    return None


def _mono_str(m) -> str:
    parts = []
    for c, grp in groupby(m):
        e = sum(1 for _ in grp)
        parts.append(var_name(c) if e == 1 else f"{var_name(c)}^{e}")
    return "*".join(parts)


def _coef_str(c) -> str:
    return str(c)


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients.

    Two polynomials are equal exactly when their term maps are identical,
    which is the canonical form.
    """

    __slots__ = ("_t", "_h")

    def __init__(self, terms=None):
        # trusted constructor: callers guarantee no zero coefficients
        self._t = terms if terms is not None else {}
        self._h = None

    @classmethod
    def from_terms(cls, terms) -> Polynomial:
        out = {}
        for m, c in terms.items() if hasattr(terms, "items") else terms:
            m = tuple(sorted(m))
            c = out.get(m, 0) + c
            if c:
                out[m] = _q(c)
            else:
                out.pop(m, None)
        return cls(out)

    @classmethod
    def const(cls, c) -> Polynomial:
        c = _as_scalar(c)
        return cls({(): c} if c else {})

    @classmethod
    def var(cls, code: int) -> Polynomial:
        return cls({(code,): 1})

    # -- basic views -----------------------------------------------------
    @property
    def terms(self):
        return self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and () in self._t)

    def constant_value(self):
        return self._t.get((), 0)

    def variables(self) -> frozenset:
        return frozenset(c for m in self._t for c in m)

    def degree(self, only=None) -> int:
        """Total degree, optionally counting only variables of kinds in ``only``."""
        if not self._t:
            return -1
        if only is None:
            return max(len(m) for m in self._t)
        return max(sum(1 for c in m if kind(c) in only) for m in self._t)

    def has_kind(self, k: int) -> bool:
        return any(kind(c) == k for m in self._t for c in m)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._t == other._t
        if isinstance(other, RationalFunction):
            return other == self
        s = _as_scalar(other)
        if s is not None:
            return self._t == ({(): s} if s else {})
        return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        s = _as_scalar(other)
        if s is not None:
            return Polynomial.const(s)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o._t:
            return self
        if not self._t:
            return o
        out = dict(self._t)
        for m, c in o._t.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = _q(v)
            else:
                del out[m]
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self._t.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, s) -> Polynomial:
        s = _as_scalar(s)
        if not s:
            return Polynomial()
        if s == 1:
            return self
        return Polynomial({m: _q(c * s) for m, c in self._t.items()})

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._t, o._t
        if not a or not b:
            return Polynomial()
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mb, cb), = b.items()
            if not mb:
                return self.scale(cb) if a is self._t else o.scale(cb)
            return Polynomial({tuple(sorted(m + mb)): _q(c * cb) for m, c in a.items()})
        out = {}
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = tuple(sorted(ma + mb))
                v = out.get(m, 0) + ca * cb
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Polynomial({m: _q(c) for m, c in out.items()})

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponent must be a nonnegative integer")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        s = _as_scalar(other)
        if s is not None:
            if not s:
                raise DenominatorZero("division by zero constant")
            return self.scale(Fraction(1, 1) / s)
        if isinstance(other, (Polynomial, RationalFunction)):
            return RationalFunction(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        s = _as_scalar(other)
        if s is None:
            return NotImplemented
        return RationalFunction(Polynomial.const(s), self)

    # -- calculus --------------------------------------------------------
    def diff(self, v: int) -> Polynomial:
        out = {}
        for m, c in self._t.items():
            k = m.count(v)
            if k:
                i = m.index(v)
                out[m[:i] + m[i + 1:]] = _q(c * k)
        return Polynomial(out)

    def total_derivative(self, alpha: int) -> Polynomial:
        """D_alpha = d/dx_alpha + sum_a u^a_alpha d/du^a on a function of (x, u)."""
        out: dict = {}
        for m, c in self._t.items():
            for v, k in Counter(m).items():
                kv = kind(v)
                if kv == KIND_JET:
                    raise JetOrderError("total derivative of a jet expression would need second-order jets")
                if kv == KIND_X:
                    if v != alpha:
                        continue
                    extra = None
                elif kv == KIND_U:
                    extra = jet(v, alpha)
                else:
                    continue
                i = m.index(v)
                nm = m[:i] + m[i + 1:]
                if extra is not None:
                    nm = tuple(sorted(nm + (extra,)))
                val = out.get(nm, 0) + c * k
                if val:
                    out[nm] = val
                else:
                    del out[nm]
        return Polynomial({m: _q(c) for m, c in out.items()})

    # -- substitution / evaluation ----------------------------------------
    def subs(self, sigma, homogenize=None) -> RationalFunction | Polynomial:
        return substitute(self, sigma, homogenize)

    def eval(self, point):
        total = 0
        for m, c in self._t.items():
            t = c
            for v in m:
                try:
                    t = t * point[v]
                except KeyError:
                    raise MissingVariable(f"no value for {var_name(v)}") from None
            total = total + t
        return _q(total) if isinstance(total, Fraction) else total

    def collect(self, split) -> dict:
        """Group terms by their monomial in the ``split`` variables."""
        split = frozenset(split)
        groups: dict = {}
        for m, c in self._t.items():
            key = tuple(v for v in m if v in split)
            rest = tuple(v for v in m if v not in split)
            groups.setdefault(key, {})[rest] = c
        return {k: Polynomial(v) for k, v in groups.items()}

    def coefficient_items(self):
        return self._t.items()

    # -- printing --------------------------------------------------------
    def sorted_terms(self):
        return sorted(self._t.items(), key=lambda mc: (-len(mc[0]), mc[0]))

    def __str__(self):
        if not self._t:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            neg = c < 0
            a = -c if neg else c
            if not m:
                body = _coef_str(a)
            elif a == 1:
                body = _mono_str(m)
            else:
                body = f"{_coef_str(a)}*{_mono_str(m)}"
            if not pieces:
                pieces.append(f"-{body}" if neg else body)
            else:
                pieces.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"Polynomial({self})"


ZERO = Polynomial()
ONE = Polynomial.const(1)


def _poly(v) -> Polynomial:
    if isinstance(v, Polynomial):
        return v
    s = _as_scalar(v)
    if s is None:
        raise TypeError(f"cannot convert {type(v).__name__} to Polynomial")
    return Polynomial.const(s)


class RationalFunction:
    """Quotient of two polynomials.

    Never reduced by a GCD; equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _poly(num)
        den = ONE if den is None else _poly(den)
        if den.is_zero():
            raise DenominatorZero("rational function with zero denominator")
        if den.is_constant() and den.constant_value() != 1:
            num = num.scale(Fraction(1) / den.constant_value())
            den = ONE
        self.num = num
        self.den = den

    __hash__ = None

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise ValueError("rational function has a nonconstant denominator")
        return self.num

    def simplify(self):
        """Polynomial if the denominator is constant, otherwise self."""
        return self.num if self.is_polynomial() else self

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    def has_kind(self, k) -> bool:
        return self.num.has_kind(k) or self.den.has_kind(k)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            o = other
        else:
            try:
                o = RationalFunction(_poly(other))
            except TypeError:
                return NotImplemented
        if self.den == o.den:
            return self.num == o.num
        return (self.num * o.den - o.num * self.den).is_zero()

    @staticmethod
    def _c(v):
        if isinstance(v, RationalFunction):
            return v
        try:
            return RationalFunction(_poly(v))
        except TypeError:
            return None

    def __add__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise DenominatorZero("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._c(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        return RationalFunction(self.num ** n, self.den ** n)

    def diff(self, v: int) -> RationalFunction:
        dn, dd = self.num.diff(v), self.den.diff(v)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def subs(self, sigma) -> RationalFunction:
        return as_rational(substitute(self.num, sigma)) / as_rational(substitute(self.den, sigma))

    def eval(self, point):
        d = self.den.eval(point)
        if d == 0:
            raise DenominatorZero("denominator vanishes at the evaluation point")
        n = self.num.eval(point)
        if isinstance(n, int) and isinstance(d, int):
            return _q(Fraction(n, d))
        return _q(n / d) if isinstance(n, Fraction) or isinstance(d, Fraction) else n / d

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({self})"


def as_rational(v) -> RationalFunction:
    return v if isinstance(v, RationalFunction) else RationalFunction(_poly(v))


def substitute(p, sigma, homogenize=None):
    """Simultaneously replace variables of ``p`` by polynomials or rational functions.

    Returns a Polynomial when every image is polynomial, else a
    RationalFunction whose denominator is ``D**K``, with ``D`` the product of
    the distinct image denominators and ``K`` the largest substituted degree
    of a term (or ``homogenize`` when given, which keeps numerators of a
    family of substitutions comparable).
    """
    if isinstance(p, RationalFunction):
        return p.subs(sigma)
    p = _poly(p)
    if not sigma:
        return p
    images: dict = {}
    dens: list[Polynomial] = []
    for v, img in sigma.items():
        if isinstance(img, RationalFunction):
            if img.den.is_zero():
                raise DenominatorZero(f"image of {var_name(v)} has zero denominator")
            if img.is_polynomial():
                images[v] = (img.num, None)
            else:
                if img.den not in dens:
                    dens.append(img.den)
                images[v] = (img.num, dens.index(img.den))
        else:
            images[v] = (_poly(img), None)
    if not dens:
        return _subs_poly(p, {v: n for v, (n, _) in images.items()})
    D = ONE
    for d in dens:
        D = D * d
    # rewrite every image over the common denominator D
    cofactor = []
    for i in range(len(dens)):
        rest = ONE
        for j, e in enumerate(dens):
            if j != i:
                rest = rest * e
        cofactor.append(rest)
    over_d = {}
    for v, (n, i) in images.items():
        over_d[v] = n * D if i is None else n * cofactor[i]
    K = homogenize
    if K is None:
        K = max((sum(1 for c in m if c in over_d) for m in p.terms), default=0)
    dpow = [ONE]
    for _ in range(K):
        dpow.append(dpow[-1] * D)
    pow_cache: dict = {}
    out = ZERO
    for m, c in p.terms.items():
        rest = []
        j = 0
        acc = ONE
        for v, grp in groupby(m):
            e = sum(1 for _ in grp)
            if v in over_d:
                j += e
                key = (v, e)
                if key not in pow_cache:
                    pow_cache[key] = over_d[v] ** e
                acc = acc * pow_cache[key]
            else:
                rest.extend([v] * e)
        if j > K:
            raise ValueError("homogenize degree smaller than substituted degree")
        out = out + Polynomial({tuple(rest): c}) * acc * dpow[K - j]
    return RationalFunction(out, dpow[K])


def _subs_poly(p: Polynomial, images: dict) -> Polynomial:
    pow_cache: dict = {}
    out: dict = {}
    for m, c in p.terms.items():
        rest = []
        acc = None
        for v, grp in groupby(m):
            e = sum(1 for _ in grp)
            img = images.get(v)
            if img is None:
                rest.extend([v] * e)
                continue
            key = (v, e)
            if key not in pow_cache:
                pow_cache[key] = img ** e
            acc = pow_cache[key] if acc is None else acc * pow_cache[key]
        term = Polynomial({tuple(rest): c})
        if acc is not None:
            term = term * acc
        for tm, tc in term.terms.items():
            val = out.get(tm, 0) + tc
            if val:
                out[tm] = val
            else:
                del out[tm]
    return Polynomial({m: _q(c) for m, c in out.items()})


def is_zero(r) -> bool:
    """Identity-zero test for polynomials and rational functions."""
    if isinstance(r, RationalFunction):
        return r.num.is_zero()
    return _poly(r).is_zero()


def var(code: int) -> Polynomial:
    return Polynomial.var(code)


def X(mu: int) -> Polynomial:
    return Polynomial.var(x(mu))


def U(name: str) -> Polynomial:
    return Polynomial.var(dep(name))


def J(name: str, mu: int) -> Polynomial:
    return Polynomial.var(jet(name, mu))
