"""Finite transformations of one-parameter groups and field invariants.

Closed-form flows are written generically over the scalar type, so the
same formula evaluates on floats, exact fractions, or polynomials (which
gives the symbolic form of a flow).  Complex-projective flows act on
S = E + iH through a small pair type; only real arithmetic is used.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import catalog as cat
from .dsl import parse_expr
from .errors import GuardViolated, NonFinite, SingularLocus, UnknownName
from .expr import KIND_U, RationalFunction, as_rational, kind
from .model import EH_SPACE, VectorField

# -- points -----------------------------------------------------------------


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _num(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    raise TypeError(f"not a number: {v!r}")


@dataclass(frozen=True)
class FlowPoint:
    x: tuple
    E: tuple
    H: tuple

    def __post_init__(self):
        if len(self.x) != 4 or len(self.E) != 3 or len(self.H) != 3:
            raise ValueError("a flow point has x[4], E[3], H[3]")

    @classmethod
    def of(cls, x, E, H) -> FlowPoint:
        """Normalize to a uniform number mode (float if any entry is float)."""
        vals = [_num(v) for v in (*x, *E, *H)]
        if any(isinstance(v, float) for v in vals):
            vals = [float(v) for v in vals]
        return cls(tuple(vals[:4]), tuple(vals[4:7]), tuple(vals[7:]))

    @property
    def mode(self) -> str:
        return "exact" if all(_exact(v) for v in self.vector()) else "float"

    def vector(self) -> tuple:
        return self.x + self.E + self.H

    @classmethod
    def from_vector(cls, v) -> FlowPoint:
        v = tuple(v)
        return cls(v[:4], v[4:7], v[7:10])

    def as_float(self) -> FlowPoint:
        return FlowPoint.from_vector(float(v) for v in self.vector())

    def point_dict(self) -> dict:
        return dict(zip(EH_SPACE.point_vars(), self.vector()))

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else v
        return {"x": [enc(v) for v in self.x], "E": [enc(v) for v in self.E], "H": [enc(v) for v in self.H]}

    @classmethod
    def from_json(cls, d) -> FlowPoint:
        try:
            return cls.of(d["x"], d["E"], d["H"])
        except KeyError as e:
            raise ValueError(f"point is missing {e.args[0]!r}") from None

    def distance(self, other: FlowPoint) -> float:
        return max(abs(float(a) - float(b)) for a, b in zip(self.vector(), other.vector()))


# -- group parameters -------------------------------------------------------


@dataclass(frozen=True)
class Hyperbolic:
    """(ch theta, sh theta); exact when built from t = tanh(theta/2)."""

    c: object
    s: object

    @classmethod
    def from_theta(cls, theta) -> Hyperbolic:
        if theta == 0:
            return cls(1, 0)
        return cls(math.cosh(theta), math.sinh(theta))

    @classmethod
    def rational(cls, t) -> Hyperbolic:
        t = Fraction(t)
        if abs(t) >= 1:
            raise ValueError("rational hyperbolic parameter needs |t| < 1")
        return cls((1 + t * t) / (1 - t * t), 2 * t / (1 - t * t))

    def compose(self, other: Hyperbolic) -> Hyperbolic:
        return Hyperbolic(self.c * other.c + self.s * other.s, self.s * other.c + self.c * other.s)

    @property
    def theta(self) -> float:
        return math.atanh(float(self.s) / float(self.c))


@dataclass(frozen=True)
class Circular:
    """(cos theta, sin theta); exact when built from t = tan(theta/2)."""

    c: object
    s: object

    @classmethod
    def from_theta(cls, theta) -> Circular:
        if theta == 0:
            return cls(1, 0)
        return cls(math.cos(theta), math.sin(theta))

    @classmethod
    def rational(cls, t) -> Circular:
        t = Fraction(t)
        return cls((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t))

    def compose(self, other: Circular) -> Circular:
        return Circular(self.c * other.c - self.s * other.s, self.s * other.c + self.c * other.s)

    @property
    def theta(self) -> float:
        return math.atan2(float(self.s), float(self.c))


class Cx:
    """Complex number as a pair over any real scalar type."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re, self.im = re, im

    @staticmethod
    def _c(o):
        return o if isinstance(o, Cx) else Cx(o, 0)

    def __add__(self, o):
        o = self._c(o)
        return Cx(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._c(o)
        return Cx(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return self._c(o) - self

    def __mul__(self, o):
        o = self._c(o)
        return Cx(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._c(o)
        n = o.re * o.re + o.im * o.im
        return Cx((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)


# -- closed-form flows ------------------------------------------------------


@dataclass(frozen=True)
class ClosedFlow:
    name: str  # operator reference NAME@SET
    kind: str  # additive | hyperbolic | circular
    fn: Callable  # (param, x, E, H) -> (x, E, H)
    guards: Callable  # (param, x, E, H) -> list of denominators (scalar or Cx)

    @property
    def operator(self) -> VectorField:
        return cat.operator(self.name)

    def param(self, theta):
        if isinstance(theta, (Hyperbolic, Circular)):
            return theta
        if self.kind == "hyperbolic":
            return Hyperbolic.from_theta(theta)
        if self.kind == "circular":
            return Circular.from_theta(theta)
        return theta

    def theta_of(self, param) -> float:
        return param.theta if isinstance(param, (Hyperbolic, Circular)) else float(param)


def _sigma(E, H, l):
    return Cx(E[l], H[l])


def _split(S):
    return [s.re for s in S], [s.im for s in S]


def _boost_x(x, k, c, s):
    x = list(x)
    x0, xk = x[0], x[k]
    x[0] = x0 * c + xk * s
    x[k] = xk * c + x0 * s
    return x


def _lorentz_fields(V, k, c, s):
    d = V[k - 1] * s + c
    return [(V[l] * c + s) / d if l == k - 1 else V[l] / d for l in range(3)]


def _j0k_transport(k):
    def fn(p, x, E, H):
        return _boost_x(x, k, p.c, p.s), _lorentz_fields(E, k, p.c, p.s), _lorentz_fields(H, k, p.c, p.s)

    def guards(p, x, E, H):
        return [E[k - 1] * p.s + p.c, H[k - 1] * p.s + p.c]
    return ClosedFlow(f"J0{k}@alg20-lorentz", "hyperbolic", fn, guards)


def _j0k_complex(k):
    def fn(p, x, E, H):
        S = [_sigma(E, H, l) for l in range(3)]
        E2, H2 = _split(_lorentz_fields(S, k, p.c, p.s))
        return _boost_x(x, k, p.c, p.s), E2, H2

    def guards(p, x, E, H):
        return [_sigma(E, H, k - 1) * p.s + p.c]
    return ClosedFlow(f"J0{k}@alg24-lorentz", "hyperbolic", fn, guards)


def _rotation(k, l, setname):
    def rot(V, c, s, off):
        V = list(V)
        a, b = V[k - off], V[l - off]
        V[k - off] = a * c - b * s
        V[l - off] = b * c + a * s
        return V

    def fn(p, x, E, H):
        return rot(x, p.c, p.s, 0), rot(E, p.c, p.s, 1), rot(H, p.c, p.s, 1)
    prefix = "J1_" if setname in ("alg20", "alg24") else "J"
    return ClosedFlow(f"{prefix}{k}{l}@{setname}", "circular", fn, lambda p, x, E, H: [])


def _g1_transport(a, with_h=True, setname="alg20"):
    def fn(t, x, E, H):
        x, E, H = list(x), list(E), list(H)
        x[a] = x[a] + t * x[0]
        E[a - 1] = E[a - 1] + t
        if with_h:
            H[a - 1] = H[a - 1] + t
        return x, E, H
    return ClosedFlow(f"G1_{a}@{setname}", "additive", fn, lambda t, x, E, H: [])


def _g2_transport(a):
    def fn(t, x, E, H):
        x = list(x)
        x[0] = x[0] + t * x[a]
        dE, dH = 1 + t * E[a - 1], 1 + t * H[a - 1]
        return x, [e / dE for e in E], [h / dH for h in H]

    def guards(t, x, E, H):
        return [1 + t * E[a - 1], 1 + t * H[a - 1]]
    return ClosedFlow(f"G2_{a}@alg20", "additive", fn, guards)


def _g2_complex(a):
    def fn(t, x, E, H):
        x = list(x)
        x[0] = x[0] + t * x[a]
        d = 1 + t * _sigma(E, H, a - 1)
        E2, H2 = _split([_sigma(E, H, l) / d for l in range(3)])
        return x, E2, H2

    def guards(t, x, E, H):
        return [1 + t * _sigma(E, H, a - 1)]
    return ClosedFlow(f"G2_{a}@alg24", "additive", fn, guards)


def _k0():
    def fn(t, x, E, H):
        s = 1 - t * x[0]
        x2 = [v / s for v in x]
        E2 = [E[k] + t * (x[k + 1] - x[0] * E[k]) for k in range(3)]
        H2 = [H[k] * s for k in range(3)]
        return x2, E2, H2

    def guards(t, x, E, H):
        return [1 - t * x[0]]
    return ClosedFlow("K0@alg24", "additive", fn, guards)


def _ka(a):
    # S^k -> (S^k (1 - t x_a) + t x_k S^a) / (1 + t (x_0 S^a - x_a)); for k = a
    # this is S^a / (1 + t (x_0 S^a - x_a))
    def fn(t, x, E, H):
        s = 1 - t * x[a]
        Sa = _sigma(E, H, a - 1)
        d = 1 + t * (x[0] * Sa - x[a])
        S = [(_sigma(E, H, k) * s + t * x[k + 1] * Sa) / d for k in range(3)]
        E2, H2 = _split(S)
        return [v / s for v in x], E2, H2

    def guards(t, x, E, H):
        return [1 - t * x[a], 1 + t * (x[0] * _sigma(E, H, a - 1) - x[a])]
    return ClosedFlow(f"K{a}@alg24", "additive", fn, guards)


def _build_flows():
    flows = []
    for k in (1, 2, 3):
        flows.append(_j0k_transport(k))
    for a in (1, 2, 3):
        flows.append(_g1_transport(a))
    for a in (1, 2, 3):
        flows.append(_g2_transport(a))
    for k, l in cat.PAIRS:
        flows.append(_rotation(k, l, "alg20"))
    for a in (1, 2, 3):
        flows.append(_g1_transport(a, with_h=False, setname="alg24"))
    for a in (1, 2, 3):
        flows.append(_g2_complex(a))
    for k in (1, 2, 3):
        flows.append(_j0k_complex(k))
    for k, l in cat.PAIRS:
        flows.append(_rotation(k, l, "alg24"))
    flows.append(_k0())
    for a in (1, 2, 3):
        flows.append(_ka(a))
    return {f.name: f for f in flows}


FLOWS = _build_flows()


def get_flow(name: str) -> ClosedFlow:
    try:
        return FLOWS[cat.canonical_ref(name)]
    except (KeyError, UnknownName):
        raise UnknownName(f"no closed-form flow for {name!r}") from None


def _guard_sign(g):
    """(real part, imaginary part) of a guard value as floats."""
    if isinstance(g, Cx):
        return float(g.re), float(g.im)
    return float(g), 0.0


def _guard_vanishes(g) -> bool:
    if isinstance(g, Cx):
        return g.re == 0 and g.im == 0
    return g == 0


def check_guards(flow: ClosedFlow, theta, p: FlowPoint, samples: int = 64):
    """Raise GuardViolated at the first sampled theta where a denominator
    vanishes or changes sign between 0 and theta."""
    param = flow.param(theta)
    t_end = flow.theta_of(param)
    fp = p.as_float()
    prev = None
    for i in range(samples + 1):
        t = t_end * i / samples
        vals = [_guard_sign(g) for g in flow.guards(flow.param(t), fp.x, fp.E, fp.H)]
        for re, im in vals:
            if re == 0 and im == 0:
                raise GuardViolated(f"{flow.name}: denominator vanishes", theta=t)
        if prev is not None:
            for (r0, i0), (r1, i1) in zip(prev, vals):
                real_cross = (r0 > 0) != (r1 > 0)
                imag_small = (i0 > 0) != (i1 > 0) or (abs(i0) < 1e-300 and abs(i1) < 1e-300)
                if real_cross and imag_small:
                    raise GuardViolated(f"{flow.name}: pole crossed", theta=t)
        prev = vals
    exact = [g for g in flow.guards(param, p.x, p.E, p.H)]
    if any(_guard_vanishes(g) for g in exact):
        raise GuardViolated(f"{flow.name}: denominator vanishes", theta=t_end)


def closed_flow(name: str, theta, p: FlowPoint, guard: bool = True) -> FlowPoint:
    """Apply the finite transformation of flow ``name`` with group parameter ``theta``."""
    flow = get_flow(name) if isinstance(name, str) else name
    param = flow.param(theta)
    if p.mode == "exact" and flow.kind != "additive" and not isinstance(theta, (Hyperbolic, Circular)) and theta != 0:
        p = p.as_float()
    if p.mode == "float" and isinstance(param, (int, Fraction)):
        param = float(param)
    if guard:
        check_guards(flow, param, p)
    x, E, H = flow.fn(param, p.x, p.E, p.H)
    return FlowPoint(tuple(x), tuple(E), tuple(H))


def symbolic_flow(name: str, theta_symbol=None):
    """Images of (x, E, H) as rational functions of the point and the parameter.

    Additive flows use the parameter ``theta``; hyperbolic and circular
    flows use ``c`` and ``s``.
    """
    from .expr import Polynomial, param, var
    flow = get_flow(name)
    if flow.kind == "additive":
        prm = theta_symbol if theta_symbol is not None else Polynomial.var(param("theta"))
    else:
        cls = Hyperbolic if flow.kind == "hyperbolic" else Circular
        prm = cls(Polynomial.var(param("c")), Polynomial.var(param("s")))
    vals = [var(v) for v in EH_SPACE.point_vars()]
    x, E, H = flow.fn(prm, vals[:4], vals[4:7], vals[7:])
    return [as_rational(v) for v in (*x, *E, *H)]


# -- numeric flows ----------------------------------------------------------


def _compile(X: VectorField):
    """Components of X as lists of (coef, variable-index tuple) over the point vector."""
    index = {v: i for i, v in enumerate(X.space.point_vars())}
    out = []
    for c in X.components:
        out.append([(float(coef), tuple(index[v] for v in m)) for m, coef in c.terms.items()])
    return out


def _rhs(comp, y):
    out = []
    for terms in comp:
        acc = 0.0
        for c, m in terms:
            t = c
            for i in m:
                t *= y[i]
            acc += t
        out.append(acc)
    return out


def default_steps(theta, h=1e-3) -> int:
    return max(1, math.ceil(abs(float(theta)) / h))


def _rk4_path(X: VectorField, theta, p: FlowPoint, steps):
    comp = _compile(X)
    y = [float(v) for v in p.vector()]
    h = float(theta) / steps
    yield 0.0, y
    for n in range(steps):
        k1 = _rhs(comp, y)
        k2 = _rhs(comp, [a + 0.5 * h * b for a, b in zip(y, k1)])
        k3 = _rhs(comp, [a + 0.5 * h * b for a, b in zip(y, k2)])
        k4 = _rhs(comp, [a + h * b for a, b in zip(y, k3)])
        y = [a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
        if not all(math.isfinite(v) for v in y):
            raise NonFinite(f"integration blew up at theta = {(n + 1) * h:g}")
        yield (n + 1) * h, y


def numeric_flow(X: VectorField, theta, p: FlowPoint, steps: int | None = None) -> FlowPoint:
    """Classical RK4 integration of dp/dtheta = X(p)."""
    if X.space != EH_SPACE:
        raise ValueError("numeric flows act on the (x, E, H) space")
    steps = steps or default_steps(theta)
    if steps < 1:
        raise ValueError("steps must be positive")
    y = None
    for _, y in _rk4_path(X, theta, p, steps):
        pass
    return FlowPoint.from_vector(y)


def generator_value(X: VectorField, p: FlowPoint) -> list[float]:
    return _rhs(_compile(X), [float(v) for v in p.vector()])


def generator_estimate(name: str, p: FlowPoint, h: float = 1e-3) -> list[float]:
    """Richardson-extrapolated d/dtheta of the closed flow at theta = 0."""
    fp = p.as_float()
    y0 = fp.vector()

    def quotient(t):
        y = closed_flow(name, t, fp).vector()
        return [(a - b) / t for a, b in zip(y, y0)]
    d1, d2 = quotient(h), quotient(h / 2)
    return [2 * b - a for a, b in zip(d1, d2)]


# -- invariants -------------------------------------------------------------


@dataclass(frozen=True)
class InvariantDef:
    name: str
    text: str
    guards: tuple  # expressions that must not vanish
    locus: str

    @property
    def expr(self) -> RationalFunction:
        return _parsed(self.text)

    def guard_exprs(self):
        return [_parsed(g) for g in self.guards]


_CACHE: dict = {}


def _parsed(text):
    if text not in _CACHE:
        _CACHE[text] = as_rational(parse_expr(text))
    return _CACHE[text]


INVARIANTS = {
    "I1": InvariantDef("I1", "(1 - dot(E,H))^2 / ((1 - dot(E,E))*(1 - dot(H,H)))",
                       ("1 - dot(E,E)", "1 - dot(H,H)"), "E^2 = 1 or H^2 = 1"),
    "I2": InvariantDef("I2", "dot(E,E)*dot(H,H) / dot(E,H)^2", ("dot(E,H)",), "E.H = 0"),
    "I3": InvariantDef("I3", "dot(E,E) - 2*dot(E,H) + dot(H,H)", (), "none"),
    # squared first term; the unsquared form is not invariant
    "I4": InvariantDef("I4", "((dot(E,E) - dot(H,H))^2 + 4*dot(E,H)^2) / (dot(E,E) + dot(H,H))^2",
                       ("dot(E,E) + dot(H,H)",), "E = H = 0"),
    "I5": InvariantDef("I5", "(1 - 2*((dot(E,E) - dot(H,H)) - (dot(E,E) - dot(H,H))^2/2 - 2*dot(E,H)^2))"
                             " / (1 - (dot(E,E) + dot(H,H)))^2",
                       ("1 - (dot(E,E) + dot(H,H))",), "E^2 + H^2 = 1"),
}

_ROT20 = tuple(f"J1_{k}{l}@alg20" for k, l in cat.PAIRS)
_ROT24 = tuple(f"J1_{k}{l}@alg24" for k, l in cat.PAIRS)

# operator family owning each invariant; the transport and complex Lorentz
# boosts are different realizations and are kept apart
INVARIANT_FAMILIES = {
    "I1": tuple(f"J0{k}@alg20-lorentz" for k in (1, 2, 3)) + _ROT20,
    "I2": _ROT20 + tuple(f"G2_{a}@alg20" for a in (1, 2, 3)),
    "I3": _ROT20 + tuple(f"G1_{a}@alg20" for a in (1, 2, 3)),
    "I4": tuple(f"G2_{a}@alg24" for a in (1, 2, 3)) + _ROT24,
    "I5": tuple(f"J0{k}@alg24-lorentz" for k in (1, 2, 3)) + _ROT24,
}


def get_invariant(name) -> InvariantDef:
    if isinstance(name, InvariantDef):
        return name
    try:
        return INVARIANTS[name]
    except KeyError:
        raise UnknownName(f"no invariant named {name!r}") from None


def invariant_value(name, p: FlowPoint):
    inv = get_invariant(name)
    pt = p.point_dict()
    for g in inv.guard_exprs():
        if g.num.eval(pt) == 0:
            raise SingularLocus(f"{inv.name} is singular at this point ({inv.locus})")
    return inv.expr.eval(pt)


def symbolic_invariance(X: VectorField, I) -> bool:
    """X(I) == 0 identically (I must depend on the fields only)."""
    inv = get_invariant(I)
    r = inv.expr
    if any(kind(v) != KIND_U for v in r.variables()):
        raise ValueError("invariant must depend on the fields only")
    return X(r).is_zero()


def drift(X: VectorField, I, theta_max, p: FlowPoint, steps: int | None = None) -> float:
    """Max |I(p(theta)) - I(p(0))| along the RK4 trajectory."""
    inv = get_invariant(I)
    steps = steps or default_steps(theta_max)
    guards = inv.guard_exprs()
    I0 = float(invariant_value(inv, p.as_float()))
    worst = 0.0
    signs = None
    for t, y in _rk4_path(X, theta_max, p, steps):
        q = FlowPoint.from_vector(y)
        pt = q.point_dict()
        cur = [g.num.eval(pt) for g in guards]
        if any(v == 0 for v in cur) or (signs is not None and any((a > 0) != (b > 0) for a, b in zip(signs, cur))):
            raise GuardViolated(f"trajectory crosses the singular locus of {inv.name}", theta=t)
        signs = cur
        worst = max(worst, abs(float(inv.expr.eval(pt)) - I0))
    return worst


def flow_trace(X: VectorField, theta_max, p: FlowPoint, steps: int | None = None,
               invariants=("I1", "I2", "I3", "I4", "I5"), every: int = 1):
    """Records {theta, x, E, H, invariants} along the RK4 trajectory."""
    steps = steps or default_steps(theta_max)
    out = []
    for n, (t, y) in enumerate(_rk4_path(X, theta_max, p, steps)):
        if n % every and n != steps:
            continue
        q = FlowPoint.from_vector(y)
        vals = {}
        for name in invariants:
            try:
                vals[name] = float(invariant_value(name, q))
            except SingularLocus:
                vals[name] = None
        out.append({"theta": t, "x": list(q.x), "E": list(q.E), "H": list(q.H), "invariants": vals})
    return out


def dumps_trace(records) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)
