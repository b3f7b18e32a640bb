"""Builtin PDE systems and operator families of nonlinear electrodynamics.

Every entry is built once from Python expressions; ``catalog(name)``
returns the exact object.  Parameterized systems take concrete polynomial
(or DSL string) arguments for the arbitrary functions they contain.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from . import expr as ex
from .dsl import curl, parse_expr
from .errors import UnknownName
from .expr import ONE, ZERO, Polynomial, RationalFunction, U, X
from .model import EH_SPACE, JetSpace, PdeSystem, VectorField, levi_civita, to_solved_form

FLUID_SPACE = JetSpace(4, ("v1", "v2", "v3"))
SCALAR_SPACE = JetSpace(4, ("u",))

XC = tuple(ex.x(m) for m in range(4))
EC = tuple(ex.dep(f"E{k}") for k in (1, 2, 3))
HC = tuple(ex.dep(f"H{k}") for k in (1, 2, 3))
E = tuple(U(f"E{k}") for k in (1, 2, 3))
H = tuple(U(f"H{k}") for k in (1, 2, 3))
x = tuple(X(m) for m in range(4))
PAIRS = ((1, 2), (1, 3), (2, 3))


def _vf(name, terms, space=EH_SPACE):
    acc: dict[int, Polynomial] = {}
    for code, c in terms:
        acc[code] = acc.get(code, ZERO) + c
    return VectorField.from_dict({k: v for k, v in acc.items() if v}, space, name)


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


W1 = _dot(E, E) - _dot(H, H)
W2 = _dot(E, H)


# -- operator pieces --------------------------------------------------------

def _translations(space=EH_SPACE):
    return [_vf(f"P{m}", [(XC[m], ONE)], space) for m in range(4)]


def _rot_x(k, l):
    return [(XC[l], x[k]), (XC[k], -x[l])]


def _spin(k, l, fields=(EC, HC), values=(E, H)):
    out = []
    for codes, vals in zip(fields, values):
        out += [(codes[l - 1], vals[k - 1]), (codes[k - 1], -vals[l - 1])]
    return out


def _sym_gl(k, l):
    return ([(XC[l], x[k]), (XC[k], x[l])]
            + [(EC[l - 1], E[k - 1]), (EC[k - 1], E[l - 1]), (HC[l - 1], H[k - 1]), (HC[k - 1], H[l - 1])])


def _rotations(prefix="J"):
    return [_vf(f"{prefix}{k}{l}", _rot_x(k, l) + _spin(k, l)) for k, l in PAIRS]


def _complex_boost_field(a):
    """Field part -(S^a S^k) d/dS^k of a complex projective action, S = E + iH."""
    out = []
    for k in (1, 2, 3):
        out.append((EC[k - 1], -(E[a - 1] * E[k - 1] - H[a - 1] * H[k - 1])))
        out.append((HC[k - 1], -(E[a - 1] * H[k - 1] + H[a - 1] * E[k - 1])))
    return out


def _K0():
    t = [(XC[0], x[0] * x[0])] + [(XC[k], x[0] * x[k]) for k in (1, 2, 3)]
    t += [(EC[k - 1], x[k] - x[0] * E[k - 1]) for k in (1, 2, 3)]
    t += [(HC[k - 1], -x[0] * H[k - 1]) for k in (1, 2, 3)]
    return _vf("K0", t)


def _Ka(a):
    t = [(XC[0], x[0] * x[a])] + [(XC[k], x[a] * x[k]) for k in (1, 2, 3)]
    for k in (1, 2, 3):
        t.append((EC[k - 1], x[k] * E[a - 1] - x[0] * (E[a - 1] * E[k - 1] - H[a - 1] * H[k - 1])))
        t.append((HC[k - 1], x[k] * H[a - 1] - x[0] * (H[a - 1] * E[k - 1] + E[a - 1] * H[k - 1])))
    return _vf(f"K{a}", t)


def _alg20():
    ops = _translations()
    ops += [_vf(f"J1_{k}{l}", _rot_x(k, l) + _spin(k, l)) for k, l in PAIRS]
    ops += [_vf(f"J2_{k}{l}", _sym_gl(k, l)) for k, l in PAIRS]
    ops += [_vf(f"G1_{a}", [(XC[a], x[0]), (EC[a - 1], ONE), (HC[a - 1], ONE)]) for a in (1, 2, 3)]
    ops += [_vf(f"G2_{a}", [(XC[0], x[a])]
                + [(EC[k - 1], -E[a - 1] * E[k - 1]) for k in (1, 2, 3)]
                + [(HC[k - 1], -H[a - 1] * H[k - 1]) for k in (1, 2, 3)]) for a in (1, 2, 3)]
    ops.append(_vf("D0", [(XC[0], x[0])] + [(c, -v) for c, v in zip(EC + HC, E + H)]))
    ops += [_vf(f"D{a}", [(XC[a], x[a]), (EC[a - 1], E[a - 1]), (HC[a - 1], H[a - 1])]) for a in (1, 2, 3)]
    return ops


def _alg24():
    ops = _translations()
    ops += [_vf(f"J1_{k}{l}", _rot_x(k, l) + _spin(k, l)) for k, l in PAIRS]
    ops += [_vf(f"J2_{k}{l}", _sym_gl(k, l)) for k, l in PAIRS]
    ops += [_vf(f"G1_{a}", [(XC[a], x[0]), (EC[a - 1], ONE)]) for a in (1, 2, 3)]
    # the printed G2_a writes d/dE^a for the E-part; the summed index is k
    ops += [_vf(f"G2_{a}", [(XC[0], x[a])] + _complex_boost_field(a)) for a in (1, 2, 3)]
    ops.append(_vf("D0", [(XC[0], x[0])] + [(c, -v) for c, v in zip(EC + HC, E + H)]))
    ops += [_vf(f"D{a}", [(XC[a], x[a]), (EC[a - 1], E[a - 1]), (HC[a - 1], H[a - 1])]) for a in (1, 2, 3)]
    ops += [_K0()] + [_Ka(a) for a in (1, 2, 3)]
    return ops


def _nl_boost(k):
    """x0 d/dxk + xk d/dx0 + S_0k with the complex-projective field part."""
    return _vf(f"J0{k}", [(XC[k], x[0]), (XC[0], x[k]), (EC[k - 1], ONE)] + _complex_boost_field(k))


def _poincare_nl_conformal():
    ops = _translations() + _rotations() + [_nl_boost(k) for k in (1, 2, 3)]
    ops.append(_vf("D", [(XC[m], x[m]) for m in range(4)]))
    return ops + [_K0()] + [_Ka(a) for a in (1, 2, 3)]


def _galilei_nl():
    ops = _translations() + _rotations()
    ops += [_vf(f"G{k}", [(XC[0], x[k])] + _complex_boost_field(k)) for k in (1, 2, 3)]
    ops.append(_vf("D", [(XC[0], x[0])] + [(XC[k], 2 * x[k]) for k in (1, 2, 3)]
                   + [(c, v) for c, v in zip(EC + HC, E + H)]))
    return ops


_V = tuple(U(f"v{k}") for k in (1, 2, 3))
_VC = tuple(ex.dep(f"v{k}") for k in (1, 2, 3))


def _fluid_rotations():
    return [_vf(f"J{k}{l}", _rot_x(k, l) + _spin(k, l, (_VC,), (_V,)), FLUID_SPACE) for k, l in PAIRS]


def _euler_poincare():
    ops = _translations(FLUID_SPACE) + _fluid_rotations()
    ops += [_vf(f"J0{k}", [(XC[0], x[k]), (XC[k], x[0]), (_VC[k - 1], ONE)]
                + [(_VC[l - 1], -_V[k - 1] * _V[l - 1]) for l in (1, 2, 3)], FLUID_SPACE) for k in (1, 2, 3)]
    return ops


def _euler_galilei():
    ops = _translations(FLUID_SPACE) + _fluid_rotations()
    ops += [_vf(f"G{a}", [(XC[a], x[0]), (_VC[a - 1], ONE)], FLUID_SPACE) for a in (1, 2, 3)]
    return ops


def _linear_boost(k):
    t = [(XC[k], x[0]), (XC[0], x[k])]
    for l in (1, 2, 3):
        for n in (1, 2, 3):
            e = levi_civita(k, l, n)
            if e:
                t += [(HC[n - 1], e * E[l - 1]), (EC[n - 1], -e * H[l - 1])]
    return _vf(f"J0{k}", t)


def _lorentz_linear():
    return _rotations() + [_linear_boost(k) for k in (1, 2, 3)]


def _alg20_lorentz():
    """Rotations plus boosts written out from the finite Lorentz flow of the
    transport system (generator of the hyperbolic flow at theta = 0)."""
    boosts = []
    for k in (1, 2, 3):
        t = [(XC[k], x[0]), (XC[0], x[k]), (EC[k - 1], ONE), (HC[k - 1], ONE)]
        t += [(EC[l - 1], -E[k - 1] * E[l - 1]) for l in (1, 2, 3)]
        t += [(HC[l - 1], -H[k - 1] * H[l - 1]) for l in (1, 2, 3)]
        boosts.append(_vf(f"J0{k}", t))
    return _rotations() + boosts


def _alg24_lorentz():
    return _rotations() + [_nl_boost(k) for k in (1, 2, 3)]


def _maxwell_tensor():
    F = [[ZERO] * 4 for _ in range(4)]
    for k in (1, 2, 3):
        F[0][k], F[k][0] = E[k - 1], -E[k - 1]
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            for k in (1, 2, 3):
                e = levi_civita(i, j, k)
                if e:
                    F[i][j] = F[i][j] - e * H[k - 1]
    return F


def lie_derivative_field(xi, name):
    """Point field induced on (E, H) by the 2-form Lie derivative along ``xi``."""
    F = _maxwell_tensor()
    dF = [[ZERO] * 4 for _ in range(4)]
    for mu in range(4):
        for nu in range(4):
            acc = ZERO
            for rho in range(4):
                acc = acc + F[rho][nu] * xi[rho].diff(XC[mu]) + F[mu][rho] * xi[rho].diff(XC[nu])
            dF[mu][nu] = -acc
    t = [(XC[m], xi[m]) for m in range(4)]
    t += [(EC[k - 1], dF[0][k]) for k in (1, 2, 3)]
    t += [(HC[0], -dF[2][3]), (HC[1], -dF[3][1]), (HC[2], -dF[1][2])]
    return _vf(name, t)


def _conformal_linear_maxwell():
    r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3]
    s2 = x[0] * x[0] - r2
    e = [[ONE if i == j else ZERO for j in range(4)] for i in range(4)]
    ops = [lie_derivative_field(e[m], f"P{m}") for m in range(4)]
    for k, l in PAIRS:
        xi = [ZERO] * 4
        xi[l], xi[k] = x[k], -x[l]
        ops.append(lie_derivative_field(xi, f"J{k}{l}"))
    for k in (1, 2, 3):
        xi = [ZERO] * 4
        xi[k], xi[0] = x[0], x[k]
        ops.append(lie_derivative_field(xi, f"J0{k}"))
    ops.append(lie_derivative_field(list(x), "D"))
    ops.append(lie_derivative_field([x[0] * x[0] + r2] + [2 * x[0] * x[k] for k in (1, 2, 3)], "K0"))
    for k in (1, 2, 3):
        xi = [2 * x[k] * x[0]] + [2 * x[k] * x[j] + (s2 if j == k else ZERO) for j in (1, 2, 3)]
        ops.append(lie_derivative_field(xi, f"K{k}"))
    return ops


# -- systems ----------------------------------------------------------------

def _dt(u):
    return _jets_of(u, 0)


def _system(name, eqs, leading, source, space=EH_SPACE):
    s = PdeSystem(space, tuple(eqs), name=name, source=source)
    return to_solved_form(s, leading) if leading else s


def _jets_of(u, mu):
    return Polynomial.var(ex.jet(next(iter(u.terms))[0], mu))


def _maxwell_like(name, F1, F2, R1, R2, source):
    curlH = curl(H)
    curlE = curl(E)
    eqs = [_dt(E[k]) - curlH[k] - F1[k] for k in range(3)]
    eqs += [_dt(H[k]) + curlE[k] - F2[k] for k in range(3)]
    eqs.append(sum((_jets_of(E[k], k + 1) for k in range(3)), ZERO) - R1)
    eqs.append(sum((_jets_of(H[k], k + 1) for k in range(3)), ZERO) - R2)
    leading = [ex.jet(c, 0) for c in EC + HC] + [ex.jet(EC[2], 3), ex.jet(HC[2], 3)]
    return _system(name, eqs, leading, source)


def _maxwell():
    return _maxwell_like("maxwell", [ZERO] * 3, [ZERO] * 3, ZERO, ZERO, "Maxwell equations in vacuum")


def _transport(name, src, velocity_E, velocity_H):
    eqs = [_dt(E[k]) + sum((velocity_E[l] * _jets_of(E[k], l + 1) for l in range(3)), ZERO) for k in range(3)]
    eqs += [_dt(H[k]) + sum((velocity_H[l] * _jets_of(H[k], l + 1) for l in range(3)), ZERO) for k in range(3)]
    return _system(name, eqs, [ex.jet(c, 0) for c in EC + HC], src)


def _eh_transport():
    return _transport("eh-transport", "transport of E along H and H along E", H, E)


def _complex_euler_real():
    eqs = []
    for k in range(3):
        eqs.append(_dt(E[k]) + sum((E[l] * _jets_of(E[k], l + 1) - H[l] * _jets_of(H[k], l + 1)
                                    for l in range(3)), ZERO))
    for k in range(3):
        eqs.append(_dt(H[k]) + sum((H[l] * _jets_of(E[k], l + 1) + E[l] * _jets_of(H[k], l + 1)
                                    for l in range(3)), ZERO))
    return _system("complex-euler-real", eqs, [ex.jet(c, 0) for c in EC + HC],
                   "real form of the complex Euler equation for S = E + iH")


def _star_system():
    w = [E[l] + H[l] for l in range(3)]
    return _transport("star-system", "transport of E and H along E + H", w, w)


def _starstar_system(sign=1):
    w = [E[l] + H[l] for l in range(3)]
    eqs = [_dt(E[k]) - sign * sum((w[l] * _jets_of(H[k], l + 1) for l in range(3)), ZERO) for k in range(3)]
    eqs += [_dt(H[k]) - sign * sum((w[l] * _jets_of(E[k], l + 1) for l in range(3)), ZERO) for k in range(3)]
    return _system("starstar-system", eqs, [ex.jet(c, 0) for c in EC + HC], "cross transport of E and H")


def _eikonal():
    u = U("u")
    eq = _dt(u) * _dt(u) - sum((_jets_of(u, m) * _jets_of(u, m) for m in (1, 2, 3)), ZERO)
    return _system("eikonal", [eq], None, "eikonal equation", SCALAR_SPACE)


def _euler_fluid():
    eqs = [_dt(_V[k]) + sum((_V[l] * _jets_of(_V[k], l + 1) for l in range(3)), ZERO) for k in range(3)]
    return _system("euler-fluid", eqs, [ex.jet(c, 0) for c in _VC], "Euler equation of an ideal fluid",
                   FLUID_SPACE)


def poynting_density():
    """(rho, rho v) = ((E^2 + H^2)/2, E x H)."""
    rho = (_dot(E, E) + _dot(H, H)).scale(Fraction(1, 2))
    flux = [E[1] * H[2] - E[2] * H[1], E[2] * H[0] - E[0] * H[2], E[0] * H[1] - E[1] * H[0]]
    return [rho] + flux


def continuity_equation(F, name="continuity", lead=None):
    eq = F[0].total_derivative(0) + sum((F[k].total_derivative(k) for k in (1, 2, 3)), ZERO)
    return _system(name, [eq], lead, "continuity equation for an energy density")


def _continuity_poynting():
    return continuity_equation(poynting_density(), "continuity-poynting", [ex.jet(EC[0], 0)])


def _rn_maxwell(R, N):
    RE = [R * e for e in E]
    RH = [R * h for h in H]
    NE = [N * e for e in E]
    NH = [N * h for h in H]
    cRH, cNE = curl(RH), curl(NE)
    eqs = [RE[k].total_derivative(0) - cRH[k] for k in range(3)]
    eqs += [NH[k].total_derivative(0) + cNE[k] for k in range(3)]
    eqs.append(sum((RE[k].total_derivative(k + 1) for k in range(3)), ZERO))
    eqs.append(sum((NH[k].total_derivative(k + 1) for k in range(3)), ZERO))
    return _system("rn-maxwell", eqs, None, "Maxwell-type system with invariant prefactors R, N")


def _rn_div(R, N):
    D = [R * E[k] + N * H[k] for k in range(3)]
    eq = sum((D[k].total_derivative(k + 1) for k in range(3)), ZERO)
    return _system("rn-div", [eq], [ex.jet(EC[0], 1)], "divergence constraint div(R E + N H) = 0")


def _rn_div_constraint(R, N):
    D = [R * E[k] + N * H[k] for k in range(3)]
    B = [R * H[k] - N * E[k] for k in range(3)]
    cB = curl(B)
    eqs = [D[k].total_derivative(0) - cB[k] for k in range(3)]
    return _system("rn-div-constraint", eqs, None,
                   "evolution law d(R E + N H)/dt = curl(R H - N E)")


def _gen_maxwell_sources(F1, F2, R1, R2):
    return _maxwell_like("gen-maxwell-sources", F1, F2, R1, R2, "Maxwell system with sources F1, F2, R1, R2")


# -- registry ---------------------------------------------------------------

def _as_poly(v, name):
    if isinstance(v, str):
        v = parse_expr(v)
    if isinstance(v, RationalFunction):
        v = v.as_polynomial()
    if not isinstance(v, Polynomial):
        v = Polynomial.const(v)
    if any(ex.kind(c) != ex.KIND_U for c in v.variables()):
        raise ValueError(f"parameter {name} must be a function of the fields E, H only")
    return v


def _vec_param(params, key):
    if key in params:
        vals = params[key]
        if isinstance(vals, str):
            vals = [s for s in vals.strip("[]").split(",")]
        if len(vals) != 3:
            raise ValueError(f"parameter {key} needs three components")
        return [_as_poly(v, key) for v in vals]
    return [_as_poly(params.get(f"{key}_{k}", 0), f"{key}_{k}") for k in (1, 2, 3)]


DEFAULT_R = "1 + dot(E,E) - dot(H,H)"
DEFAULT_N = "dot(E,H)"

SYSTEMS = {
    "maxwell": (lambda p: _maxwell(), ()),
    "eikonal": (lambda p: _eikonal(), ()),
    "euler-fluid": (lambda p: _euler_fluid(), ()),
    "eh-transport": (lambda p: _eh_transport(), ()),
    "complex-euler-real": (lambda p: _complex_euler_real(), ()),
    "continuity-poynting": (lambda p: _continuity_poynting(), ()),
    "gen-maxwell-sources": (lambda p: _gen_maxwell_sources(
        _vec_param(p, "F1"), _vec_param(p, "F2"), _as_poly(p.get("R1", 0), "R1"), _as_poly(p.get("R2", 0), "R2")),
        ("F1", "F2", "R1", "R2")),
    "rn-maxwell": (lambda p: _rn_maxwell(_as_poly(p.get("R", DEFAULT_R), "R"), _as_poly(p.get("N", DEFAULT_N), "N")),
                   ("R", "N")),
    "rn-div": (lambda p: _rn_div(_as_poly(p.get("R", DEFAULT_R), "R"), _as_poly(p.get("N", DEFAULT_N), "N")),
               ("R", "N")),
    "rn-div-constraint": (lambda p: _rn_div_constraint(_as_poly(p.get("R", DEFAULT_R), "R"),
                                                       _as_poly(p.get("N", DEFAULT_N), "N")), ("R", "N")),
    "star-system": (lambda p: _star_system(), ()),
    "starstar-system": (lambda p: _starstar_system(int(p.get("sign", 1))), ("sign",)),
}

OPERATOR_SETS = {
    "conformal-linear-maxwell": _conformal_linear_maxwell,
    "poincare-nl-conformal": _poincare_nl_conformal,
    "galilei-nl": _galilei_nl,
    "euler-poincare": _euler_poincare,
    "euler-galilei": _euler_galilei,
    "alg20": _alg20,
    "alg24": _alg24,
    "lorentz-linear": _lorentz_linear,
    "alg20-lorentz": _alg20_lorentz,
    "alg24-lorentz": _alg24_lorentz,
}

# operator family whose span a symmetry computation on the system should contain
REFERENCE_BASIS = {
    "eh-transport": "alg20",
    "complex-euler-real": "alg24",
    "maxwell": "conformal-linear-maxwell",
    "euler-fluid": "euler-poincare",
}


def names() -> dict[str, list[str]]:
    return {"systems": sorted(SYSTEMS), "operator_sets": sorted(OPERATOR_SETS)}


@lru_cache(maxsize=None)
def _cached_set(name):
    return tuple(OPERATOR_SETS[name]())


@lru_cache(maxsize=None)
def _cached_system(name):
    return SYSTEMS[name][0]({})


def catalog(name: str, **params):
    """Return a builtin PdeSystem or list of VectorFields by name."""
    if name in OPERATOR_SETS:
        if params:
            raise ValueError(f"operator set {name!r} takes no parameters")
        return list(_cached_set(name))
    if name in SYSTEMS:
        builder, allowed = SYSTEMS[name]
        bad = [k for k in params if k not in allowed and k.split("_")[0] not in allowed]
        if bad:
            raise ValueError(f"unknown parameter(s) for {name}: {', '.join(bad)}")
        if not params:
            return _cached_system(name)
        return builder(params)
    raise UnknownName(f"no catalog entry named {name!r}")


# boosts J0k live in the Lorentz companion sets; J0k@alg20 means G1_k + G2_k
_COMPANION = {"alg20": "alg20-lorentz", "alg24": "alg24-lorentz"}


def canonical_ref(ref: str) -> str:
    """Normalize ``NAME@SET``, sending boosts of alg20/alg24 to their Lorentz set."""
    if "@" not in ref:
        raise UnknownName(f"operator reference must look like NAME@SET, got {ref!r}")
    op, setname = ref.split("@", 1)
    if setname not in OPERATOR_SETS:
        raise UnknownName(f"no operator set named {setname!r}")
    if op not in by_name(catalog(setname)) and setname in _COMPANION:
        if op in by_name(catalog(_COMPANION[setname])):
            return f"{op}@{_COMPANION[setname]}"
    return f"{op}@{setname}"


def operator(ref: str) -> VectorField:
    """Resolve ``NAME@SET`` to one operator."""
    op, setname = canonical_ref(ref).split("@", 1)
    ops = by_name(catalog(setname))
    if op not in ops:
        raise UnknownName(f"no operator {op!r} in {setname!r}")
    return ops[op]


def by_name(ops) -> dict[str, VectorField]:
    return {X.name: X for X in ops}

