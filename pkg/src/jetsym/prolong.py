"""First prolongation, invariance / conditional-invariance checks, Jacobi rank."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from . import linalg
from .errors import CircularSolvedForm, ModeUnavailable
from .expr import (
    KIND_JET,
    KIND_U,
    KIND_X,
    ZERO,
    Polynomial,
    RationalFunction,
    as_rational,
    jet,
    kind,
)
from .model import DensityMap, PdeSystem, VectorField


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    zeta: dict  # (dependent index a, alpha) -> Polynomial

    def by_jet(self) -> dict[int, Polynomial]:
        us = self.base.space.us
        return {jet(us[a], al): z for (a, al), z in self.zeta.items()}


def prolong1(X: VectorField) -> ProlongedField:
    """zeta^a_alpha = D_alpha(phi^a) - sum_j u^a_j D_alpha(xi^j)."""
    space = X.space
    m = space.n_independent
    Dxi = [[xi.total_derivative(al) for al in range(m)] for xi in X.xi]
    zeta = {}
    for a, (u, phi) in enumerate(zip(space.us, X.phi)):
        for al in range(m):
            z = phi.total_derivative(al)
            for j in range(m):
                d = Dxi[j][al]
                if d:
                    z = z - Polynomial.var(jet(u, j)) * d
            zeta[(a, al)] = z
    return ProlongedField(X, zeta)


def apply(Xp: ProlongedField, F: Polynomial) -> Polynomial:
    """Action of the prolonged field on a first-order jet polynomial."""
    X = Xp.base
    out = X(F)
    present = F.variables()
    for v, z in Xp.by_jet().items():
        if z and v in present:
            out = out + z * F.diff(v)
    return out


@dataclass
class Verdict:
    invariant: bool
    residuals: list
    reduction: str
    multipliers: list | None = None
    notes: list = field(default_factory=list)

    def nonzero(self) -> list[int]:
        return [i for i, r in enumerate(self.residuals) if not as_rational(r).is_zero()]


def _residuals(X: VectorField, sys: PdeSystem) -> list[Polynomial]:
    if X.space != sys.jet:
        raise ValueError(f"operator {X.name} does not act on the jet space of {sys.name}")
    Xp = prolong1(X)
    return [apply(Xp, F) for F in sys.equations]


def check_invariance(X: VectorField, sys: PdeSystem, mode: str = "substitution",
                     multiplier_degree: int | None = None) -> Verdict:
    """Test X^(1) F_i = 0 on the solution manifold of ``sys``."""
    raw = _residuals(X, sys)
    if mode == "substitution":
        if not sys.solved_form:
            raise ModeUnavailable(f"system {sys.name} has no solved form; use multiplier mode")
        res = [sys.reduce(r) for r in raw]
        return Verdict(all(r.is_zero() for r in res), res, "substitution")
    if mode == "multipliers":
        return _multiplier_verdict(raw, list(sys.equations), X, multiplier_degree)
    raise ModeUnavailable(f"unknown reduction mode {mode!r}")


def _reduce_to_fixpoint(r: RationalFunction, systems) -> RationalFunction:
    forms = [s.solved_form for s in systems if s.solved_form]
    keys = set().union(*(f.keys() for f in forms)) if forms else set()
    for _ in range(2 * len(keys) + 2):
        if not (r.variables() & keys):
            return r
        for f in forms:
            if r.variables() & f.keys():
                r = r.subs(f)
    if r.variables() & keys:
        raise CircularSolvedForm("reduction did not reach a fixpoint")
    return r


def check_conditional(X: VectorField, sys: PdeSystem, constraints: PdeSystem,
                      mode: str = "substitution", multiplier_degree: int | None = None) -> Verdict:
    """Invariance of ``sys`` modulo the additional equations ``constraints``."""
    raw = _residuals(X, sys)
    if mode == "substitution":
        if not constraints.solved_form:
            raise ModeUnavailable(f"constraint system {constraints.name} has no solved form")
        res = [_reduce_to_fixpoint(as_rational(r), (sys, constraints)) for r in raw]
        return Verdict(all(r.is_zero() for r in res), res, "substitution")
    if mode == "multipliers":
        return _multiplier_verdict(raw, list(sys.equations) + list(constraints.equations), X, multiplier_degree)
    raise ModeUnavailable(f"unknown reduction mode {mode!r}")


# -- multiplier mode --------------------------------------------------------

def _monomials(variables, degree):
    out = [()]
    for d in range(1, degree + 1):
        out.extend(combinations_with_replacement(sorted(variables), d))
    return out


def find_multipliers(residual: Polynomial, equations, degree: int, jet_degree: int | None = None):
    """Find lambda_j (polynomial in x, u; jet-linear if needed) with
    residual = sum_j lambda_j F_j identically.  None if no such lambda exists
    within the degree bound."""
    if residual.is_zero():
        return [ZERO] * len(equations)
    pts = set()
    jets = set()
    for p in [residual, *equations]:
        for v in p.variables():
            k = kind(v)
            if k in (KIND_X, KIND_U):
                pts.add(v)
            elif k == KIND_JET:
                jets.add(v)
    if jet_degree is None:
        eq_deg = min(F.degree((KIND_JET,)) for F in equations)
        jet_degree = max(0, min(1, residual.degree((KIND_JET,)) - eq_deg))
    base = _monomials(pts, degree)
    monos = list(base)
    if jet_degree:
        monos += [tuple(sorted(m + (j,))) for j in sorted(jets) for m in base]
    cols = []
    rows: dict = {}
    for j, F in enumerate(equations):
        for mono in monos:
            c = len(cols)
            cols.append((j, mono))
            for fm, fc in F.terms.items():
                key = tuple(sorted(fm + mono))
                rows.setdefault(key, {})[c] = fc
    rhs = residual.terms
    for key in rhs:
        rows.setdefault(key, {})
    sol = linalg.solve(((rows[k], rhs.get(k, 0)) for k in sorted(rows)), len(cols))
    if sol is None:
        return None
    lam = [dict() for _ in equations]
    for c, v in sol.items():
        j, mono = cols[c]
        lam[j][mono] = v
    return [Polynomial.from_terms(d) for d in lam]


def _multiplier_verdict(raw, equations, X, degree) -> Verdict:
    if degree is None:
        degree = X.degree((KIND_X, KIND_U)) + 1
    mults = []
    ok = True
    res = []
    for r in raw:
        lam = find_multipliers(r, equations, degree)
        if lam is None:
            ok = False
            mults.append(None)
            res.append(as_rational(r))
        else:
            mults.append(lam)
            rem = r - sum((l * F for l, F in zip(lam, equations)), ZERO)
            res.append(as_rational(rem))
            ok = ok and rem.is_zero()
    return Verdict(ok, res, "multipliers", mults)


# -- Jacobi rank ------------------------------------------------------------

def jacobi_rank(F: DensityMap, samples, dependents=None) -> int:
    """Maximum over sample points of the exact rank of [dF^mu / du^a]."""
    samples = list(samples)
    if not samples:
        raise ValueError("at least one sample point is required")
    funcs = [as_rational(f) for f in F.F]
    if dependents is None:
        from .model import EH_SPACE
        dependents = EH_SPACE.us
    J = [[f.diff(u) for u in dependents] for f in funcs]
    best = 0
    for pt in samples:
        M = [[d.eval(pt) for d in row] for row in J]
        best = max(best, linalg.rank(M))
    return best
