"""Jet space, PDE systems and point vector fields."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import CircularSolvedForm, NotSolvable
from .expr import (
    KIND_JET,
    KIND_U,
    KIND_X,
    ZERO,
    Polynomial,
    RationalFunction,
    as_rational,
    dep,
    jet,
    kind,
    substitute,
    var_name,
    x,
)

EH = ("E1", "E2", "E3", "H1", "H2", "H3")
METRIC = (1, -1, -1, -1)


def levi_civita(k: int, l: int, n: int) -> int:
    """Fully antisymmetric symbol on indices 1..3 with eps_123 = 1."""
    if len({k, l, n}) < 3:
        return 0
    perm = (k - 1, l - 1, n - 1)
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class JetSpace:
    n_independent: int = 4
    dependents: tuple[str, ...] = EH
    order: int = 1

    @property
    def n_dependent(self) -> int:
        return len(self.dependents)

    @property
    def xs(self) -> tuple[int, ...]:
        return tuple(x(m) for m in range(self.n_independent))

    @property
    def us(self) -> tuple[int, ...]:
        return tuple(dep(n) for n in self.dependents)

    def jet_vars(self) -> tuple[int, ...]:
        return tuple(jet(u, m) for u in self.us for m in range(self.n_independent))

    def point_vars(self) -> tuple[int, ...]:
        return self.xs + self.us


EH_SPACE = JetSpace()


@dataclass(frozen=True, eq=False)
class VectorField:
    """Point-symmetry generator xi^mu d/dx_mu + phi^a d/du^a."""

    space: JetSpace
    xi: tuple[Polynomial, ...]
    phi: tuple[Polynomial, ...]
    name: str | None = None

    def __post_init__(self):
        if len(self.xi) != self.space.n_independent or len(self.phi) != self.space.n_dependent:
            raise ValueError("coefficient count does not match the jet space")
        for c in self.xi + self.phi:
            if c.has_kind(KIND_JET):
                raise ValueError("vector field coefficients must not depend on jet variables")

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, Polynomial], space: JetSpace = EH_SPACE, name=None):
        xi = tuple(coeffs.get(v, ZERO) for v in space.xs)
        phi = tuple(coeffs.get(v, ZERO) for v in space.us)
        return cls(space, xi, phi, name)

    @property
    def components(self) -> tuple[Polynomial, ...]:
        return self.xi + self.phi

    def as_dict(self) -> dict[int, Polynomial]:
        return {v: c for v, c in zip(self.space.point_vars(), self.components) if not c.is_zero()}

    def named(self, name: str) -> VectorField:
        return VectorField(self.space, self.xi, self.phi, name)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def degree(self, kinds=(KIND_X,)) -> int:
        return max((c.degree(kinds) for c in self.components if not c.is_zero()), default=0)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.space == other.space and self.components == other.components

    def __hash__(self):
        return hash((self.space, self.components))

    def _zip(self, other, op):
        if self.space != other.space:
            raise ValueError("vector fields live on different jet spaces")
        return VectorField(
            self.space,
            tuple(op(a, b) for a, b in zip(self.xi, other.xi)),
            tuple(op(a, b) for a, b in zip(self.phi, other.phi)),
        )

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        return VectorField(self.space, tuple(c * s for c in self.xi), tuple(c * s for c in self.phi), self.name)

    def __rmul__(self, s):
        return self.scale(s)

    def __call__(self, f):
        """Apply the field as a derivation to a function of (x, u)."""
        if isinstance(f, RationalFunction):
            n, d = self(f.num), self(f.den)
            if d.is_zero():
                return RationalFunction(n, f.den)
            return RationalFunction(n * f.den - f.num * d, f.den * f.den)
        out = ZERO
        present = f.variables()
        for v, c in zip(self.space.point_vars(), self.components):
            if c and v in present:
                out = out + c * f.diff(v)
        return out

    def __str__(self):
        from .dsl import print_vecfield

        return print_vecfield(self)


@dataclass(frozen=True, eq=False)
class PdeSystem:
    """Equations ``F_i = 0`` in first-order jet coordinates."""

    jet: JetSpace
    equations: tuple[Polynomial, ...]
    solved_form: Mapping[int, RationalFunction] | None = None
    leading: tuple[int, ...] = ()
    name: str = "system"
    source: str = ""

    def __post_init__(self):
        for e in self.equations:
            if e.is_zero():
                raise ValueError("equations must be nonzero polynomials")

    def __eq__(self, other):
        if not isinstance(other, PdeSystem):
            return NotImplemented
        return (self.jet, self.equations, self.leading, self.name) == (
            other.jet, other.equations, other.leading, other.name)

    def __hash__(self):
        return hash((self.jet, self.equations, self.leading, self.name))

    def with_solved_form(self, leading: Sequence[int]) -> PdeSystem:
        return to_solved_form(self, leading)

    def reduce(self, expr):
        """Substitute the solved form (one pass; images are leading-free)."""
        if not self.solved_form:
            return as_rational(expr)
        return as_rational(substitute(expr, self.solved_form))


def _linear_split(eq: Polynomial, leading: Sequence[int]):
    """Return (coefficients per leading var, remainder); raise if nonlinear."""
    lead = set(leading)
    coeffs = {v: {} for v in leading}
    rest = {}
    for m, c in eq.terms.items():
        hits = [v for v in m if v in lead]
        if len(hits) > 1:
            raise NotSolvable(f"equation is nonlinear in leading derivative {var_name(hits[0])}")
        if hits:
            v = hits[0]
            i = m.index(v)
            coeffs[v][m[:i] + m[i + 1:]] = c
        else:
            rest[m] = c
    return {v: Polynomial(t) for v, t in coeffs.items()}, Polynomial(rest)


def to_solved_form(sys: PdeSystem, leading: Sequence[int]) -> PdeSystem:
    """Solve the equations for one leading jet variable each.

    The equations must be jointly linear in the leading variables; the
    resulting linear system is solved exactly, so right-hand sides never
    mention a leading variable.
    """
    leading = tuple(leading)
    if len(leading) != len(sys.equations):
        raise NotSolvable("need exactly one leading derivative per equation")
    if len(set(leading)) != len(leading):
        raise NotSolvable("leading derivatives must be distinct")
    for v in leading:
        if kind(v) != KIND_JET:
            raise NotSolvable(f"{var_name(v)} is not a jet variable")
    n = len(leading)
    A: list[list] = []
    b: list = []
    for i, eq in enumerate(sys.equations):
        coeffs, rest = _linear_split(eq, leading)
        if coeffs[leading[i]].is_zero():
            raise NotSolvable(f"equation {i} does not contain {var_name(leading[i])}")
        A.append([as_rational(coeffs[v]) for v in leading])
        b.append(as_rational(-rest))
    if all(A[i][j].is_zero() for i in range(n) for j in range(n) if i != j):
        solved = {leading[i]: b[i] / A[i][i] for i in range(n)}
    else:
        solved = _cramer(A, b, leading)
    return PdeSystem(sys.jet, sys.equations, solved, leading, sys.name, sys.source)


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = ZERO
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _cramer(A, b, leading):
    """Polynomial Cramer rule: l_j = det(A with column j replaced by b) / det(A)."""
    n = len(A)
    if n > 6:
        raise CircularSolvedForm("coupled solved form with more than 6 leading derivatives is not supported")
    P = [[a.as_polynomial() for a in row] for row in A]
    bp = [v.as_polynomial() for v in b]
    d = _det(P)
    if d.is_zero():
        raise CircularSolvedForm("leading derivatives are not independently determined")
    out = {}
    for j in range(n):
        Mj = [row[:j] + [bp[i]] + row[j + 1:] for i, row in enumerate(P)]
        out[leading[j]] = RationalFunction(_det(Mj), d)
    return out


@dataclass(frozen=True)
class DensityMap:
    """Energy density and flux (F^0, F^1, F^2, F^3) as functions of (E, H)."""

    F: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.F) != 4:
            raise ValueError("a density map has exactly four components")
        for f in self.F:
            r = as_rational(f)
            if any(kind(v) != KIND_U for v in r.variables()):
                raise ValueError("density components depend on the fields only")
