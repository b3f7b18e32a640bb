"""Determining equations for point symmetries under a polynomial ansatz."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import lcm

from . import linalg
from .dsl import print_expr
from .errors import DegreeOverflow, NotSolvable, ResourceLimit, VerificationFailed
from .expr import KIND_JET, KIND_X, ZERO, Polynomial, RationalFunction, coef, kind, substitute
from .model import JetSpace, PdeSystem, VectorField
from .prolong import apply, check_invariance, prolong1

DEFAULT_MAX_UNKNOWNS = 50_000
DEFAULT_MAX_ROWS = 2_000_000


def monomials(variables, degree: int) -> list[tuple]:
    """All monomials of total degree <= ``degree``, graded then lexicographic."""
    out = [()]
    for d in range(1, degree + 1):
        out.extend(combinations_with_replacement(tuple(variables), d))
    return out


@dataclass
class Ansatz:
    jet: JetSpace
    deg_x: int
    deg_u: int
    x_monomials: list = field(default_factory=list)
    u_monomials: list = field(default_factory=list)

    def __post_init__(self):
        if self.deg_x < 0 or self.deg_u < 0:
            raise ValueError("ansatz degrees must be non-negative")
        self.x_monomials = monomials(self.jet.xs, self.deg_x)
        self.u_monomials = monomials(self.jet.us, self.deg_u)
        self._index = {
            (s, xm, um): i for i, (s, xm, um) in enumerate(self.slots())
        }

    @property
    def n_slots(self) -> int:
        return self.jet.n_independent + self.jet.n_dependent

    @property
    def n_unknowns(self) -> int:
        return self.n_slots * len(self.x_monomials) * len(self.u_monomials)

    def slots(self):
        """Yield (component, x-monomial, u-monomial) in c_i order."""
        for s in range(self.n_slots):
            for xm in self.x_monomials:
                for um in self.u_monomials:
                    yield s, xm, um

    def basis_field(self, i: int) -> VectorField:
        s, xm, um = self._slot(i)
        comps = [ZERO] * self.n_slots
        comps[s] = Polynomial.from_terms({tuple(sorted(xm + um)): 1})
        n = self.jet.n_independent
        return VectorField(self.jet, tuple(comps[:n]), tuple(comps[n:]))

    def _slot(self, i):
        nx, nu = len(self.x_monomials), len(self.u_monomials)
        s, rest = divmod(i, nx * nu)
        ix, iu = divmod(rest, nu)
        return s, self.x_monomials[ix], self.u_monomials[iu]

    def index(self, component: int, mono: tuple) -> int:
        xm = tuple(v for v in mono if kind(v) == KIND_X)
        um = tuple(v for v in mono if kind(v) != KIND_X)
        try:
            return self._index[(component, xm, um)]
        except KeyError:
            raise DegreeOverflow(
                f"monomial of degree ({len(xm)}, {len(um)}) exceeds the ansatz ({self.deg_x}, {self.deg_u})"
            ) from None

    def field_from_vector(self, vec: dict) -> VectorField:
        comps: list[dict] = [{} for _ in range(self.n_slots)]
        for i, v in vec.items():
            s, xm, um = self._slot(i)
            comps[s][tuple(sorted(xm + um))] = v
        polys = [Polynomial.from_terms(c) for c in comps]
        n = self.jet.n_independent
        return VectorField(self.jet, tuple(polys[:n]), tuple(polys[n:]))

    def vector_from_field(self, X: VectorField) -> dict:
        if X.space != self.jet:
            raise ValueError("field lives on a different jet space")
        vec = {}
        for s, c in enumerate(X.components):
            for m, v in c.terms.items():
                vec[self.index(s, m)] = v
        return vec


def make_ansatz(jet: JetSpace, deg_x: int, deg_u: int) -> tuple[VectorField, Ansatz]:
    """Generic field whose coefficients carry one fresh c_i per ansatz slot."""
    a = Ansatz(jet, deg_x, deg_u)
    comps: list[dict] = [{} for _ in range(a.n_slots)]
    for i, (s, xm, um) in enumerate(a.slots()):
        comps[s][tuple(sorted(xm + um + (coef(i),)))] = 1
    polys = [Polynomial.from_terms(c) for c in comps]
    n = jet.n_independent
    return VectorField(jet, tuple(polys[:n]), tuple(polys[n:]), "generic"), a


@dataclass
class DeterminingSystem:
    system: PdeSystem
    ansatz: Ansatz
    rows: list  # primitive integer rows {c_i: int}
    provenance: list  # (equation index, jet monomial, (x,u) monomial)
    raw_rows: int = 0

    @property
    def n_unknowns(self) -> int:
        return self.ansatz.n_unknowns


def _homogenize_degree(sys: PdeSystem) -> int:
    return max(F.degree((KIND_JET,)) for F in sys.equations) + 1


def _unknown_residuals(sys: PdeSystem, ansatz: Ansatz, indices, K):
    """Numerators of the reduced residuals of basis fields ``indices``."""
    out = []
    for i in indices:
        Xp = prolong1(ansatz.basis_field(i))
        per_eq = []
        for F in sys.equations:
            r = substitute(apply(Xp, F), sys.solved_form, homogenize=K)
            if isinstance(r, RationalFunction):
                r = r.num
            per_eq.append(dict(r.terms))
        out.append((i, per_eq))
    return out


def _worker(args):
    sys, jet, deg_x, deg_u, indices, K = args
    return _unknown_residuals(sys, Ansatz(jet, deg_x, deg_u), indices, K)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("JETSYM_THREADS", "1")))
    except ValueError:
        return 1


def determining_system(sys: PdeSystem, ansatz: Ansatz, max_unknowns: int = DEFAULT_MAX_UNKNOWNS,
                       max_rows: int = DEFAULT_MAX_ROWS, workers: int | None = None) -> DeterminingSystem:
    """Linear conditions on the c_i making the generic field a symmetry.

    Each basis field (one monomial in one slot) is prolonged and applied to
    every equation; the reduced numerators are collected per (equation,
    monomial), giving one linear form in the c_i per collected coefficient.
    """
    if not sys.solved_form:
        raise NotSolvable(f"system {sys.name} needs a solved form for the determining equations")
    if ansatz.jet != sys.jet:
        raise ValueError("ansatz and system live on different jet spaces")
    n = ansatz.n_unknowns
    if n > max_unknowns:
        raise ResourceLimit(f"ansatz has {n} unknowns, limit is {max_unknowns}")
    K = _homogenize_degree(sys)
    workers = workers or _threads()
    indices = list(range(n))
    if workers > 1 and n > 200:
        chunk = -(-n // (workers * 4))
        parts = [indices[k:k + chunk] for k in range(0, n, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for part in pool.map(_worker, [(sys, ansatz.jet, ansatz.deg_x, ansatz.deg_u, p, K) for p in parts]):
                results.extend(part)
    else:
        results = _unknown_residuals(sys, ansatz, indices, K)

    collected: dict = {}
    for i, per_eq in results:
        for e, terms in enumerate(per_eq):
            for m, c in terms.items():
                collected.setdefault((e, m), {})[i] = c
                if len(collected) > max_rows:
                    raise ResourceLimit(f"determining system exceeds {max_rows} rows")
    rows, prov, seen = [], [], set()
    for (e, m) in sorted(collected):
        row = _normalize(collected[(e, m)])
        if not row:
            continue
        key = tuple(sorted(row.items()))
        if key in seen:
            continue
        seen.add(key)
        jm = tuple(v for v in m if kind(v) == KIND_JET)
        pm = tuple(v for v in m if kind(v) != KIND_JET)
        rows.append(row)
        prov.append((e, jm, pm))
    return DeterminingSystem(sys, ansatz, rows, prov, len(collected))


def _normalize(row: dict) -> dict:
    row = {k: v for k, v in row.items() if v}
    if not row:
        return row
    row = linalg.integer_row(row)
    if row[min(row)] < 0:
        row = {k: -v for k, v in row.items()}
    return row


@dataclass
class SymmetryBasis:
    system: PdeSystem
    ansatz: Ansatz
    vectors: list  # RREF null-space vectors {c_i: Q}
    generators: list
    free: list  # free column of each vector

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def to_json(self) -> dict:
        return basis_export(self)


def _integer_generator(vec: dict) -> dict:
    dens = [v.denominator for v in vec.values() if isinstance(v, Fraction)]
    scale = lcm(*dens) if dens else 1
    row = linalg._primitive({k: int(v * scale) for k, v in vec.items() if v})
    if row[min(row)] < 0:
        row = {k: -v for k, v in row.items()}
    return row


def null_space(ds: DeterminingSystem, verify: bool = True) -> SymmetryBasis:
    """Exact kernel of the determining rows, one generator per free unknown."""
    ech = linalg.SparseEchelon()
    for row in ds.rows:
        ech.add(row)
    vectors = ech.null_space(ds.n_unknowns)
    free = [min(k for k in vec if k not in ech.pivots) for vec in vectors]
    gens = []
    for vec in vectors:
        X = ds.ansatz.field_from_vector(_integer_generator(vec))
        if verify:
            v = check_invariance(X, ds.system)
            if not v.invariant:
                raise VerificationFailed(f"null vector {len(gens)} is not a symmetry of {ds.system.name}")
        gens.append(X)
    return SymmetryBasis(ds.system, ds.ansatz, vectors, gens, free)


def solve_symmetries(sys: PdeSystem, deg_x: int = 2, deg_u: int = 2, **kw) -> SymmetryBasis:
    _, a = make_ansatz(sys.jet, deg_x, deg_u)
    return null_space(determining_system(sys, a, **kw))


def span_contains(basis: SymmetryBasis, X: VectorField) -> bool:
    """Exact membership of X in the span of the computed basis.

    In RREF form the free column of each basis vector appears in no other
    vector, so X is in the span iff it equals sum_f X[f] * b_f.
    """
    v = {k: c for k, c in basis.ansatz.vector_from_field(X).items() if c}
    combo: dict = {}
    for f, b in zip(basis.free, basis.vectors):
        w = v.get(f, 0)
        if w:
            for k, c in b.items():
                combo[k] = combo.get(k, 0) + w * c
    return {k: c for k, c in combo.items() if c} == v


def basis_export(basis: SymmetryBasis) -> dict:
    gens = []
    for X in basis.generators:
        g = {"xi": [print_expr(c) for c in X.xi], "phi": [print_expr(c) for c in X.phi]}
        if X.name:
            g["name"] = X.name
        gens.append(g)
    return {
        "system": basis.system.name,
        "ansatz": {"deg_x": basis.ansatz.deg_x, "deg_u": basis.ansatz.deg_u},
        "dimension": basis.dimension,
        "generators": gens,
    }


def dumps_basis(basis: SymmetryBasis) -> str:
    return json.dumps(basis_export(basis), indent=2, sort_keys=True)
