"""Lie brackets of point fields, structure constants and relation checks.

Real-form convention: the complex operators with the factor i stripped are
the real fields of the catalog; a relation [A, B] = i c C among the complex
operators becomes [A, B] = c C among the real ones.  Lorentz generators are
assembled as M_0k = J0k, M_kl = -J_kl (k < l), M_ba = -M_ab, with metric
g = diag(1, -1, -1, -1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import catalog as cat
from . import linalg
from .errors import UnknownName
from .model import METRIC, VectorField


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^c = X(Y^c) - Y(X^c) componentwise."""
    if X.space != Y.space:
        raise ValueError("vector fields live on different jet spaces")
    comps = [X(b) - Y(a) for a, b in zip(X.components, Y.components)]
    n = X.space.n_independent
    return VectorField(X.space, tuple(comps[:n]), tuple(comps[n:]))


def _rows(fields):
    """Rows keyed by (component, monomial); columns are basis indices."""
    rows: dict = {}
    for j, X in enumerate(fields):
        for s, c in enumerate(X.components):
            for m, v in c.terms.items():
                rows.setdefault((s, m), {})[j] = v
    return rows


def decompose(X: VectorField, basis) -> dict | None:
    """Exact coefficients of X in ``basis`` (None if X is not in the span)."""
    rows = _rows(basis)
    target = {}
    for s, c in enumerate(X.components):
        for m, v in c.terms.items():
            target[(s, m)] = v
            rows.setdefault((s, m), {})
    sol = linalg.solve(((rows[k], target.get(k, 0)) for k in sorted(rows)), len(basis))
    if sol is None:
        return None
    return {k: v for k, v in sol.items() if v}


def in_span(X: VectorField, basis) -> bool:
    return decompose(X, basis) is not None


def combination(basis, coeffs: dict) -> VectorField:
    out = None
    for j, c in sorted(coeffs.items()):
        term = basis[j].scale(c)
        out = term if out is None else out + term
    if out is None:
        return basis[0].scale(0)
    return out


@dataclass
class StructureTable:
    basis: list
    c: dict  # (i, j) -> {k: Q}, i < j; antisymmetry implied
    closed: bool = True
    witness: tuple | None = None

    @property
    def names(self) -> list[str]:
        return [X.name or f"X{i}" for i, X in enumerate(self.basis)]

    def get(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return self.c.get((i, j), {})
        return {k: -v for k, v in self.c.get((j, i), {}).items()}

    def triples(self):
        for (i, j), row in sorted(self.c.items()):
            for k, v in sorted(row.items()):
                yield i, j, k, v

    def derived_dimension(self) -> int:
        """Dimension of the span of all brackets [X_i, X_j]."""
        return linalg.rank([[row.get(k, 0) for k in range(len(self.basis))] for row in self.c.values()])

    def to_json(self) -> dict:
        return {
            "basis": self.names,
            "constants": [[i, j, k, str(Fraction(v))] for i, j, k, v in self.triples()],
            "closed": self.closed,
            "jacobi": jacobi_check(self) if self.closed else None,
        }


def structure_constants(basis) -> StructureTable:
    basis = list(basis)
    table = {}
    for i, j in combinations(range(len(basis)), 2):
        br = commutator(basis[i], basis[j])
        if br.is_zero():
            continue
        coeffs = decompose(br, basis)
        if coeffs is None:
            return StructureTable(basis, table, False, (i, j))
        table[(i, j)] = coeffs
    return StructureTable(basis, table, True)


def jacobi_check(t: StructureTable) -> bool:
    """Sum over cyclic (i, j, k) of [[X_i, X_j], X_k] vanishes in the table."""
    n = len(t.basis)
    for i, j, k in combinations(range(n), 3):
        acc: dict = {}
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for m, v in t.get(a, b).items():
                for l, w in t.get(m, c).items():
                    acc[l] = acc.get(l, 0) + v * w
        if any(acc.values()):
            return False
    return True


def verify_boost_decomposition(scale=1) -> bool:
    """J0k of the transport Lorentz boosts equals G1_k + scale * G2_k for k = 1, 2, 3."""
    ops = cat.by_name(cat.catalog("alg20"))
    lor = cat.by_name(cat.catalog("alg20-lorentz"))
    return all(lor[f"J0{k}"] == ops[f"G1_{k}"] + ops[f"G2_{k}"].scale(scale) for k in (1, 2, 3))


# -- relation reports -------------------------------------------------------

@dataclass
class Relation:
    label: str
    expected: dict | None  # name -> coefficient; None = informational
    computed: dict | None = None  # name -> coefficient in the named frame
    passed: bool | None = None
    note: str = ""

    def to_json(self) -> dict:
        def fmt(d):
            return None if d is None else {k: str(Fraction(v)) for k, v in sorted(d.items())}
        return {"relation": self.label, "expected": fmt(self.expected), "computed": fmt(self.computed),
                "passed": self.passed, "note": self.note}


@dataclass
class RelationReport:
    setname: str
    relations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.relations if r.expected is not None)

    def failures(self) -> list:
        return [r for r in self.relations if r.expected is not None and not r.passed]

    def to_json(self) -> dict:
        return {"set": self.setname, "passed": self.passed, "relations": [r.to_json() for r in self.relations]}


def _lorentz_frame(ops, boost):
    """Named elements P_mu, M_ab (all ordered pairs a != b)."""
    frame = {f"P{m}": ops[f"P{m}"] for m in range(4) if f"P{m}" in ops}
    M = {}
    for k in (1, 2, 3):
        if boost:
            M[(0, k)] = boost(k)
    for k, l in cat.PAIRS:
        M[(k, l)] = -ops[f"J{k}{l}"] if f"J{k}{l}" in ops else -ops[f"J1_{k}{l}"]
    for (a, b), X in list(M.items()):
        M[(b, a)] = -X
    for (a, b), X in M.items():
        frame[f"M{a}{b}"] = X
    return frame


def _express(X: VectorField, frame: dict) -> dict | None:
    names = sorted(frame)
    # use one representative per antisymmetric pair so the frame is independent
    names = [n for n in names if not (n.startswith("M") and n[1] > n[2])]
    coeffs = decompose(X, [frame[n] for n in names])
    if coeffs is None:
        return None
    return {names[j]: v for j, v in coeffs.items()}


def _canon(d: dict) -> dict:
    """Rewrite M_ba as -M_ab and drop zeros."""
    out: dict = {}
    for n, v in d.items():
        if n.startswith("M") and n[1] > n[2]:
            n, v = f"M{n[2]}{n[1]}", -v
        out[n] = out.get(n, 0) + v
    return {n: v for n, v in out.items() if v}


def _check(rep, label, A, B, expected, frame, note=""):
    br = commutator(A, B)
    got = _express(br, frame)
    if expected is None:
        rep.relations.append(Relation(label, None, got, None, note or "informational"))
        return
    exp = _canon(expected)
    ok = got is not None and _canon(got) == exp
    rep.relations.append(Relation(label, exp, got, ok, note))


def _g(a, b):
    return METRIC[a] if a == b else 0


def _poincare_relations(rep, frame, with_p=True):
    idx = range(4)
    if with_p:
        for m, n in combinations(idx, 2):
            _check(rep, f"[P{m},P{n}]", frame[f"P{m}"], frame[f"P{n}"], {}, frame)
    pairs = [(a, b) for a, b in combinations(idx, 2)]
    if with_p:
        for m in idx:
            for a, b in pairs:
                exp = {f"P{b}": _g(m, a), f"P{a}": -_g(m, b)}
                _check(rep, f"[P{m},M{a}{b}]", frame[f"P{m}"], frame[f"M{a}{b}"], exp, frame)
    for (a, b), (m, n) in combinations(pairs, 2):
        exp: dict = {}
        for coef, (p, q) in ((_g(b, m), (a, n)), (_g(a, n), (b, m)), (-_g(a, m), (b, n)), (-_g(b, n), (a, m))):
            if coef and p != q:
                key = f"M{p}{q}"
                exp[key] = exp.get(key, 0) + coef
        _check(rep, f"[M{a}{b},M{m}{n}]", frame[f"M{a}{b}"], frame[f"M{m}{n}"], exp, frame)


def _conformal_relations(rep, frame, with_k=True):
    for m in range(4):
        _check(rep, f"[D,P{m}]", frame["D"], frame[f"P{m}"], {f"P{m}": -1}, frame)
    for a, b in combinations(range(4), 2):
        _check(rep, f"[D,M{a}{b}]", frame["D"], frame[f"M{a}{b}"], {}, frame)
    if not with_k:
        return
    for m, n in combinations(range(4), 2):
        _check(rep, f"[K{m},K{n}]", frame[f"K{m}"], frame[f"K{n}"], {}, frame)
    for m in range(4):
        _check(rep, f"[K{m},D]", frame[f"K{m}"], frame["D"], {f"K{m}": -1}, frame)
    for m in range(4):
        for a in range(4):
            _check(rep, f"[K{m},P{a}]", frame[f"K{m}"], frame[f"P{a}"], None, frame)
        for a, b in combinations(range(4), 2):
            _check(rep, f"[K{m},M{a}{b}]", frame[f"K{m}"], frame[f"M{a}{b}"], None, frame,
                   "informational: the printed right-hand side is index-inconsistent")


def _frame_for(setname):
    if setname not in RELATION_SETS:
        raise UnknownName(f"no relation table for {setname!r}")
    ops = cat.by_name(cat.catalog(setname))
    if setname in ("poincare-nl-conformal", "conformal-linear-maxwell", "lorentz-linear",
                   "alg20-lorentz", "alg24-lorentz"):
        frame = _lorentz_frame(ops, lambda k: ops[f"J0{k}"])
        if setname == "lorentz-linear" or setname.endswith("-lorentz"):
            frame = {k: v for k, v in frame.items() if k.startswith("M")}
        if "D" in ops:
            frame["D"] = ops["D"]
        for m in range(4):
            if f"K{m}" in ops:
                frame[f"K{m}"] = ops[f"K{m}"]
        return frame
    if setname in ("alg20", "alg24"):
        frame = _lorentz_frame(ops, lambda k: ops[f"G1_{k}"] + ops[f"G2_{k}"])
        frame["D"] = ops["D0"] + ops["D1"] + ops["D2"] + ops["D3"]
        for m in range(4):
            if f"K{m}" in ops:
                frame[f"K{m}"] = ops[f"K{m}"]
        return frame
    raise UnknownName(f"no relation expectations for operator set {setname!r}")


def _galilei_report(rep):
    ops = cat.by_name(cat.catalog("galilei-nl"))
    frame = {f"P{m}": ops[f"P{m}"] for m in range(4)}
    for k, l in cat.PAIRS:
        frame[f"M{k}{l}"] = -ops[f"J{k}{l}"]
    for k in (1, 2, 3):
        frame[f"G{k}"] = ops[f"G{k}"]
    frame["D"] = ops["D"]
    for m, n in combinations(range(4), 2):
        _check(rep, f"[P{m},P{n}]", frame[f"P{m}"], frame[f"P{n}"], {}, frame)
    _check(rep, "[D,P0]", frame["D"], frame["P0"], {"P0": -1}, frame)
    for k in (1, 2, 3):
        _check(rep, f"[D,P{k}]", frame["D"], frame[f"P{k}"], {f"P{k}": -2}, frame)
        _check(rep, f"[D,G{k}]", frame["D"], frame[f"G{k}"], {f"G{k}": 1}, frame)
        _check(rep, f"[P0,G{k}]", frame["P0"], frame[f"G{k}"], {}, frame)
        for l in (1, 2, 3):
            _check(rep, f"[P{l},G{k}]", frame[f"P{l}"], frame[f"G{k}"], {"P0": 1} if k == l else {}, frame)
    for k, l in combinations((1, 2, 3), 2):
        _check(rep, f"[G{k},G{l}]", frame[f"G{k}"], frame[f"G{l}"], {}, frame)
    pairs = list(cat.PAIRS)
    for m in (1, 2, 3):
        for a, b in pairs:
            for vec in ("P", "G"):
                exp = {f"{vec}{b}": _g(m, a), f"{vec}{a}": -_g(m, b)}
                _check(rep, f"[{vec}{m},M{a}{b}]", frame[f"{vec}{m}"], frame[f"M{a}{b}"], exp, frame)
    for (a, b), (m, n) in combinations(pairs, 2):
        exp: dict = {}
        for coef, (p, q) in ((_g(b, m), (a, n)), (_g(a, n), (b, m)), (-_g(a, m), (b, n)), (-_g(b, n), (a, m))):
            if coef and p != q:
                key = f"M{p}{q}"
                exp[key] = exp.get(key, 0) + coef
        _check(rep, f"[M{a}{b},M{m}{n}]", frame[f"M{a}{b}"], frame[f"M{m}{n}"], exp, frame)
    return rep


RELATION_SETS = ("poincare-nl-conformal", "conformal-linear-maxwell", "alg20", "alg24",
                 "lorentz-linear", "alg20-lorentz", "alg24-lorentz", "galilei-nl")


def relation_report(setname: str) -> RelationReport:
    """Check the hard-coded real-form commutation relations of a catalog set."""
    rep = RelationReport(setname)
    if setname == "galilei-nl":
        return _galilei_report(rep)
    frame = _frame_for(setname)
    _poincare_relations(rep, frame, with_p="P0" in frame)
    if "D" in frame:
        _conformal_relations(rep, frame, with_k="K0" in frame)
    return rep
