import json

import pytest

from jetsym import catalog as cat
from jetsym import detsolve
from jetsym import expr as ex
from jetsym.dsl import parse_vecfield
from jetsym.errors import DegreeOverflow, ResourceLimit
from jetsym.expr import J
from jetsym.model import EH_SPACE, JetSpace, PdeSystem
from jetsym.prolong import check_invariance

# first verified run of eh-transport with deg (1, 2)
EH_ROWS_1_2 = 2552


@pytest.mark.parametrize("dx,du,n", [(0, 0, 10), (1, 2, 1400), (2, 2, 4200)])
def test_ansatz_size(dx, du, n):
    generic, a = detsolve.make_ansatz(EH_SPACE, dx, du)
    assert a.n_unknowns == n
    coefs = set()
    for c in generic.components:
        coefs |= {v for v in c.variables() if ex.kind(v) == ex.KIND_COEF}
    assert len(coefs) == n


def test_scalar_toy_system():
    sp = JetSpace(4, ("u",))
    toy = PdeSystem(sp, (J("u", 0),)).with_solved_form([ex.jet("u", 0)])
    b = detsolve.solve_symmetries(toy, 0, 0)
    assert b.dimension == 5
    for m in range(4):
        X = parse_vecfield(f"field T = d/dx{m};", sp)
        assert detsolve.span_contains(b, X)


def test_transport_constant_ansatz_brute_force():
    sys_ = cat.catalog("eh-transport")
    _, a = detsolve.make_ansatz(sys_.jet, 0, 0)
    passing = [i for i in range(a.n_unknowns) if check_invariance(a.basis_field(i), sys_).invariant]
    assert passing == [0, 1, 2, 3]
    b = detsolve.solve_symmetries(sys_, 0, 0)
    assert b.dimension == 4
    assert not detsolve.span_contains(b, parse_vecfield("field S = d/dE1;"))


def test_transport_linear_x_ansatz():
    sys_ = cat.catalog("eh-transport")
    _, a = detsolve.make_ansatz(sys_.jet, 1, 2)
    ds = detsolve.determining_system(sys_, a)
    assert len(ds.rows) == EH_ROWS_1_2
    assert len(ds.provenance) == len(ds.rows)
    b = detsolve.null_space(ds)
    assert b.dimension == 20
    # field components may not depend on x
    assert not detsolve.span_contains(b, parse_vecfield("field S = x1*d/dE1;"))
    # same rows with a process pool
    assert detsolve.determining_system(sys_, a, workers=2).rows == ds.rows


def test_transport_algebra(eh_basis):
    assert eh_basis.dimension == 20
    for X in cat.catalog("alg20"):
        assert detsolve.span_contains(eh_basis, X), X.name
    assert not detsolve.span_contains(eh_basis, cat.operator("K0@alg24"))
    for X in eh_basis.generators:
        assert check_invariance(X, eh_basis.system).invariant


def test_complex_euler_algebra(ce_basis):
    assert ce_basis.dimension == 24
    for X in cat.catalog("alg24"):
        assert detsolve.span_contains(ce_basis, X), X.name
    assert not detsolve.span_contains(ce_basis, cat.operator("G1_1@alg20"))


def test_generators_are_primitive_integer(eh_basis):
    for X in eh_basis.generators:
        coeffs = [c for comp in X.components for c in comp.terms.values()]
        assert all(getattr(c, "denominator", 1) == 1 for c in coeffs)
        vec = eh_basis.ansatz.vector_from_field(X)
        assert vec[min(vec)] > 0


def test_degree_overflow(eh_basis):
    with pytest.raises(DegreeOverflow):
        detsolve.span_contains(eh_basis, parse_vecfield("field Y = x0*x1*x2*d/dx0;"))


def test_resource_cap():
    sys_ = cat.catalog("eh-transport")
    _, a = detsolve.make_ansatz(sys_.jet, 1, 1)
    with pytest.raises(ResourceLimit):
        detsolve.determining_system(sys_, a, max_unknowns=10)
    with pytest.raises(ResourceLimit):
        detsolve.determining_system(sys_, a, max_rows=5)


def test_basis_export(eh_basis):
    doc = json.loads(detsolve.dumps_basis(eh_basis))
    assert doc["system"] == "eh-transport"
    assert doc["ansatz"] == {"deg_x": 2, "deg_u": 2}
    assert doc["dimension"] == 20 == len(doc["generators"])
    g = doc["generators"][0]
    assert len(g["xi"]) == 4 and len(g["phi"]) == 6
