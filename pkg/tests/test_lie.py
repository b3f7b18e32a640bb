import json
from fractions import Fraction

import pytest

from jetsym import catalog as cat
from jetsym import lie
from jetsym.errors import UnknownName

from helpers import random_field


def test_translations_commute():
    assert lie.commutator(cat.operator("P0@alg20"), cat.operator("P1@alg20")).is_zero()


def test_dilation_bracket():
    D, P0 = cat.operator("D@poincare-nl-conformal"), cat.operator("P0@poincare-nl-conformal")
    assert lie.commutator(D, P0) == -P0


def test_boost_bracket_by_hand():
    # [x0 d1 + x1 d0 + ..., x0 d2 + x2 d0 + ...] = x1 d2 - x2 d1 + field rotation = J12
    ops = cat.by_name(cat.catalog("lorentz-linear"))
    assert lie.commutator(ops["J01"], ops["J02"]) == ops["J12"]


def test_galilei_pair_in_span():
    ops = cat.catalog("alg20")
    named = cat.by_name(ops)
    for k in (1, 2, 3):
        for l in (1, 2, 3):
            br = lie.commutator(named[f"G1_{k}"], named[f"G2_{l}"])
            assert lie.in_span(br, ops)


def test_two_dimensional_table():
    ops = cat.by_name(cat.catalog("poincare-nl-conformal"))
    t = lie.structure_constants([ops["P0"], ops["D"]])
    assert t.closed and t.c == {(0, 1): {0: 1}}
    assert t.get(1, 0) == {0: -1}


@pytest.mark.parametrize("name,derived", [("alg20", 19), ("alg24", 24)])
def test_closure_and_jacobi(name, derived):
    t = lie.structure_constants(cat.catalog(name))
    assert t.closed
    assert lie.jacobi_check(t)
    assert t.derived_dimension() == derived


def test_corrupted_table_fails_jacobi():
    t = lie.structure_constants(cat.catalog("alg20"))
    key = next(k for k, row in sorted(t.c.items()) if len(row) == 1 and k[0] >= 4)
    (k, v), = t.c[key].items()
    bad = lie.StructureTable(t.basis, {**t.c, key: {k: -v}})
    assert not lie.jacobi_check(bad)


def test_not_closed_witness():
    ops = cat.by_name(cat.catalog("alg24"))
    t = lie.structure_constants([ops["P0"], ops["K0"]])
    assert not t.closed and t.witness == (0, 1)


def test_boost_decomposition():
    assert lie.verify_boost_decomposition()
    assert not lie.verify_boost_decomposition(scale=2)


@pytest.mark.parametrize("name", lie.RELATION_SETS)
def test_relation_reports(name):
    rep = lie.relation_report(name)
    assert rep.passed, [r.label for r in rep.failures()]


def test_k_d_sign_is_minus():
    rep = lie.relation_report("poincare-nl-conformal")
    kd = [r for r in rep.relations if r.label.startswith("[K") and r.label.endswith(",D]")]
    assert len(kd) == 4
    assert all(r.computed == {r.label[1:3]: -1} for r in kd)


def test_unknown_relation_set():
    with pytest.raises(UnknownName):
        lie.relation_report("euler-fluid")


def test_bracket_properties(rng):
    for _ in range(15):
        X, Y, Z = (random_field(rng, degree=2) for _ in range(3))
        assert lie.commutator(X, Y) == -lie.commutator(Y, X)
        assert lie.commutator(X + Y, Z) == lie.commutator(X, Z) + lie.commutator(Y, Z)
        assert lie.commutator(X.scale(Fraction(3, 2)), Y) == lie.commutator(X, Y).scale(Fraction(3, 2))
        jac = (lie.commutator(X, lie.commutator(Y, Z)) + lie.commutator(Y, lie.commutator(Z, X))
               + lie.commutator(Z, lie.commutator(X, Y)))
        assert jac.is_zero()


def test_table_export():
    doc = lie.structure_constants(cat.catalog("alg20")).to_json()
    json.dumps(doc)
    assert doc["closed"] and doc["jacobi"]
    assert len(doc["basis"]) == 20
    assert all(len(t) == 4 for t in doc["constants"])
