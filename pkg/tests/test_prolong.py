from fractions import Fraction

import pytest

from jetsym import catalog as cat
from jetsym import expr as ex
from jetsym.errors import ModeUnavailable
from jetsym.expr import J, U
from jetsym.model import DensityMap
from jetsym.prolong import (apply, check_conditional, check_invariance, find_multipliers,
                            jacobi_rank, prolong1)

from helpers import prolongation_fd_error, random_field


def test_translation_prolongs_to_zero():
    Xp = prolong1(cat.operator("P0@alg20"))
    assert all(z.is_zero() for z in Xp.zeta.values())


def test_dilation_prolongation():
    D = cat.operator("D@poincare-nl-conformal")
    Xp = prolong1(D)
    for a, name in enumerate(("E1", "E2", "E3", "H1", "H2", "H3")):
        for al in range(4):
            assert Xp.zeta[(a, al)] == -J(name, al)


def test_galilei_boost_prolongation():
    Xp = prolong1(cat.operator("G1_1@alg20"))
    for a, name in enumerate(("E1", "E2", "E3", "H1", "H2", "H3")):
        assert Xp.zeta[(a, 0)] == -J(name, 1)
        for al in (1, 2, 3):
            assert Xp.zeta[(a, al)].is_zero()


def test_apply_on_point_function_is_plain_derivation():
    X = cat.operator("G2_1@alg20")
    f = U("E1") * U("H2")
    assert apply(prolong1(X), f) == X(f)


def test_prolongation_finite_differences(rng):
    for _ in range(40):
        assert prolongation_fd_error(random_field(rng), rng) < 1e-6


@pytest.mark.parametrize("system,opset", [("eh-transport", "alg20"), ("complex-euler-real", "alg24"),
                                          ("maxwell", "conformal-linear-maxwell")])
def test_catalog_operators_are_symmetries(system, opset):
    sys_ = cat.catalog(system)
    for X in cat.catalog(opset):
        v = check_invariance(X, sys_)
        assert v.invariant, X.name
        assert all(r.is_zero() for r in v.residuals)


@pytest.mark.parametrize("opset", ["euler-poincare", "euler-galilei"])
def test_euler_fluid_multipliers(opset):
    sys_ = cat.catalog("euler-fluid")
    for X in cat.catalog(opset):
        assert check_invariance(X, sys_, mode="multipliers").invariant, X.name


def test_modes_agree_including_negative_controls():
    cases = [("eh-transport", cat.catalog("alg20") + [cat.operator("K0@alg24"), cat.operator("G2_1@alg24")]),
             ("complex-euler-real", cat.catalog("alg24") + [cat.operator("G2_1@alg20"), cat.operator("G1_2@alg20")])]
    for system, ops in cases:
        sys_ = cat.catalog(system)
        for X in ops:
            a = check_invariance(X, sys_).invariant
            b = check_invariance(X, sys_, mode="multipliers").invariant
            assert a == b, (system, X.name)
    assert not check_invariance(cat.operator("K0@alg24"), cat.catalog("eh-transport")).invariant


def test_printed_g2_form_fails_on_complex_euler():
    from jetsym.dsl import parse_vecfield
    X = parse_vecfield("field G = x1*d/dx0 - (E1*E1 - H1*H1)*d/dE1 - (E1*E2 - H1*H2)*d/dE1"
                       " - (E1*E3 - H1*H3)*d/dE1 - (E1*H1 + H1*E1)*d/dH1 - (E1*H2 + H1*E2)*d/dH2"
                       " - (E1*H3 + H1*E3)*d/dH3;")
    assert not check_invariance(X, cat.catalog("complex-euler-real")).invariant


def test_continuity_poynting_pair():
    cp, mx = cat.catalog("continuity-poynting"), cat.catalog("maxwell")
    for k in (1, 2, 3):
        X = cat.operator(f"J0{k}@lorentz-linear")
        v = check_invariance(X, cp)
        assert not v.invariant and v.nonzero() == [0]
        assert check_conditional(X, cp, mx).invariant
    for X in cat.catalog("lorentz-linear")[:3]:
        assert check_invariance(X, cp).invariant


def test_general_sources_and_rn_systems():
    boosts = [cat.operator(f"J0{k}@lorentz-linear") for k in (1, 2, 3)]
    zero = cat.catalog("gen-maxwell-sources")
    broken = cat.catalog("gen-maxwell-sources", R1="dot(E,E)")
    rn = cat.catalog("rn-maxwell", R="1 + dot(E,E) - dot(H,H)", N="dot(E,H)")
    rn_bad = cat.catalog("rn-maxwell", R="1 + dot(E,E)", N="dot(E,H)")
    div, cons = cat.catalog("rn-div"), cat.catalog("rn-div-constraint")
    for X in boosts:
        assert check_invariance(X, zero).invariant
        assert not check_invariance(X, broken).invariant
        assert check_invariance(X, rn, mode="multipliers").invariant
        assert not check_invariance(X, rn_bad, mode="multipliers").invariant
        assert check_conditional(X, div, cons, mode="multipliers").invariant
        assert not check_invariance(X, div).invariant


def test_substitution_needs_solved_form():
    with pytest.raises(ModeUnavailable):
        check_invariance(cat.operator("J01@lorentz-linear"), cat.catalog("rn-maxwell"))


def test_find_multipliers_identity():
    F = [J("E1", 0) - J("H1", 1), J("H1", 0) + U("E1")]
    r = 3 * F[0] - U("H2") * F[1]
    lam = find_multipliers(r, F, 1)
    assert lam == [ex.Polynomial.const(3), -U("H2")]
    assert find_multipliers(J("E2", 3), F, 2) is None


def test_poynting_rank():
    F = DensityMap(tuple(cat.poynting_density()))
    pts = [{u: Fraction(i + 2 * j - 3, j + 1) for j, u in enumerate(cat.EC + cat.HC)} for i in range(5)]
    assert jacobi_rank(F, pts) == 4
    assert jacobi_rank(F, pts[:1]) == 4


def test_degenerate_density_rank():
    F = DensityMap((U("E1"), U("E1") * 2, U("E1") * U("E1"), U("E1")))
    pts = [{u: k + 1 for k, u in enumerate(cat.EC + cat.HC)}]
    assert jacobi_rank(F, pts) == 1
