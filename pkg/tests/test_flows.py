import json
import math
from fractions import Fraction

import pytest

from jetsym import catalog as cat
from jetsym import expr as ex
from jetsym import flows as fl
from jetsym.dsl import parse_vecfield
from jetsym.errors import GuardViolated, NonFinite, SingularLocus, UnknownName
from jetsym.expr import Polynomial, U
from jetsym.flows import Circular, FlowPoint, Hyperbolic

from helpers import random_flow_point, seeded

EXACT = FlowPoint.of([1, Fraction(1, 2), -2, 3], [Fraction(1, 3), 0, Fraction(-1, 5)],
                     [Fraction(1, 7), Fraction(2, 9), 0])


def test_galilei_shift_example():
    q = fl.closed_flow("G1_2@alg20", Fraction(1, 2), EXACT)
    assert q.x == (1, Fraction(1, 2), Fraction(-3, 2), 3)
    assert q.E == (Fraction(1, 3), Fraction(1, 2), Fraction(-1, 5))
    assert q.H == (Fraction(1, 7), Fraction(13, 18), 0)


def test_projective_example():
    q = fl.closed_flow("G2_1@alg20", 1, EXACT)
    # x0 + x1, E / (1 + E1), H / (1 + H1)
    assert q.x[0] == Fraction(3, 2)
    assert q.E == (Fraction(1, 4), 0, Fraction(-3, 20))
    assert q.H == (Fraction(1, 8), Fraction(7, 36), 0)


@pytest.mark.parametrize("name", sorted(fl.FLOWS))
def test_identity_at_zero(name):
    assert fl.closed_flow(name, 0, EXACT) == EXACT


def _rational_param(flow, t):
    if flow.kind == "hyperbolic":
        return Hyperbolic.rational(t)
    if flow.kind == "circular":
        return Circular.rational(t)
    return t


def _compose(flow, a, b):
    if flow.kind == "additive":
        return a + b
    return a.compose(b)


@pytest.mark.parametrize("name", sorted(fl.FLOWS))
def test_composition_exact(name):
    flow = fl.get_flow(name)
    a = _rational_param(flow, Fraction(1, 10))
    b = _rational_param(flow, Fraction(-1, 7))
    two = fl.closed_flow(name, a, fl.closed_flow(name, b, EXACT))
    one = fl.closed_flow(name, _compose(flow, a, b), EXACT)
    assert two.mode == "exact"
    assert two == one


@pytest.mark.parametrize("name", sorted(fl.FLOWS))
def test_rk4_matches_closed_form(name):
    theta = 0.2 if name.startswith("K") else 0.3
    X = cat.operator(name)
    rng = seeded(7)
    for _ in range(10):
        p = random_flow_point(rng)
        err = fl.numeric_flow(X, theta, p).distance(fl.closed_flow(name, theta, p))
        assert err <= 1e-8, err


@pytest.mark.parametrize("name", sorted(fl.FLOWS))
def test_generator_consistency(name):
    p = random_flow_point(seeded(3))
    est = fl.generator_estimate(name, p)
    val = fl.generator_value(cat.operator(name), p)
    assert max(abs(a - b) for a, b in zip(est, val)) < 1e-5


def _hand_complex_g2(a):
    th = Polynomial.var(ex.param("theta"))
    Ea, Ha = U(f"E{a}"), U(f"H{a}")
    den = (1 + th * Ea) ** 2 + th ** 2 * Ha ** 2
    E = [(U(f"E{l}") * (1 + th * Ea) + th * Ha * U(f"H{l}")) / den for l in (1, 2, 3)]
    H = [(U(f"H{l}") * (1 + th * Ea) - th * Ha * U(f"E{l}")) / den for l in (1, 2, 3)]
    return E, H


@pytest.mark.parametrize("a", [1, 2, 3])
def test_complex_projective_flow_by_hand(a):
    img = fl.symbolic_flow(f"G2_{a}@alg24")
    E, H = _hand_complex_g2(a)
    assert img[4:7] == E
    assert img[7:] == H
    th = Polynomial.var(ex.param("theta"))
    assert img[0] == ex.X(0) + th * ex.X(a)


def test_transport_boost_symbolic():
    img = fl.symbolic_flow("J01@alg20")
    c, s = Polynomial.var(ex.param("c")), Polynomial.var(ex.param("s"))
    E1, E2 = U("E1"), U("E2")
    assert img[4] == (E1 * c + s) / (E1 * s + c)
    assert img[5] == E2 / (E1 * s + c)


def test_unknown_flow():
    with pytest.raises(UnknownName):
        fl.get_flow("D0@alg20")


# -- invariants -------------------------------------------------------------

ZERO_PT = FlowPoint.of([0] * 4, [0] * 3, [0] * 3)


def test_invariant_examples():
    assert fl.invariant_value("I1", ZERO_PT) == 1
    same = FlowPoint.of([0] * 4, [1, 2, 3], [1, 2, 3])
    assert fl.invariant_value("I3", same) == 0
    p = FlowPoint.of([0] * 4, [1, 0, 0], [Fraction(1, 2), 0, 0])
    # |E|^2 |H|^2 / (E.H)^2 = 1 for parallel fields
    assert fl.invariant_value("I2", p) == 1
    with pytest.raises(SingularLocus):
        fl.invariant_value("I2", FlowPoint.of([0] * 4, [1, 0, 0], [0, 1, 0]))
    with pytest.raises(SingularLocus):
        fl.invariant_value("I4", ZERO_PT)


@pytest.mark.parametrize("inv", sorted(fl.INVARIANT_FAMILIES))
def test_symbolic_invariance(inv):
    for ref in fl.INVARIANT_FAMILIES[inv]:
        assert fl.symbolic_invariance(cat.operator(ref), inv), ref


def test_printed_fourth_invariant_fails():
    printed = fl.InvariantDef("I4p", "((dot(E,E) - dot(H,H)) + 4*dot(E,H)^2) / (dot(E,E) + dot(H,H))^2",
                              ("dot(E,E) + dot(H,H)",), "E = H = 0")
    assert not fl.symbolic_invariance(cat.operator("G2_1@alg24"), printed)


def test_negative_invariance():
    assert not fl.symbolic_invariance(cat.operator("G1_1@alg20"), "I1")
    assert not fl.symbolic_invariance(cat.operator("J01@alg24-lorentz"), "I1")


@pytest.mark.parametrize("inv", sorted(fl.INVARIANT_FAMILIES))
def test_drift_small(inv):
    rng = seeded(11)
    for ref in fl.INVARIANT_FAMILIES[inv]:
        p = random_flow_point(rng, field_scale=0.3)
        if inv == "I2":
            p = FlowPoint.of(p.x, (0.3, 0.1, -0.1), (0.2, 0.2, 0.1))
        assert fl.drift(cat.operator(ref), inv, 0.5, p) <= 1e-9, ref


def test_drift_negative_control():
    p = FlowPoint.of([0.1] * 4, [0.2, -0.1, 0.1], [0.1, 0.2, 0.0])
    assert fl.drift(cat.operator("G1_1@alg20"), "I1", 0.3, p) > 1e-3


def test_drift_detects_singular_crossing():
    p = FlowPoint.of([0.0] * 4, [0.1, 0.0, 0.0], [-0.1, 0.0, 0.0])
    with pytest.raises(GuardViolated):
        fl.drift(cat.operator("G1_1@alg20"), "I2", 0.3, p)


def test_closed_flow_guard():
    p = FlowPoint.of([0] * 4, [-2, 0, 0], [0, 0, 0])
    with pytest.raises(GuardViolated):
        fl.closed_flow("G2_1@alg20", 1, p)
    # the unguarded map still evaluates
    fl.closed_flow("G2_1@alg20", Fraction(1, 4), p, guard=False)


def test_non_finite_integration():
    X = parse_vecfield("field Y = x0^2*d/dx0;")
    p = FlowPoint.of([1.0, 0, 0, 0], [0] * 3, [0] * 3)
    with pytest.raises(NonFinite):
        fl.numeric_flow(X, 100.0, p, steps=10)


def test_default_steps():
    assert fl.default_steps(0.3) == 300
    assert fl.default_steps(-0.0005) == 1


def test_parameter_helpers():
    h = Hyperbolic.rational(Fraction(1, 3))
    assert h.c ** 2 - h.s ** 2 == 1
    assert math.isclose(h.theta, 2 * math.atanh(1 / 3))
    c = Circular.rational(Fraction(1, 2))
    assert c.c ** 2 + c.s ** 2 == 1
    with pytest.raises(ValueError):
        Hyperbolic.rational(1)


def test_point_json_round_trip():
    doc = json.loads(json.dumps(EXACT.to_json()))
    assert FlowPoint.from_json(doc) == EXACT
    with pytest.raises(ValueError):
        FlowPoint.from_json({"x": [0] * 4, "E": [0] * 3})


def test_trace_export():
    p = random_flow_point(seeded(5))
    rec = fl.flow_trace(cat.operator("J12@lorentz-linear"), 0.01, p, every=5)
    assert rec[0]["theta"] == 0.0 and len(rec) == 3
    lines = fl.dumps_trace(rec).splitlines()
    assert len(lines) == 3
    last = json.loads(lines[-1])
    assert math.isclose(last["theta"], 0.01)
    assert set(last["invariants"]) == {"I1", "I2", "I3", "I4", "I5"}
