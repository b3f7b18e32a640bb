import random
from fractions import Fraction

from jetsym import expr as ex
from jetsym.flows import FlowPoint
from jetsym.model import EH_SPACE

POINT_VARS = EH_SPACE.point_vars()
JET_VARS = EH_SPACE.jet_vars()


def random_fraction(rng, span=5):
    return Fraction(rng.randint(-span, span), rng.randint(1, 4))


def random_poly(rng, variables=POINT_VARS, nterms=4, degree=3, span=5):
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0, degree)
        m = tuple(sorted(rng.choice(variables) for _ in range(d)))
        terms[m] = terms.get(m, 0) + random_fraction(rng, span)
    return ex.Polynomial.from_terms(terms)


def random_point(rng, variables, span=5):
    return {v: random_fraction(rng, span) for v in variables}


def random_flow_point(rng, field_scale=0.4):
    return FlowPoint.of([rng.uniform(-1, 1) for _ in range(4)],
                        [rng.uniform(-field_scale, field_scale) for _ in range(3)],
                        [rng.uniform(-field_scale, field_scale) for _ in range(3)])


def seeded(seed):
    return random.Random(seed)


def random_field(rng, degree=2, nterms=2):
    from jetsym.model import VectorField
    comps = [random_poly(rng, POINT_VARS, nterms=nterms, degree=degree, span=3) for _ in range(10)]
    return VectorField(EH_SPACE, tuple(comps[:4]), tuple(comps[4:]))


def prolongation_fd_error(X, rng, h=1e-4):
    """Compare prolong1(X) against central differences of the composites
    phi(x, u(x)) and xi(x, u(x)) along a random polynomial section u(x)."""
    from jetsym.prolong import prolong1
    xs, us = EH_SPACE.xs, EH_SPACE.us
    section = [random_poly(rng, xs, nterms=3, degree=2, span=2) for _ in us]
    x0 = [float(random_fraction(rng, 2)) / 2 for _ in xs]

    def point(xv):
        pt = dict(zip(xs, xv))
        for u, s in zip(us, section):
            pt[u] = float(s.eval(pt))
        return pt

    base = point(x0)
    jet_pt = dict(base)
    for u, s in zip(us, section):
        for al in range(4):
            jet_pt[ex.jet(u, al)] = float(s.diff(xs[al]).eval(dict(zip(xs, x0))))

    def dcomp(f, al):
        xp, xm = list(x0), list(x0)
        xp[al] += h
        xm[al] -= h
        return (float(f.eval(point(xp))) - float(f.eval(point(xm)))) / (2 * h)

    zeta = prolong1(X).zeta
    worst = 0.0
    for a, u in enumerate(us):
        for al in range(4):
            fd = dcomp(X.phi[a], al) - sum(jet_pt[ex.jet(u, j)] * dcomp(X.xi[j], al) for j in range(4))
            worst = max(worst, abs(fd - float(zeta[(a, al)].eval(jet_pt))))
    return worst


# (number, passed, summary) for each acceptance criterion that ran
ACCEPTANCE = []


def record_criterion(number, passed, summary):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {summary}"
    ACCEPTANCE.append((number, passed, line))
    print(line)
    return passed
