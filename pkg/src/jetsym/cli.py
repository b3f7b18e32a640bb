"""Command-line front end: ``jetsym <command> [options]``."""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import catalog as cat
from . import detsolve, flows, lie, prolong
from .dsl import parse_expr, parse_fields, parse_system, print_expr, print_vecfield
from .errors import JetsymError, ParseError, ResourceLimit, UnknownName, VerificationFailed
from .model import DensityMap

SCHEMA = "jetsym-report/1"

EXIT_OK = 0
EXIT_INTERNAL = 2
EXIT_RESOURCE = 3
EXIT_NOT_INVARIANT = 10
EXIT_USAGE = 64
EXIT_PARSE = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _enc(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.verdicts: list[dict] = []
        self.payload: dict = {}
        self.lines: list[str] = []

    def verdict(self, subject: str, passed: bool, **detail):
        self.verdicts.append({"subject": subject, "passed": bool(passed), **detail})

    def say(self, line: str = ""):
        self.lines.append(line)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)

    def to_json(self, status: int, timestamp: bool) -> dict:
        out = {"schema": SCHEMA, "command": self.command, "inputs": self.inputs,
               "verdicts": self.verdicts, "payload": self.payload, "exit_status": status}
        if timestamp:
            out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_enc) + "\n"


# -- input resolution -------------------------------------------------------

def _params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects KEY=EXPR, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_system(ref: str, params: dict | None = None):
    if os.path.isfile(ref):
        sys_ = parse_system(Path(ref).read_text(encoding="utf-8"))
        if not sys_.solved_form and sys_.leading:
            sys_ = sys_.with_solved_form(sys_.leading)
        return sys_
    return cat.catalog(ref, **(params or {}))


def load_operators(ref: str):
    if os.path.isfile(ref):
        return parse_fields(Path(ref).read_text(encoding="utf-8"))
    if "@" in ref:
        X = cat.operator(ref)
        return [X]
    ops = cat.catalog(ref)
    if not isinstance(ops, list):
        raise UnknownName(f"{ref!r} is a system, not an operator set")
    return ops


def load_point(args, rng):
    if args.point:
        return flows.FlowPoint.from_json(json.loads(Path(args.point).read_text(encoding="utf-8")))
    return random_point(rng)


def random_point(rng, field_scale=0.4):
    return flows.FlowPoint.of([rng.uniform(-1, 1) for _ in range(4)],
                              [rng.uniform(-field_scale, field_scale) for _ in range(3)],
                              [rng.uniform(-field_scale, field_scale) for _ in range(3)])


# -- commands ---------------------------------------------------------------

def cmd_check(args, rep: Report) -> int:
    sys_ = load_system(args.system, _params(args.param))
    ops = load_operators(args.op)
    cond = load_system(args.conditional) if args.conditional else None
    rep.inputs.update(system=sys_.name, op=args.op, conditional=cond.name if cond else None, mode=args.mode)
    results = []
    for X in ops:
        if cond is not None:
            v = prolong.check_conditional(X, sys_, cond, mode=args.mode)
        else:
            v = prolong.check_invariance(X, sys_, mode=args.mode)
        name = X.name or "X"
        bad = v.nonzero()
        rep.verdict(name, v.invariant, nonzero_equations=bad)
        results.append({"operator": name, "invariant": v.invariant, "reduction": v.reduction,
                        "residuals": [print_expr(r) for r in v.residuals]})
        rep.say(f"{name}: {'invariant' if v.invariant else 'NOT invariant'}"
                + ("" if v.invariant else f" (nonzero residual in equations {bad})"))
    rep.payload["results"] = results
    n_ok = sum(r["invariant"] for r in results)
    rep.say(f"{n_ok}/{len(results)} operators invariant on {sys_.name}"
            + (f" modulo {cond.name}" if cond else ""))
    return EXIT_OK if rep.passed else EXIT_NOT_INVARIANT


def cmd_solve(args, rep: Report) -> int:
    sys_ = load_system(args.system, _params(args.param))
    rep.inputs.update(system=sys_.name, deg_x=args.deg_x, deg_u=args.deg_u,
                      max_unknowns=args.max_unknowns, max_rows=args.max_rows)
    _, ansatz = detsolve.make_ansatz(sys_.jet, args.deg_x, args.deg_u)
    rep.payload["unknowns"] = ansatz.n_unknowns
    try:
        ds = detsolve.determining_system(sys_, ansatz, max_unknowns=args.max_unknowns, max_rows=args.max_rows)
    except ResourceLimit as e:
        rep.payload["diagnostics"] = str(e)
        raise
    basis = detsolve.null_space(ds)
    rep.payload.update(rows=len(ds.rows), dimension=basis.dimension, basis=detsolve.basis_export(basis))
    rep.say(f"{sys_.name}: {ansatz.n_unknowns} unknowns, {len(ds.rows)} determining rows")
    rep.say(f"symmetry algebra dimension (ansatz deg_x={args.deg_x}, deg_u={args.deg_u}): {basis.dimension}")
    rep.verdict("generators verified", True, count=basis.dimension)
    ref = cat.REFERENCE_BASIS.get(args.system)
    if ref:
        contained = {}
        for X in cat.catalog(ref):
            try:
                contained[X.name] = detsolve.span_contains(basis, X)
            except JetsymError:
                contained[X.name] = False
        rep.payload["span_contains"] = {"set": ref, "results": contained}
        ok = all(contained.values())
        rep.verdict(f"{ref} contained in computed span", ok,
                    missing=[k for k, v in contained.items() if not v])
        rep.say(f"{ref}: {sum(contained.values())}/{len(contained)} operators in the computed span")
    if args.out:
        Path(args.out).write_text(detsolve.dumps_basis(basis) + "\n", encoding="utf-8")
        rep.say(f"basis written to {args.out}")
    for X in basis.generators:
        rep.say("  " + print_vecfield(X, "X"))
    return EXIT_OK if rep.passed else EXIT_NOT_INVARIANT


def cmd_algebra(args, rep: Report) -> int:
    ops = load_operators(args.ops)
    rep.inputs.update(ops=args.ops, relations=args.relations)
    t = lie.structure_constants(ops)
    data = t.to_json()
    rep.payload["table"] = data
    rep.verdict("closed", t.closed, witness=list(t.witness) if t.witness else None)
    if t.closed:
        jac = lie.jacobi_check(t)
        rep.verdict("jacobi", jac)
        rep.payload["derived_dimension"] = t.derived_dimension()
        rep.say(f"{args.ops}: dimension {len(ops)}, closed, Jacobi {'pass' if jac else 'FAIL'}, "
                f"derived algebra dimension {t.derived_dimension()}")
    else:
        i, j = t.witness
        rep.say(f"{args.ops}: NOT closed; witness [{t.names[i]}, {t.names[j]}]")
    if args.ops in ("alg20", "alg20-lorentz"):
        ok = lie.verify_boost_decomposition()
        rep.verdict("J0k = G1_k + G2_k", ok)
        rep.say(f"J0k = G1_k + G2_k for k = 1, 2, 3: {'holds' if ok else 'FAILS'}")
    if args.relations:
        rr = lie.relation_report(args.ops)
        rep.payload["relations"] = rr.to_json()
        for r in rr.relations:
            if r.expected is not None:
                rep.verdict(r.label, r.passed)
        n = sum(1 for r in rr.relations if r.expected is not None)
        rep.say(f"commutation relations: {n - len(rr.failures())}/{n} pass")
        for r in rr.failures():
            rep.say(f"  FAIL {r.label}: expected {r.expected}, computed {r.computed}")
    return EXIT_OK if rep.passed else EXIT_NOT_INVARIANT


def cmd_flow(args, rep: Report) -> int:
    rng = random.Random(args.seed)
    p = load_point(args, rng)
    X = cat.operator(args.op)
    theta = float(args.theta) if not args.exact else Fraction(args.theta)
    rep.inputs.update(op=args.op, theta=str(args.theta), point=p.to_json(), seed=args.seed,
                      numeric=args.numeric, tol=args.tol)
    steps = args.steps or flows.default_steps(theta, args.rk4_step)
    try:
        flow = flows.get_flow(args.op)
    except UnknownName:
        flow = None
    image = None
    if flow is not None:
        image = flows.closed_flow(flow, theta, p)
        rep.payload["closed"] = image.to_json()
        rep.say(f"closed form {flow.name} at theta={args.theta}: {image.to_json()}")
    if args.numeric or flow is None:
        num = flows.numeric_flow(X, float(theta), p.as_float(), steps)
        rep.payload["numeric"] = num.to_json()
        rep.payload["steps"] = steps
        rep.say(f"RK4 ({steps} steps): {num.to_json()}")
        if image is not None:
            err = image.distance(num)
            rep.payload["max_error"] = err
            rep.verdict("closed vs numeric", err <= args.tol, max_error=err)
            rep.say(f"max component error {err:.3e} (tol {args.tol:g})")
    if args.trace:
        recs = flows.flow_trace(X, float(theta), p.as_float(), steps)
        Path(args.trace).write_text(flows.dumps_trace(recs), encoding="utf-8")
        rep.say(f"trace written to {args.trace}")
    return EXIT_OK if rep.passed else EXIT_NOT_INVARIANT


def cmd_invariants(args, rep: Report) -> int:
    names = [args.check] if args.check else sorted(flows.INVARIANTS)
    rng = random.Random(args.seed)
    rep.inputs.update(check=names, op=args.op, theta_max=args.theta_max, seed=args.seed,
                      drift_tol=args.drift_tol)
    out = {}
    for name in names:
        inv = flows.get_invariant(name)
        refs = flows.INVARIANT_FAMILIES[name] if args.op in (None, "family") else None
        ops = [cat.operator(r) for r in refs] if refs else load_operators(args.op)
        labels = list(refs) if refs else [X.name or "X" for X in ops]
        p = load_point(args, rng)
        res = {}
        for label, X in zip(labels, ops):
            sym = flows.symbolic_invariance(X, inv)
            d = flows.drift(X, inv, args.theta_max, p, flows.default_steps(args.theta_max, args.rk4_step))
            ok = sym and d <= args.drift_tol
            res[label] = {"symbolic": sym, "drift": d}
            rep.verdict(f"{name} under {label}", ok, symbolic=sym, drift=d)
            rep.say(f"{name} under {label}: symbolic {'invariant' if sym else 'NOT invariant'}, drift {d:.2e}")
        out[name] = {"expression": inv.text, "results": res}
    rep.payload["invariants"] = out
    return EXIT_OK if rep.passed else EXIT_NOT_INVARIANT


def _sample_points(k, rng):
    vals = [Fraction(n, d) for n in range(-5, 6) for d in (1, 2, 3, 7)]
    from .model import EH_SPACE
    return [{u: rng.choice(vals) for u in EH_SPACE.us} for _ in range(k)]


def load_density(ref: str) -> DensityMap:
    if ref == "poynting":
        return DensityMap(tuple(cat.poynting_density()))
    data = json.loads(Path(ref).read_text(encoding="utf-8"))
    F = data.get("F") if isinstance(data, dict) else None
    if not isinstance(F, list) or len(F) != 4:
        raise UsageError("density file must be a JSON object {\"F\": [four expressions]}")
    return DensityMap(tuple(parse_expr(str(f)) for f in F))


def cmd_rank(args, rep: Report) -> int:
    rng = random.Random(args.seed)
    F = load_density(args.density)
    pts = _sample_points(args.samples, rng)
    r = prolong.jacobi_rank(F, pts)
    rep.inputs.update(density=args.density, samples=args.samples, seed=args.seed)
    rep.payload.update(rank=r, samples=[[str(v) for v in p.values()] for p in pts])
    rep.verdict("full rank", r == 4, rank=r)
    rep.say(f"Jacobi rank of {args.density}: {r} (max over {args.samples} exact samples)")
    return EXIT_OK


def cmd_list(args, rep: Report) -> int:
    n = cat.names()
    rep.payload.update(n, flows=sorted(flows.FLOWS), invariants=sorted(flows.INVARIANTS))
    rep.say("systems: " + ", ".join(n["systems"]))
    rep.say("operator sets: " + ", ".join(n["operator_sets"]))
    rep.say("closed flows: " + ", ".join(sorted(flows.FLOWS)))
    rep.say("invariants: " + ", ".join(sorted(flows.INVARIANTS)))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    g.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from the JSON report")
    g.add_argument("--tol", type=float, default=1e-8, help="closed-form vs numeric tolerance (default 1e-8)")
    g.add_argument("--drift-tol", type=float, default=1e-9, help="invariant drift tolerance (default 1e-9)")
    g.add_argument("--rk4-step", type=float, default=1e-3, help="RK4 step size (default 1e-3)")
    g.add_argument("--seed", type=int, default=0, help="seed for random points and samples")

    parser = _Parser(prog="jetsym", description="Lie point symmetries of first-order field systems.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="test invariance of a system under operators")
    p.add_argument("--system", required=True, help="catalog system name or DSL file")
    p.add_argument("--op", required=True, help="operator set, NAME@SET, or DSL file of fields")
    p.add_argument("--conditional", help="constraint system (catalog name or DSL file)")
    p.add_argument("--mode", choices=("substitution", "multipliers"), default="substitution")
    p.add_argument("--param", action="append", metavar="KEY=EXPR", help="system parameter")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="compute the symmetry algebra under a polynomial ansatz")
    p.add_argument("--system", required=True)
    p.add_argument("--deg-x", type=int, default=2)
    p.add_argument("--deg-u", type=int, default=2)
    p.add_argument("--out", help="write the basis JSON here")
    p.add_argument("--param", action="append", metavar="KEY=EXPR")
    p.add_argument("--max-unknowns", type=int, default=detsolve.DEFAULT_MAX_UNKNOWNS)
    p.add_argument("--max-rows", type=int, default=detsolve.DEFAULT_MAX_ROWS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("algebra", parents=[common], help="structure constants and commutation relations")
    p.add_argument("--ops", required=True)
    p.add_argument("--relations", action="store_true")
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("flow", parents=[common], help="finite transformation of a one-parameter group")
    p.add_argument("--op", required=True, help="NAME@SET")
    p.add_argument("--theta", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--point", help="JSON point file {x, E, H}")
    src.add_argument("--random", action="store_true", help="seeded random point (default)")
    p.add_argument("--numeric", action="store_true", help="also integrate with RK4 and compare")
    p.add_argument("--exact", action="store_true", help="exact arithmetic for additive flows")
    p.add_argument("--steps", type=int)
    p.add_argument("--trace", help="write a JSON-lines trace of the RK4 trajectory")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("invariants", parents=[common], help="check field invariants along flows")
    p.add_argument("--check", choices=sorted(flows.INVARIANTS))
    p.add_argument("--op", help="operator set or NAME@SET (default: the invariant's own family)")
    p.add_argument("--theta-max", type=float, default=0.5)
    p.add_argument("--point")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("rank", parents=[common], help="Jacobi rank of an energy density map")
    p.add_argument("--density", default="poynting", help="'poynting' or JSON file {\"F\": [...]}")
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("list", parents=[common], help="list catalog entries")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"jetsym: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "json", "no_timestamp", "command")}
    rep = Report(args.command, {})
    try:
        status = args.func(args, rep)
    except UsageError as e:
        print(f"jetsym: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"jetsym: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimit as e:
        print(f"jetsym: resource limit: {e}", file=sys.stderr)
        status = EXIT_RESOURCE
        rep.verdict("resource limit", False, message=str(e))
    except VerificationFailed as e:
        print(f"jetsym: internal verification failed: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UnknownName, ValueError, JetsymError, OSError) as e:
        print(f"jetsym: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # pragma: no cover - defensive
        print(f"jetsym: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    rep.inputs = {**{k: v for k, v in inputs.items() if v is not None}, **rep.inputs}
    doc = rep.to_json(status, not args.no_timestamp)
    if args.json == "-":
        sys.stdout.write(dumps(doc))
    else:
        for line in rep.lines:
            print(line)
        if args.json:
            Path(args.json).write_text(dumps(doc), encoding="utf-8")
    return status


if __name__ == "__main__":
    sys.exit(main())
