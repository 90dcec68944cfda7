"""Command-line front end: ``rwsos <command> ...``.

Every command prints a JSON report (with ``schemaVersion``) on stdout and a
one-line summary on stderr. Exit status: 0 for Holds/Finished/NotFound,
1 for Fails/Violation/Counterexample, 2 for usage errors, 3 for
Inconclusive.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import os
import random
import sys

from . import imp as I
from . import imp2 as I2
from . import ref2 as F
from . import sos as S
from .equivalence import (FiniteRWSystem, Relation2, check_simulation, greatest_simulation,
                          lasso_normal_form)
from .parse import ParseError, parse_program, show_imp
from .syntax import Term, VarStore
from .transitions import Cut, Fails, Finished, Flavor, Holds, Inconclusive, Lasso

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON rendering


def jsonable(x, show=None):
    """Plain JSON data for results, terms, stores and verdicts."""
    if show is not None and isinstance(x, Term):
        return show(x)
    if isinstance(x, (VarStore, F.RefStore, F.Loc, Term)) or x is F.UNDEFINED:
        return repr(x)
    if isinstance(x, enum.Enum):
        return x.value
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        d = {"kind": type(x).__name__}
        for f in dataclasses.fields(x):
            d[f.name] = jsonable(getattr(x, f.name), show)
        return d
    if isinstance(x, dict):
        return {str(k): jsonable(v, show) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [jsonable(v, show) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return repr(x)


def outcome_of(v) -> str:
    return type(v).__name__


STATUS = {"Holds": 0, "Finished": 0, "NotFound": 0, "Pass": 0, "Store": 0, "Value": 0,
          "Cut": 0, "RunCut": 0, "Lasso": 0, "Stuck": 0, "Equivalent": 0, "Cool": 0,
          "Fails": 1, "Violation": 1, "Counterexample": 1, "Differ": 1, "NotCool": 1,
          "Inconclusive": 3}


def emit(args, report: dict, summary: str) -> int:
    report = {"schemaVersion": SCHEMA_VERSION, "command": args.command_name, **report}
    text = json.dumps(report, indent=2, sort_keys=False)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    print(summary, file=sys.stderr)
    return STATUS.get(report.get("outcome"), 0)


# ---------------------------------------------------------------------------
# argument helpers


def read_source(arg: str) -> str:
    """A program argument is a file path if such a file exists, else inline text."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def read_json(arg: str):
    try:
        with open(arg, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {arg}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{arg}: invalid JSON ({e})")


def parse_bindings(items, what):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"{what} binding {item!r} is not of the form k=v")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def var_store_from_flags(items) -> VarStore:
    try:
        return VarStore({k: int(v) for k, v in parse_bindings(items, "--store").items()})
    except ValueError as e:
        raise UsageError(f"bad --store value: {e}")


def ref_value(text: str):
    text = text.strip()
    if text.startswith("#"):
        return F.Loc(int(text[1:]))
    try:
        return int(text)
    except ValueError:
        pass
    if text.startswith("proc"):
        t = parse_program("ref2", text)
        return t.args[0]
    return parse_program("ref2", text)


def ref_store_from(bindings: dict) -> F.RefStore:
    try:
        return F.RefStore({int(k.lstrip("#")): ref_value(str(v)) for k, v in bindings.items()})
    except ValueError as e:
        raise UsageError(f"bad location binding: {e}")


def random_stores(rng: random.Random, variables, n: int, lo=-3, hi=3):
    variables = sorted(variables) or ["x"]
    return [VarStore({x: rng.randint(lo, hi) for x in variables}) for _ in range(n)]


def program_vars(t) -> set:
    from .syntax import expr_vars
    out = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Term):
            if x.op == "assign" and isinstance(x.args[0], str):
                out.add(x.args[0])
            stack.extend(x.args)
        elif isinstance(x, VarStore):
            out.update(x)
        elif hasattr(x, "op") or hasattr(x, "name"):
            out |= expr_vars(x)
    return out


# ---------------------------------------------------------------------------
# Imp / Imp²


def observe_imp(language, p, s, fuel, flavor: Flavor):
    """Run with cycle detection and project onto the flavour."""
    if language == "imp":
        t = I.imp_lasso(p, s, fuel)
    elif I2.is_writer(p):
        t = I2.imp2_trace(p, None, I2.embedding_fuel(fuel))
    else:
        t = I2.imp2_lasso(p, s, I2.embedding_fuel(fuel))
    if isinstance(t, Cut):
        return None, t
    if isinstance(t, Lasso):
        if flavor is Flavor.TRACE:
            return ("inf", lasso_normal_form(t)), t
        return ("div",), t
    obs = {Flavor.TRACE: ("fin", t.emitted, t.final), Flavor.COST: ("fin", len(t.emitted), t.final),
           Flavor.TERMINATION: ("fin", t.final)}[flavor]
    return obs, t


def cmd_run(args):
    p = parse_program(args.language, read_source(args.program))
    s = var_store_from_flags(args.store)
    if args.language == "imp":
        t = I.imp_trace(p, s, args.fuel)
    else:
        t = I2.imp2_trace(p, None if I2.is_writer(p) else s, args.fuel)
    report = {"inputs": {"language": args.language, "program": show_imp(p), "store": repr(s),
                         "fuel": args.fuel},
              "outcome": outcome_of(t), "result": jsonable(t)}
    if isinstance(t, Finished):
        summary = f"finished after {len(t.emitted)} emissions in {t.final!r}"
    else:
        summary = f"cut after {len(t.emitted)} emissions (fuel {args.fuel})"
    return emit(args, report, summary)


def cmd_equiv(args):
    flavor = Flavor.parse(args.flavor)
    p = parse_program(args.language, read_source(args.left))
    q = parse_program(args.language, read_source(args.right))
    if args.language == "imp2" and I2.is_writer(p) != I2.is_writer(q):
        raise UsageError("compare two readers or two writers")
    rng = random.Random(args.seed)
    stores = [var_store_from_flags(args.store)] if args.store else \
        random_stores(rng, program_vars(p) | program_vars(q), args.stores)
    if args.language == "imp2" and I2.is_writer(p):
        stores = [None]
    differ, undecided = None, 0
    for s in stores:
        a, ta = observe_imp(args.language, p, s, args.fuel, flavor)
        b, tb = observe_imp(args.language, q, s, args.fuel, flavor)
        if a is None or b is None:
            undecided += 1
            continue
        if a != b:
            differ = {"store": jsonable(s), "left": jsonable(ta), "right": jsonable(tb)}
            break
    outcome = "Differ" if differ else ("Inconclusive" if undecided == len(stores) else "Equivalent")
    report = {"inputs": {"language": args.language, "left": show_imp(p), "right": show_imp(q),
                         "flavor": flavor.value, "stores": len(stores), "fuel": args.fuel,
                         "seed": args.seed},
              "outcome": outcome, "undecided": undecided, "counterexample": differ}
    summary = {"Differ": "not equivalent: see counterexample",
               "Equivalent": f"equivalent on sample ({len(stores) - undecided} decided stores)",
               "Inconclusive": "every run exceeded the fuel"}[outcome]
    return emit(args, report, summary)


# ---------------------------------------------------------------------------
# stateful SOS


def load_spec_arg(path):
    try:
        return S.load_spec(read_json(path))
    except S.SpecError as e:
        raise UsageError(f"{path}: {e}")


def cmd_sos_check_cool(args):
    spec = load_spec_arg(args.spec)
    rep = S.check_cool(spec)
    report = {"inputs": {"spec": args.spec}, "outcome": "Cool" if rep.cool else "NotCool",
              "report": rep.to_json()}
    act = ", ".join(f"{f}: j={j}" for f, j in sorted(rep.active.items())) or "none"
    return emit(args, report, f"{rep.verdict}; active = {{{act}}}")


def cmd_sos_derive_rw(args):
    spec = load_spec_arg(args.spec)
    try:
        rw = S.derive_rw(spec)
    except S.NotCool as e:
        return emit(args, {"inputs": {"spec": args.spec}, "outcome": "NotCool",
                           "report": e.args[0].to_json()}, "spec is not cool")
    return emit(args, {"inputs": {"spec": args.spec}, "outcome": "Holds", "rw": rw.to_json()},
                f"derived {len(rw.active)} active and {len(rw.passive)} passive operators")


def cmd_sos_run(args):
    spec = load_spec_arg(args.spec)
    try:
        term = S.parse_term(args.term, spec.arities)
    except S.SpecError as e:
        raise UsageError(str(e))
    state = args.state or spec.states[0]
    if state not in spec.states:
        raise UsageError(f"unknown state {state!r}")
    t = S.l_trace(spec, term, state, args.fuel)
    report = {"inputs": {"spec": args.spec, "term": S.show_term(term), "state": state, "fuel": args.fuel},
              "outcome": outcome_of(t), "result": jsonable(t)}
    return emit(args, report, f"{outcome_of(t)} after {len(t.emitted)} steps")


def cmd_sos_verify(args):
    spec = load_spec_arg(args.spec)
    terms = S.enumerate_terms(spec, args.depth)
    rep = S.verify_preservation(spec, terms, fuel=args.fuel)
    report = {"inputs": {"spec": args.spec, "depth": args.depth, "fuel": args.fuel},
              "outcome": "Holds" if rep.ok else "Violation",
              "checked": rep.checked, "agreeFinished": rep.agree_finished,
              "agreeDiverging": rep.agree_diverging, "cut": rep.cut,
              "mismatches": [jsonable(m, S.show_term) for m in rep.mismatches[:20]]}
    return emit(args, report, f"{rep.checked} runs compared, {len(rep.mismatches)} mismatches")


# ---------------------------------------------------------------------------
# finite systems


def load_system(path):
    doc = read_json(path)
    try:
        return FiniteRWSystem.from_json(doc), doc
    except (KeyError, ValueError, TypeError) as e:
        raise UsageError(f"{path}: {e}")


def cmd_sim_check(args):
    system, doc = load_system(args.system)
    rel_doc = read_json(args.relation) if args.relation else doc.get("relation")
    if rel_doc is None:
        raise UsageError("no relation given (second argument or 'relation' key)")
    R = Relation2.from_json(rel_doc)
    v = check_simulation(system, R, args.flavor)
    report = {"inputs": {"system": args.system, "relation": args.relation, "flavor": args.flavor},
              "outcome": outcome_of(v), "verdict": jsonable(v)}
    summary = "simulation holds" if v else f"fails clause {v.clause} at {v.pair}"
    return emit(args, report, summary)


def cmd_sim_greatest(args):
    system, _ = load_system(args.system)
    R = greatest_simulation(system, args.flavor)
    report = {"inputs": {"system": args.system, "flavor": args.flavor}, "outcome": "Holds",
              "relation": R.to_json()}
    return emit(args, report, f"{len(R.r)} reader and {len(R.w)} writer pairs")


# ---------------------------------------------------------------------------
# Ref²


def cmd_ref2_run(args):
    p = parse_program("ref2", read_source(args.program))
    s = ref_store_from(parse_bindings(args.loc, "--loc"))
    r = F.ref_run(p, s, args.fuel)
    report = {"inputs": {"program": F.show(p), "store": repr(s), "fuel": args.fuel},
              "outcome": outcome_of(r), "result": jsonable(r, F.show)}
    return emit(args, report, f"{outcome_of(r)}: {jsonable(r, F.show)}")


def _ref_stores(doc_stores):
    if doc_stores is None:
        return F.default_stores()
    return [ref_store_from({k: str(v) for k, v in s.items()}) for s in doc_stores]


def cmd_ref2_sim_check(args):
    doc = read_json(args.relation)
    try:
        pairs = {(parse_program("ref2", a), parse_program("ref2", b)) for a, b in doc["r"]}
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{args.relation}: expected {{'r': [[p, q], ...]}} ({e})")
    stores = _ref_stores(doc.get("stores"))
    verdict, rel = F.ho_similarity(pairs, stores, args.fuel, doc.get("identity", True))
    report = {"inputs": {"relation": args.relation, "stores": [repr(s) for s in stores],
                         "fuel": args.fuel},
              "outcome": outcome_of(verdict), "verdict": jsonable(verdict, F.show),
              "writerPairs": len(rel.w)}
    if doc.get("bothWays"):
        back, _ = F.ho_similarity({(b, a) for a, b in pairs}, stores, args.fuel,
                                  doc.get("identity", True))
        report["converse"] = jsonable(back, F.show)
        if verdict and not back:
            report["outcome"] = outcome_of(back)
    return emit(args, report, f"{report['outcome']} ({len(rel.w)} writer pairs)")


def cmd_ref2_ctx_refute(args):
    p = parse_program("ref2", read_source(args.left))
    q = parse_program("ref2", read_source(args.right))
    stores = [ref_store_from(parse_bindings(args.loc, "--loc"))] if args.loc else F.default_stores()
    r = F.ctx_refute(p, q, args.max_size, stores, args.fuel)
    report = {"inputs": {"left": F.show(p), "right": F.show(q), "maxSize": args.max_size,
                         "fuel": args.fuel, "stores": [repr(s) for s in stores]},
              "outcome": outcome_of(r)}
    if isinstance(r, F.Counterexample):
        report["context"] = r.show()
        report["store"] = repr(r.store) if r.store is not None else None
        report["terminates"] = {"left": r.left, "right": r.right}
        summary = f"distinguished by context {r.show()}"
    else:
        report["contexts"] = r.contexts
        report["undecided"] = r.undecided
        summary = f"no distinguishing context among {r.contexts}"
    return emit(args, report, summary)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    ap = argparse.ArgumentParser(prog="rwsos", description="Reader-writer operational semantics workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fuel=1000):
        p.add_argument("--fuel", type=int, default=fuel)
        p.add_argument("-o", "--output", help="also write the report to this file")
        return p

    def flavor(p):
        p.add_argument("--flavor", "--semantics", dest="flavor", default="trace",
                       choices=["trace", "cost", "ter"])

    p = common(sub.add_parser("run", help="run an Imp or Imp² program"))
    p.add_argument("language", choices=["imp", "imp2"])
    p.add_argument("program")
    p.add_argument("--store", action="append", metavar="x=v")
    p.set_defaults(func=cmd_run, command_name="run")

    p = common(sub.add_parser("equiv", help="compare two programs on sampled stores"))
    p.add_argument("language", choices=["imp", "imp2"])
    p.add_argument("left")
    p.add_argument("right")
    flavor(p)
    p.add_argument("--stores", type=int, default=100)
    p.add_argument("--store", action="append", metavar="x=v")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_equiv, command_name="equiv")

    sos = sub.add_parser("sos", help="stateful SOS specifications").add_subparsers(dest="sub", required=True)
    p = common(sos.add_parser("check-cool"))
    p.add_argument("spec")
    p.set_defaults(func=cmd_sos_check_cool, command_name="sos-check-cool")
    p = common(sos.add_parser("derive-rw"))
    p.add_argument("spec")
    p.set_defaults(func=cmd_sos_derive_rw, command_name="sos-derive-rw")
    p = common(sos.add_parser("run"), fuel=100)
    p.add_argument("spec")
    p.add_argument("term")
    p.add_argument("--state")
    p.set_defaults(func=cmd_sos_run, command_name="sos-run")
    p = common(sos.add_parser("verify-preservation"), fuel=100)
    p.add_argument("spec")
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_sos_verify, command_name="sos-verify-preservation")

    sim = sub.add_parser("sim", help="finite reader-writer systems").add_subparsers(dest="sub", required=True)
    p = common(sim.add_parser("check"))
    p.add_argument("system")
    p.add_argument("relation", nargs="?")
    flavor(p)
    p.set_defaults(func=cmd_sim_check, command_name="sim-check")
    p = common(sim.add_parser("greatest"))
    p.add_argument("system")
    flavor(p)
    p.set_defaults(func=cmd_sim_greatest, command_name="sim-greatest")

    ref = sub.add_parser("ref2", help="Ref² programs").add_subparsers(dest="sub", required=True)
    p = common(ref.add_parser("run"))
    p.add_argument("program")
    p.add_argument("--loc", action="append", metavar="l=v")
    p.set_defaults(func=cmd_ref2_run, command_name="ref2-run")
    p = common(ref.add_parser("sim-check"))
    p.add_argument("relation")
    p.set_defaults(func=cmd_ref2_sim_check, command_name="ref2-sim-check")
    p = common(ref.add_parser("ctx-refute"), fuel=500)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--loc", action="append", metavar="l=v")
    p.set_defaults(func=cmd_ref2_ctx_refute, command_name="ref2-ctx-refute")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if getattr(args, "fuel", 1) < 1:
        print("rwsos: --fuel must be positive", file=sys.stderr)
        return 2
    if getattr(args, "max_size", 1) < 1 or getattr(args, "stores", 1) < 1:
        print("rwsos: sizes must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ParseError) as e:
        print(f"rwsos: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
