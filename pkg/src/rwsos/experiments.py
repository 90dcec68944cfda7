"""Workloads shared by the scripts and the acceptance tests."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import imp as I
from . import imp2 as I2
from .imp2 import EmbeddingReport, verify_embedding
from .sos import (ANY, PreservationReport, RuleSchema, Step, build_spec, derive_rw, imp2_to_rw_term,
                  imp_spec, imp_to_spec_term, random_cool_spec, random_term, rw_reader_step,
                  rw_writer_step, verify_preservation, x, y)
from .syntax import Num, Term, Var, VarStore
from .transitions import Done, Output, Silent


@dataclass
class EmbeddingConfig:
    depth: int = 4
    variables: tuple = ("x", "y")
    x_values: tuple = (-2, -1, 0, 1, 2)
    y_values: tuple = (0, 1, 2, 3)
    fuel: int = 100


def embedding_stores(cfg: EmbeddingConfig):
    return [VarStore({"x": a, "y": b}) for a in cfg.x_values for b in cfg.y_values]


def embedding_experiment(cfg: EmbeddingConfig = EmbeddingConfig()) -> EmbeddingReport:
    """Imp versus Imp² on every program up to ``cfg.depth`` and every store."""
    terms = I.enumerate_programs_ast(cfg.depth, cfg.variables)
    return verify_embedding(terms, embedding_stores(cfg), cfg.fuel)


@dataclass
class PreservationConfig:
    specs: int = 200
    terms: int = 50
    max_states: int = 3
    max_arity: int = 2
    term_depth: int = 4
    fuel: int = 30
    seed: int = 0


def preservation_experiment(cfg: PreservationConfig = PreservationConfig()):
    """L versus derived L² over random cool specs; returns the summed report."""
    total = PreservationReport()
    for i in range(cfg.specs):
        rng = random.Random(cfg.seed * 100_003 + i)
        spec = random_cool_spec(rng, max_states=cfg.max_states, max_arity=cfg.max_arity)
        terms = [random_term(spec, rng, rng.randint(1, cfg.term_depth)) for _ in range(cfg.terms)]
        r = verify_preservation(spec, terms, fuel=cfg.fuel)
        total.checked += r.checked
        total.agree_finished += r.agree_finished
        total.agree_diverging += r.agree_diverging
        total.cut += r.cut
        total.mismatches.extend((spec, *m) for m in r.mismatches)
    return total


# --- cool checker -----------------------------------------------------------


def _with_seq_rules(spec, seq_rules):
    rules = [(op, r) for op, rs in spec.rules.items() if op != "seq" for r in rs]
    rules += [("seq", r) for r in seq_rules]
    return build_spec(spec.states, dict(spec.arities), rules)


def cool_mutations(spec=None):
    """Imp-as-spec with seq broken in three ways: name -> (spec, expected reason)."""
    spec = spec or imp_spec()
    patience = RuleSchema(frozenset({1}), frozenset(), ANY, (ANY, ANY),
                          Step(Term("seq", (y(1), x(2))), "@1"))

    def on_term(c):
        return RuleSchema(frozenset(), frozenset({1}), ANY, (ANY, ANY), c)

    return {
        # the conclusion after x1 terminates still mentions x1
        "mentions-receiving": (_with_seq_rules(spec, [patience, on_term(Step(Term("seq", (x(1), x(2))), "@1"))]),
                               "mentions-receiving"),
        # the next state is the input state instead of the one x1 ended in
        "depends-on-input-state": (_with_seq_rules(spec, [patience, on_term(Step(x(2), "@s"))]),
                                   "depends-on-input-state"),
        # while x1 steps, seq discards it instead of waiting for it
        "no-patience-rule": (_with_seq_rules(spec, [
            RuleSchema(frozenset({1}), frozenset(), ANY, (ANY, ANY), Step(x(2), "@1")),
            on_term(Step(x(2), "@1"))]), "no-patience-rule"),
    }


# --- derive_rw fidelity -----------------------------------------------------


@dataclass
class FidelityReport:
    configurations: int = 0
    disagreements: list = field(default_factory=list)


def derive_rw_fidelity(depth: int = 3, n_stores: int = 10, values=(0, 1, 2, 3),
                       constants=(0, 1, 2), max_configs: int = 10_000) -> FidelityReport:
    """Derived L² of Imp-as-spec against hand-coded Imp², step by step.

    Starts from every reader of depth <= ``depth`` on ``n_stores`` stores and
    follows the hand-coded writer steps, comparing each reader step and each
    writer step after translation.
    """
    variables = ("x", "y")
    exprs = [Num(c) for c in constants] + [Var(v) for v in variables]
    spec = imp_spec(variables, values, exprs)
    rw = derive_rw(spec)
    stores = [VarStore(dict(zip(variables, vs)))
              for vs in itertools.product(values, repeat=2)][:n_stores]
    report = FidelityReport()

    def translate_step(r):
        if isinstance(r, Done):
            return Done(repr(r.final))
        if isinstance(r, Output):
            return Output(imp2_to_rw_term(r.next), repr(r.state))
        return Silent(imp2_to_rw_term(r.next))

    for p in I.enumerate_programs_ast(depth, variables, exprs):
        for s in stores:
            c = I2.reader_step(p, s)
            want = imp2_to_rw_term(c)
            got = rw_reader_step(rw, imp_to_spec_term(p), repr(s))
            report.configurations += 1
            if got != want:
                report.disagreements.append(("reader", p, s, want, got))
            seen = {c}
            todo = [c]
            while todo and len(seen) <= max_configs:
                c = todo.pop()
                r = I2.writer_step(c)
                report.configurations += 1
                want = translate_step(r)
                got = rw_writer_step(rw, imp2_to_rw_term(c))
                if got != want:
                    report.disagreements.append(("writer", c, None, want, got))
                if not isinstance(r, Done) and r.next not in seen:
                    seen.add(r.next)
                    todo.append(r.next)
    return report


# --- Ref² regression set ----------------------------------------------------

REF2_REGRESSION = (
    ("skip;skip", "skip", "skip"),
    ("skip;assign", "skip; #0 := 1", "#0 := 1"),
    ("skip;alloc", "skip; &(expr 1)", "&(expr 1)"),
    ("skip;proc", "skip; #0 := proc { skip }", "#0 := proc { skip }"),
    ("2+2", "#0 := 2; #0 := expr (!#0 (+) 2)", "#0 := 2; #0 := expr (!#0 (+) !#0)"),
    ("if-true", "if 1 { #0 := 1 } else { #0 := 2 }", "#0 := 1"),
    ("if-false", "if 0 { #0 := 1 } else { #0 := 2 }", "#0 := 2"),
    ("while-false", "while 0 { #0 := 1 }", "skip"),
    ("proc-body", "#0 := proc { skip; skip }", "#0 := proc { skip }", [("skip; skip", "skip")]),
    ("expr-arith", "expr (1 (+) 1)", "expr 2"),
    ("assign-twice", "#0 := 1; #0 := 1", "#0 := 1; skip"),
    # controls that must not be certified
    ("skip-vs-loop", "skip", "while 1 { skip }"),
    ("assign-vs-skip", "#0 := 1", "skip"),
)


@dataclass
class RegressionOutcome:
    name: str
    certified: bool
    refutation: object = None


def ref2_regression(max_size: int = 4, fuel: int = 200, pairs=REF2_REGRESSION):
    """Certify each pair both ways; every certified pair goes to ctx_refute."""
    from . import ref2 as F
    from .parse import parse_program
    from .transitions import Holds
    stores = F.default_stores()
    out = []
    for name, a, b, *extra in pairs:
        p, q = parse_program("ref2", a), parse_program("ref2", b)
        extra = [(parse_program("ref2", u), parse_program("ref2", v)) for u, v in (extra[0] if extra else ())]
        fwd, bwd = F.certify_both_ways(p, q, stores, fuel, extra)
        ok = isinstance(fwd, Holds) and isinstance(bwd, Holds)
        out.append(RegressionOutcome(name, ok, F.ctx_refute(p, q, max_size, stores) if ok else None))
    return out


# --- simulation oracles -----------------------------------------------------


def kernel_oracle(systems: int = 300, seed: int = 0, max_writers: int = 4):
    """Disagreements between greatest-simulation kernels and observation maps."""
    from .equivalence import greatest_simulation, kernel, observation, random_system, trace_equiv_finite
    from .transitions import Flavor
    rng = random.Random(seed)
    bad = []
    for _ in range(systems):
        sys_ = random_system(rng, n_readers=rng.randint(1, 3), n_writers=rng.randint(1, max_writers),
                             n_states=rng.randint(1, 3))
        for fl in Flavor:
            K = kernel(greatest_simulation(sys_, fl))
            for sort, carrier, rel in (("w", sys_.writers, K.w), ("r", sys_.readers, K.r)):
                for a, b in itertools.product(carrier, repeat=2):
                    same = observation(sys_, a, fl, sort) == observation(sys_, b, fl, sort)
                    if same != ((a, b) in rel):
                        bad.append((sys_, fl, a, b))
                    if fl is Flavor.TRACE and bool(trace_equiv_finite(sys_, a, b)) != same:
                        bad.append((sys_, "trace_equiv_finite", a, b))
    return bad


def brute_force_oracle(systems: int = 300, seed: int = 1, max_writers: int = 3):
    """Disagreements between greatest_simulation and the brute-force union."""
    from .equivalence import brute_force_greatest, greatest_simulation, random_system
    from .transitions import Flavor
    rng = random.Random(seed)
    bad = []
    for i in range(systems):
        sys_ = random_system(rng, n_readers=rng.randint(1, 2), n_writers=rng.randint(1, max_writers),
                             n_states=2, deterministic=i % 2 == 0)
        for fl in Flavor:
            if greatest_simulation(sys_, fl) != brute_force_greatest(sys_, fl):
                bad.append((sys_, fl))
    return bad


def weakening_oracle(triples: int = 500, seed: int = 2):
    """Returns (falses, holding): triples where strong and weak clauses disagree,
    and how many triples were simulations at all."""
    from .equivalence import check_simulation, check_weakening_property, greatest_simulation, random_relation, \
        random_system
    from .transitions import Flavor
    rng = random.Random(seed)
    falses, holding = [], 0
    for _ in range(triples):
        sys_ = random_system(rng, n_readers=2, n_writers=rng.randint(1, 4), n_states=2,
                             deterministic=rng.random() < 0.5)
        fl = rng.choice(list(Flavor))
        R = random_relation(rng, sys_, rng.choice([0.3, 0.6, 0.9]))
        if rng.random() < 0.3:
            R = greatest_simulation(sys_, fl)
        holding += bool(check_simulation(sys_, R, fl))
        if not check_weakening_property(sys_, R, fl):
            falses.append((sys_, fl, R))
    return falses, holding


# --- congruence -------------------------------------------------------------


@dataclass
class CongruenceConfig:
    imp2_trials: int = 1000
    specs: int = 10
    spec_trials: int = 20
    seed: int = 0


def congruence_experiment(cfg: CongruenceConfig = CongruenceConfig()):
    """flavour -> (counted, skipped, violations) over Imp², specs and derived L²."""
    from .trials import imp2_campaign, spec_campaign
    from .transitions import Flavor
    out = {}
    for fl in Flavor:
        c = imp2_campaign(cfg.seed, fl, cfg.imp2_trials)
        counted, skipped, violations = c.counted, c.skipped, list(c.violations)
        for i in range(cfg.specs):
            spec = random_cool_spec(random.Random(cfg.seed * 1000 + i), stop_prob=0.75)
            for via_rw in (False, True):
                c = spec_campaign(spec, cfg.seed * 1000 + i, fl, cfg.spec_trials, via_rw=via_rw)
                counted += c.counted
                skipped += c.skipped
                violations += c.violations
        out[fl] = (counted, skipped, violations)
    return out


# --- the flagship pair ------------------------------------------------------


def flagship_pair():
    """x := 1; x := 2 and x := 1; x := x + 1."""
    from .syntax import BinOp
    p = I.seq(I.assign("x", 1), I.assign("x", 2))
    q = I.seq(I.assign("x", 1), I.assign("x", BinOp("+", Var("x"), Num(1))))
    return p, q


def flagship_experiment(stores: int = 100, seed: int = 0, fuel: int = 1000):
    """(stores where the traces differ, resumption-bisimulation verdict)."""
    p, q = flagship_pair()
    rng = random.Random(seed)
    sample = [VarStore({"x": rng.randint(-50, 50), "y": rng.randint(-50, 50)}) for _ in range(stores)]
    differ = [s for s in sample if I.imp_trace(p, s, fuel) != I.imp_trace(q, s, fuel)]
    # the observer may set x to anything other than 1 after the first step
    perturbed = [VarStore({"x": 0}), VarStore({"x": 5})]
    return differ, I.check_resumption_bisim([(p, q)], perturbed, depth=2)
