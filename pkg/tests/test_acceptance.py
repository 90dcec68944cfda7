"""Acceptance criteria, one test each.

Every test prints a single ``[ACCEPT n] PASS|FAIL`` line with its measured
numbers and time budget, then asserts. Run with ``pytest -s`` to see them.
"""

import random
import time

import pytest

from rwsos import imp as I
from rwsos import imp2 as I2
from rwsos import ref2 as F
from rwsos.equivalence import Relation2
from rwsos.experiments import (CongruenceConfig, EmbeddingConfig, PreservationConfig, brute_force_oracle,
                               congruence_experiment, cool_mutations, derive_rw_fidelity,
                               embedding_experiment, flagship_experiment, kernel_oracle,
                               preservation_experiment, ref2_regression, weakening_oracle)
from rwsos.parse import parse_program
from rwsos.sos import check_cool, imp_spec
from rwsos.syntax import BinOp, Num, Var, VarStore
from rwsos.transitions import Done, Fails, Holds, Output, Silent

# time budgets in seconds
BUDGET = {1: 1.0, 2: 1.0, 3: 120.0, 4: 120.0, 5: 1.0, 6: 10.0, 7: 60.0, 8: 30.0, 9: 120.0, 10: 300.0}


def verdict(n, ok, elapsed, detail):
    ok_time = elapsed < BUDGET[n]
    status = "PASS" if ok and ok_time else "FAIL"
    print(f"\n[ACCEPT {n}] {status} {detail}; {elapsed:.2f}s (budget {BUDGET[n]:.0f}s)")
    assert ok, detail
    assert ok_time, f"took {elapsed:.1f}s, budget {BUDGET[n]}s"


# --- 1: the Imp and Imp² rules, instantiated at concrete stores ------------

S0 = VarStore({"x": 3, "y": 1})
S1 = VarStore({"x": 0})
P = I.assign("x", 7)
Q = I.assign("y", BinOp("+", Var("x"), Num(1)))
LOOP = I.while_(Var("x"), I.assign("x", BinOp("-", Var("x"), Num(1))))


def imp_golden():
    """(name, actual, expected) for every rule of the Imp semantics."""
    return [
        ("seq-step", I.imp_step(I.seq(LOOP, Q), S0),
         I.Continue(I.seq(I.seq(LOOP.args[1], LOOP), Q), S0)),
        ("seq-done", I.imp_step(I.seq(P, Q), S0), I.Continue(Q, S0.set("x", 7))),
        ("skip", I.imp_step(I.SKIP, S0), Done(S0)),
        ("assign", I.imp_step(Q, S0), Done(S0.set("y", 4))),
        ("while-false", I.imp_step(LOOP, S1), Done(S1)),
        ("while-true", I.imp_step(LOOP, S0), I.Continue(I.seq(LOOP.args[1], LOOP), S0)),
    ]


def imp2_golden():
    c = I2.out(S1, I2.ret(S0))
    return [
        # readers
        ("r-seq", I2.reader_step(I.seq(P, Q), S0), I2.wseq(I2.run(P, S0), Q)),
        ("r-skip", I2.reader_step(I.SKIP, S0), I2.ret(S0)),
        ("r-assign", I2.reader_step(P, S0), I2.ret(S0.set("x", 7))),
        ("r-while-false", I2.reader_step(LOOP, S1), I2.ret(S1)),
        ("r-while-true", I2.reader_step(LOOP, S0),
         I2.out(S0, I2.run(I.seq(LOOP.args[1], LOOP), S0))),
        # writers
        ("w-run", I2.writer_step(I2.run(P, S0)), Silent(I2.ret(S0.set("x", 7)))),
        ("w-ret", I2.writer_step(I2.ret(S0)), Done(S0)),
        ("w-out", I2.writer_step(c), Output(I2.ret(S0), S1)),
        ("w-seq-out", I2.writer_step(I2.wseq(c, Q)), Output(I2.wseq(I2.ret(S0), Q), S1)),
        ("w-seq-silent", I2.writer_step(I2.wseq(I2.run(P, S0), Q)),
         Silent(I2.wseq(I2.ret(S0.set("x", 7)), Q))),
        ("w-seq-done", I2.writer_step(I2.wseq(I2.ret(S1), Q)), Output(I2.run(Q, S1), S1)),
    ]


def test_criterion_1_rule_golden_cases():
    t = time.perf_counter()
    cases = imp_golden() + imp2_golden()
    wrong = [name for name, got, want in cases if got != want]
    elapsed = time.perf_counter() - t
    verdict(1, not wrong, elapsed, f"{len(cases) - len(wrong)}/{len(cases)} golden cases exact, wrong={wrong}")


# --- 2: the flagship pair ----------------------------------------------------


def test_criterion_2_flagship_pair():
    t = time.perf_counter()
    differ, bisim = flagship_experiment(stores=100, seed=0, fuel=1000)
    elapsed = time.perf_counter() - t
    ok = not differ and isinstance(bisim, Fails) and bisim.depth == 2
    verdict(2, ok, elapsed, f"traces differ on {len(differ)}/100 stores; resumption check {type(bisim).__name__}"
                            f" at depth {getattr(bisim, 'depth', None)}")


# --- 3: semantics preservation ----------------------------------------------


@pytest.mark.slow
def test_criterion_3_semantics_preservation():
    t = time.perf_counter()
    emb = embedding_experiment(EmbeddingConfig())
    t_emb = time.perf_counter() - t
    pres = preservation_experiment(PreservationConfig())
    elapsed = time.perf_counter() - t
    ok = emb.ok and pres.ok
    verdict(3, ok, elapsed,
            f"embedding: {emb.checked} runs, {len(emb.mismatches)} mismatches "
            f"({emb.agree_finished} finished, {emb.agree_diverging} certified infinite, "
            f"{emb.cut_cut + emb.one_cut} cut) in {t_emb:.1f}s; "
            f"preservation: {pres.checked} runs, {len(pres.mismatches)} mismatches ({pres.cut} cut)")


# --- 4: congruence -----------------------------------------------------------


def test_criterion_4_congruence():
    t = time.perf_counter()
    res = congruence_experiment(CongruenceConfig())
    elapsed = time.perf_counter() - t
    ok = all(counted >= 1000 and not v for counted, _, v in res.values())
    detail = "; ".join(f"{fl.value}: {c} trials, {len(v)} violations, {s} skipped"
                       for fl, (c, s, v) in res.items())
    verdict(4, ok, elapsed, detail)


# --- 5: cool checker ---------------------------------------------------------


def test_criterion_5_cool_checker():
    t = time.perf_counter()
    base = check_cool(imp_spec())
    results = {}
    for name, (spec, want) in cool_mutations().items():
        rep = check_cool(spec)
        results[name] = (not rep.cool) and want in rep.reasons("seq", 1)
    elapsed = time.perf_counter() - t
    ok = base.cool and base.active == {"seq": 1} and all(results.values())
    verdict(5, ok, elapsed, f"Imp cool with {base.active}; mutations rejected correctly: {results}")


# --- 6: derive_rw fidelity ---------------------------------------------------


def test_criterion_6_derive_rw_fidelity():
    t = time.perf_counter()
    rep = derive_rw_fidelity(depth=3, n_stores=10)
    elapsed = time.perf_counter() - t
    verdict(6, not rep.disagreements, elapsed,
            f"{rep.configurations} steps compared, {len(rep.disagreements)} disagreements")


# --- 7: simulation oracles ---------------------------------------------------


def test_criterion_7_simulation_oracles():
    t = time.perf_counter()
    k = kernel_oracle(systems=300, seed=0, max_writers=4)
    b = brute_force_oracle(systems=300, seed=1, max_writers=3)
    elapsed = time.perf_counter() - t
    verdict(7, not k and not b, elapsed,
            f"kernel vs maps: {len(k)} disagreements; greatest vs brute force: {len(b)} disagreements")


# --- 8: weakening --------------------------------------------------------------


def test_criterion_8_weakening():
    t = time.perf_counter()
    falses, holding = weakening_oracle(triples=500, seed=2)
    elapsed = time.perf_counter() - t
    verdict(8, not falses, elapsed, f"500 triples ({holding} simulations), {len(falses)} falses")


# --- 9: Ref² examples ----------------------------------------------------------


def ref(text):
    return parse_program("ref2", text)


def test_criterion_9_ref2_examples():
    t = time.perf_counter()
    stores = F.default_stores()
    fuel = 200
    checks = {}
    readers = [ref(x) for x in ("skip", "#0 := 1", "while !#0 { #0 := !#0 (-) 1 }", "&(expr 1)",
                                "#0 := proc { skip }", "while 1 { skip }")]
    T = F.skipping_relation(readers, stores)
    checks["T holds"] = isinstance(F.check_ho_termination_sim(T, stores, fuel), Holds)
    Q = F.proc_assignment_relation(T, F.Loc(0), stores)
    checks["Q holds"] = isinstance(F.check_ho_termination_sim(Q, stores, fuel), Holds)

    a, b = ref("#0 := 2; #0 := expr (!#0 (+) 2)"), ref("#0 := 2; #0 := expr (!#0 (+) !#0)")
    s0 = F.RefStore({0: 0})
    four = F.Store(F.RefStore({0: 4}))
    checks["2+2 results"] = F.ref_run(a, s0, 100) == four == F.ref_run(b, s0, 100)
    fwd, bwd = F.certify_both_ways(a, b, stores, fuel)
    checks["2+2 two-way"] = isinstance(fwd, Holds) and isinstance(bwd, Holds)

    k1 = ref("#0 := proc { expr !#0 } ; expr !#0")
    k2 = ref("#0 := proc { while 1 { skip } } ; expr !#0")
    R = Relation2(frozenset({(k1, k2), (k2, k1)}), frozenset(), True)
    divergent = all(F.terminates(k, s, 500) is False for k in (k1, k2) for s in stores)
    checks["Landin adequacy"] = isinstance(F.check_adequacy(R, stores, 500), Holds) and divergent

    nf = [F.ctx_refute(ref(p), ref(q), 4) for p, q in
          (("skip; skip", "skip"), ("skip; #0 := 1", "#0 := 1"),
           ("skip; while !#0 { #0 := !#0 (-) 1 }", "while !#0 { #0 := !#0 (-) 1 }"))]
    checks["Skip-ing not refuted"] = all(isinstance(r, F.NotFound) for r in nf)
    cex = F.ctx_refute(F.SKIP, ref("while 1 { skip }"), 4)
    checks["hole refutes skip vs loop"] = isinstance(cex, F.Counterexample) and cex.show() == "·"
    elapsed = time.perf_counter() - t
    verdict(9, all(checks.values()), elapsed, ", ".join(f"{k}: {v}" for k, v in checks.items()))


# --- 10: soundness regression ------------------------------------------------


def test_criterion_10_soundness_regression():
    t = time.perf_counter()
    out = ref2_regression(max_size=4)
    certified = [o for o in out if o.certified]
    refuted = [o.name for o in certified if not isinstance(o.refutation, F.NotFound)]
    elapsed = time.perf_counter() - t
    verdict(10, bool(certified) and not refuted, elapsed,
            f"{len(certified)}/{len(out)} pairs certified both ways, refuted: {refuted}")
