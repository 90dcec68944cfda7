import random

import pytest
from hypothesis import given, settings, strategies as st

from rwsos import ref2 as F
from rwsos.equivalence import Relation2
from rwsos.parse import parse_program
from rwsos.transitions import DoneVal, Fails, Holds, Inconclusive, Output, Silent

L0, L1 = F.Loc(0), F.Loc(1)


def ref(text):
    return parse_program("ref2", text)


def test_expression_evaluation_is_partial():
    s = F.RefStore({0: 5})
    assert F.ref_eev(F.RBin("+", F.Deref(L0), 1), s) == 6
    assert F.ref_eev(F.Deref(L1), s) is F.UNDEFINED
    assert F.ref_eev(F.RBin("+", L0, 1), s) is F.UNDEFINED
    assert F.ref_eev(F.RBin("+", 2 ** 63 - 1, 1), s) is F.UNDEFINED


def test_allocation_picks_the_least_unused_location():
    r = F.ref_run(ref("&(expr 7)"), F.RefStore({0: 1, 2: 1}), 20)
    assert r == F.Value(L1, F.RefStore({0: 1, 1: 7, 2: 1}))


def test_allocation_keeps_the_ampersand_on_emission():
    c = F.walloc(F.out(F.RefStore(), F.retv(1, F.RefStore())))
    (step,) = F.ref_writer_steps(c)
    assert isinstance(step, Output) and step.next.op == "walloc"


def test_allocation_of_a_store_result_is_stuck():
    assert F.ref_writer_steps(F.walloc(F.ret(F.RefStore()))) == ()


def test_fresh_flag_marks_allocation():
    (step,) = F.ref_writer_steps(F.walloc(F.retv(3, F.RefStore())))
    assert isinstance(step, DoneVal) and step.fresh


def test_value_then_sequel_emits():
    (step,) = F.ref_writer_steps(F.wseq(F.retv(1, F.RefStore()), F.SKIP))
    assert step == Output(F.run(F.SKIP, F.RefStore()), F.RefStore())


def test_store_then_sequel_is_silent():
    (step,) = F.ref_writer_steps(F.wseq(F.ret(F.RefStore()), F.SKIP))
    assert step == Silent(F.run(F.SKIP, F.RefStore()))


def test_assignment_to_a_non_location_is_stuck():
    assert isinstance(F.ref_run(ref("1 := 2"), F.RefStore(), 10), F.Stuck)


def test_stored_procedures_run_when_dereferenced():
    r = F.ref_run(ref("#0 := proc { #1 := 3 }; expr !#0"), F.RefStore({1: 0}), 50)
    assert isinstance(r, F.Store) and r.store.lookup(L1) == 3


def test_landin_knot_diverges():
    p = ref("#0 := proc { expr !#0 } ; expr !#0")
    assert isinstance(F.ref_run(p, F.RefStore(), 1000), F.RunCut)
    assert F.terminates(p, F.RefStore(), 500) is False


def test_undecided_termination():
    p = ref("#0 := 0; while 1 { #0 := !#0 (+) 1 }")
    assert F.terminates(p, F.RefStore(), 50) is None


def test_adequacy_detects_disagreement():
    R = Relation2(frozenset({(F.SKIP, ref("while 1 { skip }"))}), frozenset(), True)
    assert isinstance(F.check_adequacy(R, F.default_stores(), 100), Fails)


def test_adequacy_is_inconclusive_when_undecided():
    p = ref("#0 := 0; while 1 { #0 := !#0 (+) 1 }")
    R = Relation2(frozenset({(p, p)}), frozenset(), True)
    assert isinstance(F.check_adequacy(R, [F.RefStore()], 30), Inconclusive)


def test_skipping_relation_holds_both_ways():
    stores = F.default_stores()
    readers = [F.SKIP, ref("#0 := 1"), ref("while 1 { skip }")]
    T = F.skipping_relation(readers, stores)
    assert isinstance(F.check_ho_termination_sim(T, stores, 200), Holds)


def test_similarity_refutes_skip_vs_loop():
    verdict, _ = F.ho_similarity({(F.SKIP, ref("while 1 { skip }"))}, F.default_stores(), 100)
    assert isinstance(verdict, Fails)


def test_ctx_refute_hole():
    cex = F.ctx_refute(F.SKIP, ref("while 1 { skip }"), 1)
    assert isinstance(cex, F.Counterexample) and cex.show() == "·"


def test_ctx_refute_finds_a_real_context():
    # skip and expr 1 differ once a context runs them as a stored procedure result
    r = F.ctx_refute(ref("#0 := 1"), F.SKIP, 4)
    assert isinstance(r, F.Counterexample)
    p, q = F.plug(r.context, ref("#0 := 1")), F.plug(r.context, F.SKIP)
    assert F.terminates(p, r.store, 500) != F.terminates(q, r.store, 500)


def test_contexts_have_one_hole():
    def holes(t):
        if t == F.HOLE:
            return 1
        return sum(holes(a) for a in getattr(t, "args", ()) if isinstance(a, F.Term))
    for _, ctx in F.enumerate_contexts(4, [F.RefStore()]):
        assert holes(ctx) == 1


values = st.one_of(st.integers(-3, 3), st.builds(F.Loc, st.integers(0, 2)))
stores = st.dictionaries(st.integers(0, 2), values, max_size=3).map(F.RefStore)
programs = st.sampled_from([
    "skip", "#0 := 1", "&(expr 2)", "expr !#0", "if !#0 { skip } else { #1 := 2 }",
    "while !#0 { #0 := !#0 (-) 1 }", "#0 := proc { skip }; expr !#0", "#1 := &(expr !#0); skip",
])


@settings(max_examples=200, deadline=None)
@given(programs, stores)
def test_readers_are_deterministic(text, s):
    p = ref(text)
    assert F.ref_reader_step(p, s) == F.ref_reader_step(p, s)


@settings(max_examples=200, deadline=None)
@given(programs, stores)
def test_at_most_one_step_per_writer(text, s):
    c = F.ref_reader_step(ref(text), s)
    for _ in range(30):
        if isinstance(c, F.Stuck):
            return
        steps = F.ref_writer_steps(c)
        assert len(steps) <= 1
        if not steps or not isinstance(steps[0], (Silent, Output)):
            return
        c = steps[0].next


@settings(max_examples=100, deadline=None)
@given(programs, stores)
def test_run_agrees_with_termination_certificate(text, s):
    r = F.ref_run(ref(text), s, 200)
    t = F.terminates(ref(text), s, 200)
    if isinstance(r, (F.Value, F.Store)):
        assert t is True
    if t is False:
        assert not isinstance(r, (F.Value, F.Store))


def test_truncated_answer_is_inconclusive_not_holds():
    counter = F.ref_reader_step(ref("#0 := 0; while 1 { #0 := !#0 (+) 1 }"), F.RefStore())
    R = Relation2(frozenset(), frozenset({(F.ret(F.RefStore()), counter)}), True)
    assert isinstance(F.check_ho_termination_sim(R, [], 20), Inconclusive)
