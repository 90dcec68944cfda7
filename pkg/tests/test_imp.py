import random

import pytest
from hypothesis import given, settings, strategies as st

from rwsos import imp as I
from rwsos.syntax import BinOp, Num, Overflow, Var, VarStore
from rwsos.transitions import Continue, Cut, Done, Fails, Finished, Holds, Lasso, consistent
from rwsos.trials import random_imp

S0 = VarStore({"x": 5})


def dec(x):
    return I.assign(x, BinOp("-", Var(x), Num(1)))


def test_skip_terminates_in_place():
    assert I.imp_step(I.SKIP, S0) == Done(S0)


def test_first_assignment_of_a_sequence():
    p = I.seq(I.assign("x", 1), I.assign("x", 2))
    assert I.imp_step(p, S0) == Continue(I.assign("x", 2), S0.set("x", 1))


def test_false_guard_terminates():
    s = VarStore({"x": 0})
    assert I.imp_step(I.while_(Var("x"), dec("x")), s) == Done(s)


def test_trace_of_two_assignments():
    p = I.seq(I.assign("x", 1), I.assign("x", 2))
    assert I.imp_trace(p, S0, 10) == Finished((S0.set("x", 1),), S0.set("x", 2))


def test_countdown_trace():
    p = I.while_(Var("x"), dec("x"))
    t = I.imp_trace(p, VarStore({"x": 2}), 100)
    assert isinstance(t, Finished) and t.final == VarStore()
    assert I.imp_cost(p, VarStore({"x": 2}), 100).steps == len(t.emitted)


def test_fuel_cuts_divergence():
    t = I.imp_trace(I.while_(Num(1), I.SKIP), S0, 7)
    assert isinstance(t, Cut) and len(t.emitted) == 7


def test_lasso_certifies_divergence():
    t = I.imp_lasso(I.while_(Num(1), I.SKIP), S0, 50)
    assert isinstance(t, Lasso) and t.cycle


def test_overflow_is_an_error():
    big = I.assign("x", BinOp("*", Num(2 ** 62), Num(4)))
    with pytest.raises(Overflow):
        I.imp_step(big, VarStore())


def test_fuel_must_be_positive():
    with pytest.raises(ValueError):
        I.imp_trace(I.SKIP, S0, 0)


def test_resumption_bisim_separates_flagship():
    p = I.seq(I.assign("x", 1), I.assign("x", 2))
    q = I.seq(I.assign("x", 1), I.assign("x", BinOp("+", Var("x"), Num(1))))
    assert isinstance(I.check_resumption_bisim([(p, q)], [VarStore({"x": 1})], 2), Holds)
    r = I.check_resumption_bisim([(p, q)], [VarStore({"x": 3})], 2)
    assert isinstance(r, Fails) and r.depth == 2


def test_enumeration_sizes():
    sizes = [len(I.enumerate_programs_ast(d, ("x", "y"))) for d in (1, 2, 3)]
    assert sizes == [1, 17, 385]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(-3, 3), st.integers(-3, 3))
def test_lasso_agrees_with_plain_trace(seed, x, y):
    p = random_imp(random.Random(seed), 4)
    s = VarStore({"x": x, "y": y})
    runs = []
    for run in (I.imp_trace, I.imp_lasso):
        try:
            runs.append(run(p, s, 200))
        except Overflow:
            runs.append(Overflow)
    if Overflow in runs:
        assert runs == [Overflow, Overflow]
    else:
        assert consistent(*runs)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(-3, 3))
def test_steps_are_deterministic(seed, x):
    p = random_imp(random.Random(seed), 4)
    s = VarStore({"x": x})
    assert I.imp_step(p, s) == I.imp_step(p, s)
