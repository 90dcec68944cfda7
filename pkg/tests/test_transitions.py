from hypothesis import given, strategies as st

from rwsos.transitions import (Cut, Done, Finished, Flavor, Lasso, Output, Silent, consistent, run_lasso,
                               weak_closure)

seqs = st.lists(st.integers(0, 2), max_size=6)


def test_finished_traces_compare_exactly():
    assert consistent(Finished((1, 2), 3), Finished((1, 2), 3))
    assert not consistent(Finished((1, 2), 3), Finished((1,), 3))


@given(seqs, seqs)
def test_cut_prefix_is_consistent(a, b):
    full = Finished(tuple(a + b), 9)
    assert consistent(full, Cut(tuple(a)))
    assert consistent(Cut(tuple(a)), full)


def test_lasso_denotes_an_infinite_trace():
    lasso = Lasso((1,), (2, 3))
    assert lasso.unroll(6) == (1, 2, 3, 2, 3, 2)
    assert consistent(lasso, Lasso((1, 2, 3), (2, 3)))
    assert consistent(lasso, Cut((1, 2, 3, 2)))
    assert not consistent(lasso, Finished((1, 2, 3), 0))
    assert not consistent(lasso, Lasso((1,), (2,)))


@given(seqs, st.lists(st.integers(0, 2), min_size=1, max_size=4), st.integers(0, 5))
def test_rotated_lassos_are_equal(prefix, cycle, k):
    a = Lasso(tuple(prefix), tuple(cycle))
    unrolled = tuple(prefix) + tuple(cycle) * k
    assert consistent(a, Lasso(unrolled, tuple(cycle)))


def test_run_lasso_detects_cycles():
    step = {0: (None, 1), 1: ("a", 2), 2: ("b", 1)}
    r = run_lasso(0, lambda c: step[c], 100)
    assert r == Lasso(("a",), ("b", "a")) or consistent(r, Lasso(("a",), ("b", "a")))


def test_run_lasso_finishes_and_cuts():
    step = {0: ("a", 1), 1: Done("end")}
    assert run_lasso(0, lambda c: step[c], 10) == Finished(("a",), "end")
    assert isinstance(run_lasso(0, lambda c: ("x", c + 1), 5), Cut)


SYSTEM = {
    "a": (Silent("b"),),
    "b": (Output("c", "s"),),
    "c": (Silent("d"),),
    "d": (Done("t"),),
}


def test_level_one_closure_stops_at_outputs():
    cl = weak_closure("a", lambda c: SYSTEM[c], 100, mode=1)
    assert cl.silent_reach == {"a", "b"}
    assert cl.outputs == {("s", "c")}
    assert not cl.terminations


def test_level_two_closure_absorbs_outputs():
    cl = weak_closure("a", lambda c: SYSTEM[c], 100, mode=2)
    assert {"a", "b", "c", "d"} <= set(cl.silent_reach)
    assert cl.terminations == {"t"}


def test_flavor_aliases():
    assert Flavor.parse("trc") is Flavor.TRACE
    assert Flavor.parse("termination") is Flavor.TERMINATION
    assert Flavor.TERMINATION.level == 2
