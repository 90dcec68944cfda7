import random

import pytest
from hypothesis import given, settings, strategies as st

from rwsos import imp as I
from rwsos import imp2 as I2
from rwsos import ref2 as F
from rwsos.parse import ParseError, parse_program, parse_var_store, show_imp
from rwsos.syntax import BinOp, Num, Var, VarStore
from rwsos.trials import random_imp


def test_imp_program():
    p = parse_program("imp", "x := 1; while x { x := x - 1 }")
    assert p == I.seq(I.assign("x", 1), I.while_(Var("x"), I.assign("x", BinOp("-", Var("x"), Num(1)))))


def test_sequencing_associates_right():
    p = parse_program("imp", "skip; skip; x := 2")
    assert p == I.seq(I.SKIP, I.seq(I.SKIP, I.assign("x", 2)))


def test_precedence():
    p = parse_program("imp", "x := 1 + 2 * y")
    assert p.args[1] == BinOp("+", Num(1), BinOp("*", Num(2), Var("y")))


def test_imp2_writers():
    c = parse_program("imp2", "[x := 1]@{x=0} ; skip")
    assert c == I2.wseq(I2.run(I.assign("x", 1), VarStore()), I.SKIP)
    assert parse_program("imp2", "{x=1}.ret@{y=2}") == I2.out(VarStore({"x": 1}), I2.ret(VarStore({"y": 2})))


def test_var_store():
    assert parse_var_store("{x=1, y=-2}") == VarStore({"x": 1, "y": -2})


def test_ref2_sugar_and_expressions():
    p = parse_program("ref2", "#0 := 2; #0 := !#0 (+) 1")
    assert p == F.seq(F.assign(F.Loc(0), F.expr(2)),
                      F.assign(F.Loc(0), F.expr(F.RBin("+", F.Deref(F.Loc(0)), 1))))


def test_ref2_parenthesised_program_and_lhs():
    assert parse_program("ref2", "(skip; skip)") == F.seq(F.SKIP, F.SKIP)
    assert parse_program("ref2", "(!#0) := 1") == F.assign(F.Deref(F.Loc(0)), F.expr(1))


def test_ref2_control():
    p = parse_program("ref2", "if !#0 { skip } else { &(proc { skip }) }")
    assert p == F.if_(F.Deref(F.Loc(0)), F.SKIP, F.alloc(F.proc(F.SKIP)))


def test_error_position():
    with pytest.raises(ParseError) as e:
        parse_program("imp", "x := 1;\n  while { skip }")
    assert (e.value.line, e.value.col) == (2, 9)


def test_trailing_garbage():
    with pytest.raises(ParseError):
        parse_program("imp", "skip skip")


def test_unknown_language():
    with pytest.raises(ValueError):
        parse_program("cobol", "skip")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_imp_round_trip(seed):
    p = random_imp(random.Random(seed), 5)
    assert parse_program("imp", show_imp(p)) == p


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2))
def test_imp2_writer_round_trip(seed, k):
    p = random_imp(random.Random(seed), 4)
    c = I2.reader_step(p, VarStore({"x": k}))
    for _ in range(k):
        r = I2.writer_step(c)
        if not hasattr(r, "next"):
            break
        c = r.next
    assert parse_program("imp2", show_imp(c)) == c


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_ref2_show_round_trip(seed):
    rng = random.Random(seed)
    table = F._reader_terms(5)
    pool = [t for (n, h), ts in table.items() if h == 0 for t in ts]
    p = rng.choice(pool)
    assert parse_program("ref2", F.show(p)) == p
