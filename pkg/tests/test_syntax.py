import pytest
from hypothesis import given, strategies as st

from rwsos.syntax import (BinOp, MetaVar, MissingBinding, Num, OpSig, Overflow, R, Signature, SortError,
                          Term, Var, VarStore, W, substitute, term_depth, term_size, validate_term)

names = st.sampled_from(["x", "y", "z"])
ints = st.integers(-5, 5)
bindings = st.dictionaries(names, ints)


def test_unbound_reads_zero():
    assert VarStore({"x": 1})["y"] == 0


def test_zero_bindings_are_dropped():
    assert VarStore({"x": 0}) == VarStore()
    assert hash(VarStore({"x": 0, "y": 2})) == hash(VarStore({"y": 2}))


@given(bindings, names, ints)
def test_set_then_get(b, x, n):
    s = VarStore(b).set(x, n)
    assert s[x] == n
    for y in b:
        if y != x:
            assert s[y] == b[y]


@given(bindings, names, ints)
def test_set_matches_construction(b, x, n):
    assert VarStore(b).set(x, n) == VarStore({**b, x: n})


def test_out_of_range_value_overflows():
    with pytest.raises(Overflow):
        VarStore().set("x", 2 ** 63)


def test_term_equality_is_structural():
    a = Term("seq", (Term("skip"), Term("skip")))
    b = Term("seq", [Term("skip"), Term("skip")])
    assert a == b and hash(a) == hash(b)
    assert a != Term("seq", (Term("skip"), Term("x")))


def test_depth_and_size():
    t = Term("f", (Term("g", (Term("c"),)), Term("c")))
    assert term_depth(t) == 3
    assert term_size(t) == 4


SIG = Signature([OpSig("c", (), R), OpSig("f", (R, R), R), OpSig("w", (R,), W)])


def test_validate_accepts_well_sorted():
    assert validate_term(SIG, Term("w", (Term("f", (Term("c"), Term("c"))),))) is W


def test_validate_reports_path_of_first_error():
    bad = Term("f", (Term("c"), Term("w", (Term("c"),))))
    with pytest.raises(SortError) as e:
        validate_term(SIG, bad)
    assert e.value.path == (1,)


def test_validate_rejects_wrong_arity():
    with pytest.raises(SortError):
        validate_term(SIG, Term("f", (Term("c"),)))


def test_substitute_and_missing_binding():
    t = Term("f", (MetaVar("x1"), Term("c")))
    assert substitute(t, {"x1": Term("c")}) == Term("f", (Term("c"), Term("c")))
    with pytest.raises(MissingBinding):
        substitute(t, {})


def test_expressions_print_readably():
    assert repr(BinOp("+", Var("x"), Num(1))) == "(x+1)"
