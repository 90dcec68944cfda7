import random

import pytest
from hypothesis import given, settings, strategies as st

from rwsos import imp as I
from rwsos import sos as S
from rwsos.syntax import Num, Var, VarStore
from rwsos.transitions import Finished, consistent


def test_imp_is_cool_with_seq_receiving_first():
    rep = S.check_cool(S.imp_spec())
    assert rep.cool and rep.active == {"seq": 1}
    assert "skip" in rep.passive


def test_derived_imp2_has_barred_seq():
    rw = S.derive_rw(S.imp_spec())
    names = {o.name for o in rw.signature()}
    assert {"seq~", "run", "out", "ret"} <= names


def test_not_cool_spec_cannot_be_derived():
    from rwsos.experiments import cool_mutations
    spec, _ = cool_mutations()["no-patience-rule"]
    with pytest.raises(S.NotCool):
        S.derive_rw(spec)


def test_spec_traces_match_imp():
    spec = S.imp_spec(("x",), (0, 1, 2))
    p = I.seq(I.assign("x", 2), I.while_(Var("x"), I.assign("x", 0)))
    t = S.l_trace(spec, S.imp_to_spec_term(p), "{}", 50)
    direct = I.imp_trace(p, VarStore(), 50)
    assert isinstance(t, Finished)
    assert t.emitted == tuple(repr(s) for s in direct.emitted)
    assert t.final == repr(direct.final)


def test_spec_json_round_trip():
    spec = S.imp_spec()
    again = S.load_spec(S.dump_spec(spec))
    assert again.states == spec.states and again.arities == spec.arities
    assert S.check_cool(again).cool


def test_term_syntax_round_trip():
    arities = {"k": 0, "f": 2, "g": 1}
    t = S.parse_term("f(g(k), k)", arities)
    assert S.show_term(t) == "f(g(k), k)"
    assert S.parse_term(S.show_term(t), arities) == t


def test_unknown_operator_is_rejected():
    with pytest.raises(S.SpecError):
        S.parse_term("h(k)", {"k": 0})


def test_preservation_on_imp():
    spec = S.imp_spec()
    terms = S.enumerate_terms(spec, 3)
    assert S.verify_preservation(spec, terms, fuel=40).ok


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_cool_specs_are_cool_and_preserved(seed):
    rng = random.Random(seed)
    spec = S.random_cool_spec(rng)
    assert S.check_cool(spec).cool
    terms = [S.random_term(spec, rng, rng.randint(1, 4)) for _ in range(15)]
    assert S.verify_preservation(spec, terms, fuel=30).ok


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_spec_steps_are_deterministic_and_total(seed):
    rng = random.Random(seed)
    spec = S.random_cool_spec(rng)
    for op in spec.arities:
        for trig in spec.triggers(op):
            c = spec.resolve(op, trig)
            assert c is not None and c == spec.resolve(op, trig)
