import itertools
import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from rwsos.equivalence import (FiniteRWSystem, NondeterministicSystem, Relation2, check_simulation,
                               greatest_simulation, identity_relation, kernel, lasso_normal_form,
                               observation, random_relation, random_system, trace_equiv_finite,
                               unrolled_events)
from rwsos.transitions import Fails, Flavor, Holds, Lasso

SPECS = Path(__file__).resolve().parent.parent / "specs"
seeds = st.integers(0, 10 ** 6)


def silent_prefix():
    doc = json.loads((SPECS / "systems" / "silent_prefix.json").read_text())
    return FiniteRWSystem.from_json(doc), Relation2.from_json(doc["relation"])


def test_silent_prefix_fails_strong_trace_but_holds_weakly():
    sys_, R = silent_prefix()
    assert isinstance(check_simulation(sys_, R, "trace"), Holds)
    back = Relation2(frozenset({("q", "p")}), frozenset({("b", "a"), ("d", "a"), ("c", "c")}))
    assert isinstance(check_simulation(sys_, back, "trace"), Holds)


def test_missing_successor_pair_fails():
    sys_, _ = silent_prefix()
    R = Relation2(frozenset(), frozenset({("a", "b")}))
    v = check_simulation(sys_, R, "trace")
    assert isinstance(v, Fails) and v.pair == ("a", "b")


def test_termination_needs_continuation_pairs():
    # c: silent then done s'; d: silent, silent, done s'
    sys_ = FiniteRWSystem.from_json({
        "readers": [], "writers": ["c", "c1", "d", "d1", "d2"], "states": ["s"],
        "readerMap": [],
        "writerMap": [["c", {"kind": "silent", "next": "c1"}], ["c1", {"kind": "done", "state": "s"}],
                      ["d", {"kind": "silent", "next": "d1"}], ["d1", {"kind": "silent", "next": "d2"}],
                      ["d2", {"kind": "done", "state": "s"}]]})
    single = Relation2(frozenset(), frozenset({("c", "d")}))
    assert isinstance(check_simulation(sys_, single, "ter"), Fails)
    assert ("c", "d") in greatest_simulation(sys_, "ter").w


def test_identity_is_a_simulation_for_every_flavour():
    sys_ = random_system(random.Random(3), n_writers=4)
    for fl in Flavor:
        assert check_simulation(sys_, identity_relation(sys_), fl)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_greatest_simulation_is_a_simulation(seed):
    rng = random.Random(seed)
    sys_ = random_system(rng, n_writers=rng.randint(1, 4), deterministic=rng.random() < 0.5)
    for fl in Flavor:
        assert check_simulation(sys_, greatest_simulation(sys_, fl), fl)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_flavours_are_ordered(seed):
    rng = random.Random(seed)
    sys_ = random_system(rng, n_writers=rng.randint(1, 4), deterministic=rng.random() < 0.5)
    trc, cst, ter = (greatest_simulation(sys_, fl) for fl in Flavor)
    assert trc.w <= cst.w <= ter.w
    assert trc.r <= cst.r <= ter.r


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_trace_equivalence_against_unrolling(seed):
    rng = random.Random(seed)
    sys_ = random_system(rng, n_writers=rng.randint(1, 4), n_states=2)
    n = 10 * len(sys_.writers) ** 2
    for a, b in itertools.product(sys_.writers, repeat=2):
        same = unrolled_events(sys_, a, n) == unrolled_events(sys_, b, n)
        assert bool(trace_equiv_finite(sys_, a, b)) == same


def test_trace_equivalence_needs_determinism():
    sys_ = random_system(random.Random(0), deterministic=False, max_steps=3)
    while sys_.deterministic:
        sys_ = random_system(random.Random(1), deterministic=False, max_steps=3)
    with pytest.raises(NondeterministicSystem):
        trace_equiv_finite(sys_, sys_.writers[0], sys_.writers[0])


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_kernel_is_symmetric(seed):
    rng = random.Random(seed)
    sys_ = random_system(rng, n_writers=3)
    K = kernel(greatest_simulation(sys_, "cost"))
    assert all((b, a) in K.w for a, b in K.w)


def test_lasso_normal_form():
    assert lasso_normal_form(Lasso((1, 2, 3), (2, 3, 2, 3))) == ((1,), (2, 3))
    assert lasso_normal_form(Lasso((), (4,))) == ((), (4,))


def test_observations_of_a_reader_cover_every_state():
    sys_ = random_system(random.Random(5), n_readers=1, n_states=3)
    assert len(observation(sys_, "p0", "trace")) == 3


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_system_json_round_trip(seed):
    rng = random.Random(seed)
    sys_ = random_system(rng, deterministic=rng.random() < 0.5)
    again = FiniteRWSystem.from_json(json.loads(json.dumps(sys_.to_json())))
    for fl in Flavor:
        assert greatest_simulation(again, fl) == greatest_simulation(sys_, fl)
    R = random_relation(rng, sys_)
    assert Relation2.from_json(json.loads(json.dumps(R.to_json()))) == R
