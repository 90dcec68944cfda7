"""Simulation checking for reader-writer transition systems.

A finite system has readers, writers and states; a reader on a state
becomes a writer, and a writer has a finite set of steps (silent, emitting,
terminating). Trace, cost and termination simulations differ only in the
clauses used to match writer steps; see ``check_simulation``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import cached_property

from .transitions import (Cut, Done, Fails, Finished, Flavor, Holds, Inconclusive, Lasso,
                          Output, Silent, run_lasso, weak_closure)


class CarrierError(ValueError):
    pass


class NondeterministicSystem(ValueError):
    pass


# ---------------------------------------------------------------------------
# systems and relations


@dataclass(frozen=True)
class FiniteRWSystem:
    readers: tuple
    writers: tuple
    states: tuple
    reader_map: dict = field(hash=False)  # (reader, state) -> writer
    writer_map: dict = field(hash=False)  # writer -> frozenset of steps

    def __post_init__(self):
        ws, ss = set(self.writers), set(self.states)
        for r in self.readers:
            for s in self.states:
                if self.reader_map.get((r, s)) not in ws:
                    raise CarrierError(f"reader map undefined or foreign at ({r}, {s})")
        for w in self.writers:
            for st in self.writer_map.get(w, ()):
                target = getattr(st, "next", None)
                state = getattr(st, "state", getattr(st, "final", None))
                if target is not None and target not in ws:
                    raise CarrierError(f"{w} steps to unknown writer {target}")
                if state is not None and state not in ss:
                    raise CarrierError(f"{w} mentions unknown state {state}")

    def __hash__(self):
        return id(self)

    def steps(self, w):
        return self.writer_map.get(w, frozenset())

    @property
    def deterministic(self):
        return all(len(self.steps(w)) == 1 for w in self.writers)

    @cached_property
    def _closures(self):
        return {}

    def closure(self, w, level: int):
        key = (w, level)
        cl = self._closures.get(key)
        if cl is None:
            cl = self._closures[key] = weak_closure(w, self.steps, None, level)
        return cl

    # --- JSON --------------------------------------------------------------

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        rmap = {(r, s): w for r, s, w in doc["readerMap"]}
        wmap: dict = {}
        for w, st in doc["writerMap"]:
            kind = st["kind"]
            if kind == "silent":
                step = Silent(st["next"])
            elif kind == "output":
                step = Output(st["next"], st["state"])
            elif kind == "done":
                step = Done(st["state"])
            else:
                raise ValueError(f"unknown step kind {kind!r}")
            wmap.setdefault(w, set()).add(step)
        return cls(tuple(doc["readers"]), tuple(doc["writers"]), tuple(doc["states"]),
                   rmap, {w: frozenset(v) for w, v in wmap.items()})

    def to_json(self):
        steps = []
        for w in self.writers:
            for st in sorted(self.steps(w), key=repr):
                steps.append([w, step_json(st)])
        return {"readers": list(self.readers), "writers": list(self.writers),
                "states": list(self.states),
                "readerMap": [[r, s, self.reader_map[r, s]] for r in self.readers for s in self.states],
                "writerMap": steps}


def step_json(st):
    if isinstance(st, Silent):
        return {"kind": "silent", "next": st.next}
    if isinstance(st, Output):
        return {"kind": "output", "next": st.next, "state": st.state}
    return {"kind": "done", "state": st.final}


@dataclass(frozen=True)
class Relation2:
    r: frozenset = frozenset()
    w: frozenset = frozenset()
    identity: bool = False  # also relate every term to itself

    def has_r(self, p, q):
        return (p, q) in self.r or (self.identity and p == q)

    def has_w(self, c, d):
        return (c, d) in self.w or (self.identity and c == d)

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        return cls(frozenset(map(tuple, doc.get("r", []))), frozenset(map(tuple, doc.get("w", []))))

    def to_json(self):
        return {"r": sorted(map(list, self.r)), "w": sorted(map(list, self.w))}

    def inverse(self):
        return Relation2(frozenset((q, p) for p, q in self.r),
                         frozenset((d, c) for c, d in self.w), self.identity)


def identity_relation(sys: FiniteRWSystem) -> Relation2:
    return Relation2(frozenset((p, p) for p in sys.readers), frozenset((c, c) for c in sys.writers))


def full_relation(sys: FiniteRWSystem) -> Relation2:
    return Relation2(frozenset(itertools.product(sys.readers, repeat=2)),
                     frozenset(itertools.product(sys.writers, repeat=2)))


# ---------------------------------------------------------------------------
# clauses


def _left_moves(sys, c, flavor: Flavor, weak_left: bool):
    """The transitions of c that the right-hand side must answer.

    Yields (clause, kind, target, state) with kind in {"silent", "out", "done"}.
    Strong moves come from the step function; weak moves from the closure
    of the flavour's level.
    """
    if not weak_left:
        for st in sys.steps(c):
            if isinstance(st, Silent):
                yield "2", "silent", st.next, None
            elif isinstance(st, Output):
                if flavor is Flavor.TERMINATION:
                    yield "2", "silent", st.next, None
                else:
                    yield "3", "out", st.next, st.state
            else:
                yield ("3" if flavor is Flavor.TERMINATION else "4"), "done", None, st.final
        return
    cl = sys.closure(c, flavor.level)
    for c2 in cl.silent_reach:
        yield "2", "silent", c2, None
    if flavor is not Flavor.TERMINATION:
        for s, c2 in cl.outputs:
            yield "3", "out", c2, s
    for s in cl.terminations:
        yield ("3" if flavor is Flavor.TERMINATION else "4"), "done", None, s


def _answers(sys, d, kind, state, flavor: Flavor):
    cl = sys.closure(d, flavor.level)
    if kind == "silent":
        return cl.silent_reach
    if kind == "out":
        if flavor is Flavor.TRACE:
            return {d2 for s, d2 in cl.outputs if s == state}
        return {d2 for _, d2 in cl.outputs}
    return cl.terminations


def writer_pair_violation(sys, R_w, c, d, flavor: Flavor, weak_left=False):
    """First unmatched move of c against d, as (clause, move) or None."""
    for clause, kind, target, state in _left_moves(sys, c, flavor, weak_left):
        ans = _answers(sys, d, kind, state, flavor)
        if kind == "done":
            if state not in ans:
                return clause, (kind, state)
        elif not any((target, d2) in R_w for d2 in ans):
            return clause, (kind, target, state)
    return None


def _check_carriers(sys, R):
    rs, ws = set(sys.readers), set(sys.writers)
    for p, q in R.r:
        if p not in rs or q not in rs:
            raise CarrierError(f"reader pair {(p, q)} outside the system")
    for c, d in R.w:
        if c not in ws or d not in ws:
            raise CarrierError(f"writer pair {(c, d)} outside the system")


def check_simulation(sys: FiniteRWSystem, R: Relation2, flavor, fuel=None, weak_left=False):
    """Check the simulation clauses of ``flavor`` for R on a finite system.

    trace: (1) related readers on the same state give related writers;
    (2) a silent step is answered by =1=>; (3) an emission of s by =1,s=>;
    (4) termination in s by ⇓1 s. cost: as trace, but (3) accepts any
    emitted state. termination: (2) silent and emitting steps are answered
    by =2=>, (3) termination in s by ⇓2 s.
    With ``weak_left`` the left-hand moves are weak transitions as well.
    ``fuel`` is accepted for interface symmetry; closures on a finite system
    are computed exactly.
    """
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    _check_carriers(sys, R)
    R_w = set(R.w)
    if R.identity:
        R_w |= {(c, c) for c in sys.writers}
    for c, d in sorted(R_w, key=repr):
        v = writer_pair_violation(sys, R_w, c, d, flavor, weak_left)
        if v is not None:
            return Fails((c, d), v[0], sort="w", witness=v[1])
    for p, q in sorted(R.r, key=repr):
        for s in sys.states:
            c, d = sys.reader_map[p, s], sys.reader_map[q, s]
            if (c, d) not in R_w:
                return Fails((p, q), "1", sort="r", store=s, witness=(c, d))
    return Holds(f"{flavor.value} simulation with {len(R.r)} reader and {len(R_w)} writer pairs")


def greatest_simulation(sys: FiniteRWSystem, flavor, fuel=None) -> Relation2:
    """Greatest fixpoint: prune the full relation until every pair passes."""
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    R_w = set(itertools.product(sys.writers, repeat=2))
    changed = True
    while changed:
        changed = False
        for pair in sorted(R_w, key=repr):
            if writer_pair_violation(sys, R_w, *pair, flavor) is not None:
                R_w.discard(pair)
                changed = True
    R_r = {(p, q) for p in sys.readers for q in sys.readers
           if all((sys.reader_map[p, s], sys.reader_map[q, s]) in R_w for s in sys.states)}
    return Relation2(frozenset(R_r), frozenset(R_w))


def brute_force_greatest(sys: FiniteRWSystem, flavor) -> Relation2:
    """Union of all simulations, by enumerating every candidate relation.

    Exponential: 2^(|W|^2) writer relations and 2^(|R|^2) reader relations.
    Meant as an oracle for tiny systems.
    """
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    wpairs = list(itertools.product(sys.writers, repeat=2))
    rpairs = list(itertools.product(sys.readers, repeat=2))
    union_w, passing_w = set(), []
    for mask in range(1 << len(wpairs)):
        Rw = frozenset(p for i, p in enumerate(wpairs) if mask >> i & 1)
        if check_simulation(sys, Relation2(frozenset(), Rw), flavor):
            union_w |= Rw
            passing_w.append(Rw)
    union_r = set()
    for mask in range(1 << len(rpairs)):
        Rr = frozenset(p for i, p in enumerate(rpairs) if mask >> i & 1)
        if Rr <= union_r:
            continue
        if any(check_simulation(sys, Relation2(Rr, Rw), flavor) for Rw in passing_w):
            union_r |= Rr
    return Relation2(frozenset(union_r), frozenset(union_w))


def check_weakening_property(sys: FiniteRWSystem, R: Relation2, flavor, fuel=None) -> bool:
    """Do the strong-left and weak-left versions of the clauses agree on R?"""
    strong = bool(check_simulation(sys, R, flavor))
    weak = bool(check_simulation(sys, R, flavor, weak_left=True))
    return strong == weak


def kernel(R: Relation2) -> Relation2:
    return Relation2(frozenset(p for p in R.r if (p[1], p[0]) in R.r),
                     frozenset(p for p in R.w if (p[1], p[0]) in R.w))


# ---------------------------------------------------------------------------
# trace, cost and termination maps of deterministic systems


def _det_step(sys):
    def step(w):
        (st,) = sys.steps(w)
        if isinstance(st, Done):
            return st
        if isinstance(st, Output):
            return st.state, st.next
        return None, st.next
    return step


def writer_trace(sys: FiniteRWSystem, w):
    """Finished, or Lasso for an infinite run (empty cycle: silent livelock)."""
    if not sys.deterministic:
        raise NondeterministicSystem("trace maps need a deterministic system")
    return run_lasso(w, _det_step(sys), len(sys.writers) + 1)


def observe(trace, flavor: Flavor):
    """Observation of a complete trace under a flavour.

    A silent livelock after n emissions is observed as such by trace and
    cost (cost keeps n); termination only sees divergence.
    """
    if isinstance(trace, Finished):
        if flavor is Flavor.TRACE:
            return ("fin", trace.emitted, trace.final)
        if flavor is Flavor.COST:
            return ("fin", len(trace.emitted), trace.final)
        return ("fin", trace.final)
    if flavor is Flavor.TERMINATION:
        return ("div",)
    if not trace.cycle:
        return ("livelock", trace.prefix if flavor is Flavor.TRACE else len(trace.prefix))
    if flavor is Flavor.COST:
        return ("omega",)
    return ("inf", lasso_normal_form(trace))


def lasso_normal_form(t: Lasso):
    """Canonical (prefix, cycle) of an eventually periodic sequence."""
    prefix, cycle = list(t.prefix), list(t.cycle)
    # shortest period
    n = len(cycle)
    for k in range(1, n + 1):
        if n % k == 0 and cycle == cycle[:k] * (n // k):
            cycle = cycle[:k]
            break
    # roll the cycle back into the prefix as far as possible
    while prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle = [cycle[-1]] + cycle[:-1]
    return tuple(prefix), tuple(cycle)


def observation(sys: FiniteRWSystem, x, flavor, sort=None):
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    if sort is None:
        sort = "r" if x in sys.readers else "w"
    if sort == "w":
        return observe(writer_trace(sys, x), flavor)
    return tuple(observe(writer_trace(sys, sys.reader_map[x, s]), flavor) for s in sys.states)


@dataclass(frozen=True)
class TraceComparison:
    equal: bool
    position: int | None = None  # 1-based index of the first differing event
    detail: str = ""

    def __bool__(self):
        return self.equal


def _next_event(sys, w):
    """Follow silent steps to the next emission, termination or livelock."""
    seen = set()
    while True:
        (st,) = sys.steps(w)
        if isinstance(st, Output):
            return ("out", st.state, st.next)
        if isinstance(st, Done):
            return ("done", st.final, None)
        if w in seen:
            return ("livelock", None, None)
        seen.add(w)
        w = st.next


def trace_equiv_finite(sys: FiniteRWSystem, a, b, states=None) -> TraceComparison:
    """Decide trace equality of two readers (on ``states``) or two writers.

    Both writers are advanced event by event; since there are at most |W|²
    pairs of positions, a repeated pair means the traces agree forever.
    """
    if not sys.deterministic:
        raise NondeterministicSystem("trace equivalence is decided on deterministic systems")
    if a in sys.readers and b in sys.readers:
        for s in (sys.states if states is None else states):
            r = trace_equiv_finite(sys, sys.reader_map[a, s], sys.reader_map[b, s])
            if not r:
                return TraceComparison(False, r.position, f"on state {s}: {r.detail}")
        return TraceComparison(True)
    if a not in sys.writers or b not in sys.writers:
        raise CarrierError("compare two readers or two writers of the system")
    seen = set()
    pos = 0
    while (a, b) not in seen:
        seen.add((a, b))
        pos += 1
        ea, eb = _next_event(sys, a), _next_event(sys, b)
        if ea[:2] != eb[:2]:
            return TraceComparison(False, pos, f"{ea[:2]} vs {eb[:2]}")
        if ea[0] != "out":
            return TraceComparison(True)
        a, b = ea[2], eb[2]
    return TraceComparison(True)


def unrolled_events(sys: FiniteRWSystem, w, n):
    """The first n events of a deterministic writer (testing oracle)."""
    out = []
    for _ in range(n):
        kind, s, nxt = _next_event(sys, w)
        out.append((kind, s))
        if kind != "out":
            break
        w = nxt
    return out


# ---------------------------------------------------------------------------
# random systems


def random_system(rng: random.Random, n_readers=2, n_writers=3, n_states=2,
                  deterministic=True, max_steps=2) -> FiniteRWSystem:
    readers = tuple(f"p{i}" for i in range(n_readers))
    writers = tuple(f"c{i}" for i in range(n_writers))
    states = tuple(f"s{i}" for i in range(n_states))

    def rand_step():
        k = rng.random()
        if k < 0.3:
            return Silent(rng.choice(writers))
        if k < 0.75:
            return Output(rng.choice(writers), rng.choice(states))
        return Done(rng.choice(states))

    wmap = {}
    for w in writers:
        n = 1 if deterministic else rng.randint(0, max_steps)
        wmap[w] = frozenset(rand_step() for _ in range(n))
    rmap = {(r, s): rng.choice(writers) for r in readers for s in states}
    return FiniteRWSystem(readers, writers, states, rmap, wmap)


def random_relation(rng: random.Random, sys: FiniteRWSystem, density=0.4) -> Relation2:
    return Relation2(
        frozenset(p for p in itertools.product(sys.readers, repeat=2) if rng.random() < density),
        frozenset(p for p in itertools.product(sys.writers, repeat=2) if rng.random() < density))


# ---------------------------------------------------------------------------
# congruence trials


@dataclass(frozen=True)
class Pass:
    checked: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Violation:
    store: object
    left: object
    right: object
    detail: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Skipped:
    reason: str

    def __bool__(self):
        return True


class Language:
    """What a congruence trial needs from a language: runs and term sorts."""

    def is_reader(self, t) -> bool:
        raise NotImplementedError

    def trace(self, t, s, fuel):
        raise NotImplementedError


class Imp2Language(Language):
    def is_reader(self, t):
        from .imp2 import is_writer
        return not is_writer(t)

    def trace(self, t, s, fuel):
        from .imp2 import imp2_trace
        return imp2_trace(t, s if self.is_reader(t) else None, fuel)


class SpecLanguage(Language):
    """A stateful SOS spec run directly (L) or through its derived L²."""

    def __init__(self, spec, via_rw=False):
        from .sos import derive_rw
        self.spec = spec
        self.rw = derive_rw(spec) if via_rw else None

    def is_reader(self, t):
        return t.op in self.spec.arities

    def trace(self, t, s, fuel):
        from .sos import l_trace, rw_trace
        from .transitions import trace_by_weak_hops
        if self.rw is None:
            return l_trace(self.spec, t, s, fuel)
        if self.is_reader(t):
            return rw_trace(self.rw, t, s, fuel)
        from .sos import rw_writer_steps
        return trace_by_weak_hops(t, rw_writer_steps(self.rw), fuel)


def _observations(lang, t, stores, fuel, flavor):
    if lang.is_reader(t):
        return [(s, flavor.observe(lang.trace(t, s, fuel))) for s in stores]
    return [(None, flavor.observe(lang.trace(t, None, fuel)))]


def certified_equal(lang: Language, p, q, stores, fuel, flavor) -> bool | None:
    """True/False when both sides finish everywhere; None if any run was cut."""
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    a = _observations(lang, p, stores, fuel, flavor)
    b = _observations(lang, q, stores, fuel, flavor)
    if any(isinstance(o, Cut) for _, o in a + b):
        return None
    return a == b


def congruence_trial(lang: Language, constructor, component_pairs, stores, fuel, flavor):
    """Compose equivalent components and check the results stay equivalent.

    ``constructor`` maps a tuple of components to a term. Components must be
    certified: both sides finish within fuel on every store with equal
    observations; otherwise the trial is Skipped, as is any composed run
    that does not finish.
    """
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    stores = list(stores)
    for p, q in component_pairs:
        ok = certified_equal(lang, p, q, stores, fuel, flavor)
        if ok is None:
            return Skipped("component run did not finish")
        if not ok:
            return Skipped("components are not equivalent")
    left = constructor(tuple(p for p, _ in component_pairs))
    right = constructor(tuple(q for _, q in component_pairs))
    a = _observations(lang, left, stores, fuel, flavor)
    b = _observations(lang, right, stores, fuel, flavor)
    for (s, x), (_, y) in zip(a, b):
        if isinstance(x, Cut) or isinstance(y, Cut):
            return Skipped("composed run did not finish")
        if x != y:
            return Violation(s, x, y, f"{left!r} vs {right!r}")
    return Pass(len(a))
