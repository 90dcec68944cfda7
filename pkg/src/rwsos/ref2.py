"""Ref²: an imperative language with higher-order store, reader-writer style.

Readers: skip, while(e, p), assign(e, p), if(e, p, q), seq(p, q), alloc(p)
(``&p``), expr(e), proc(p). Writers: wassign(e, c), wseq(c, q), walloc(c),
out(s, c) (s.c), run(p, s) ([p]_s), retv(v, s) and ret(s).

Stores are partial maps from locations to values; a value is a location,
an integer or a reader. Allocation picks the least unused location, which
stands for the whole family of fresh choices (see ``ref_writer_steps``).
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass

from .equivalence import Relation2
from .syntax import Overflow, Term, check_int
from .transitions import Done, DoneVal, Fails, Holds, Inconclusive, Output, Silent, weak_closure

# ---------------------------------------------------------------------------
# values, stores, expressions


@dataclass(frozen=True, slots=True)
class Loc:
    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 0:
            raise ValueError("locations are natural numbers")

    def __repr__(self):
        return f"#{self.index}"


class _Undefined:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Undefined"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


def is_int(v) -> bool:
    return type(v) is int


class RefStore(Mapping):
    """Partial finite map Loc -> value. Lookups outside the domain give UNDEFINED."""

    __slots__ = ("_items", "_hash")

    def __init__(self, bindings=()):
        items = dict(bindings)
        norm = {}
        for k, v in items.items():
            k = k if isinstance(k, Loc) else Loc(int(k))
            _check_value(v)
            norm[k.index] = v
        self._items = tuple(sorted(norm.items()))
        self._hash = hash(self._items)

    def __getitem__(self, loc):
        i = loc.index if isinstance(loc, Loc) else loc
        for k, v in self._items:
            if k == i:
                return v
        raise KeyError(loc)

    def lookup(self, loc: Loc):
        for k, v in self._items:
            if k == loc.index:
                return v
        return UNDEFINED

    def __iter__(self):
        return (Loc(k) for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, RefStore):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(f"{k}={show_value(v)}" for k, v in self._items) + "}"

    def __reduce__(self):
        return (RefStore, (dict(self._items),))

    @property
    def dom(self) -> frozenset:
        return frozenset(k for k, _ in self._items)

    def set(self, loc: Loc, v) -> "RefStore":
        _check_value(v)
        items = [kv for kv in self._items if kv[0] != loc.index]
        items.append((loc.index, v))
        items.sort()
        new = RefStore.__new__(RefStore)
        new._items = tuple(items)
        new._hash = hash(new._items)
        return new

    def fresh(self) -> Loc:
        """Least location outside the domain."""
        used = self.dom
        return Loc(next(i for i in itertools.count() if i not in used))

    def values(self):
        return [v for _, v in self._items]


def _check_value(v):
    if isinstance(v, Loc) or is_int(v):
        return
    if isinstance(v, Term) and v.op in READER_OPS:
        return
    raise TypeError(f"not a Ref² value: {v!r}")


@dataclass(frozen=True, slots=True)
class Deref:
    e: object

    def __repr__(self):
        return f"!{show_expr(self.e)}"


@dataclass(frozen=True, slots=True)
class RBin:
    op: str  # "+" or "-"
    left: object
    right: object

    def __post_init__(self):
        if self.op not in ("+", "-"):
            raise ValueError(f"unknown operator {self.op!r}")

    def __repr__(self):
        return f"({show_expr(self.left)} ({self.op}) {show_expr(self.right)})"


def show_expr(e) -> str:
    return repr(e)


def ref_eev(e, s: RefStore):
    """Partial evaluation of an expression; UNDEFINED when no clause applies."""
    if isinstance(e, Loc) or is_int(e):
        return e
    if isinstance(e, Deref):
        l = ref_eev(e.e, s)
        if not isinstance(l, Loc):
            return UNDEFINED
        return s.lookup(l)
    if isinstance(e, RBin):
        a, b = ref_eev(e.left, s), ref_eev(e.right, s)
        if not (is_int(a) and is_int(b)):
            return UNDEFINED
        try:
            return check_int(a + b if e.op == "+" else a - b)
        except Overflow:
            return UNDEFINED
    raise TypeError(f"not a Ref² expression: {e!r}")


# ---------------------------------------------------------------------------
# terms

READER_OPS = frozenset({"skip", "while", "assign", "if", "seq", "alloc", "expr", "proc"})
WRITER_OPS = frozenset({"wassign", "wseq", "walloc", "out", "run", "retv", "ret"})

SKIP = Term("skip")


def while_(e, p):
    return Term("while", (e, p))


def assign(e, p):
    return Term("assign", (e, p))


def if_(e, p, q):
    return Term("if", (e, p, q))


def seq(p, q):
    return Term("seq", (p, q))


def alloc(p):
    return Term("alloc", (p,))


def expr(e):
    return Term("expr", (e,))


def proc(p):
    return Term("proc", (p,))


def wassign(e, c):
    return Term("wassign", (e, c))


def wseq(c, q):
    return Term("wseq", (c, q))


def walloc(c):
    return Term("walloc", (c,))


def out(s, c):
    return Term("out", (s, c))


def run(p, s):
    return Term("run", (p, s))


def retv(v, s):
    return Term("retv", (v, s))


def ret(s):
    return Term("ret", (s,))


def is_reader(t) -> bool:
    return isinstance(t, Term) and t.op in READER_OPS


def is_writer(t) -> bool:
    return isinstance(t, Term) and t.op in WRITER_OPS


def show_value(v) -> str:
    if isinstance(v, Term):
        return f"proc {{ {show(v)} }}"
    return repr(v)


def show(t) -> str:
    """Concrete syntax; writers use [p]@{..}, {..}.c, ret@{..} and ret(v)@{..}."""
    op, a = t.op, t.args
    if op == "skip":
        return "skip"
    if op == "while":
        return f"while {show_expr(a[0])} {{ {show(a[1])} }}"
    if op in ("assign", "wassign"):
        return f"{show_expr(a[0])} := {_show_operand(a[1])}"
    if op == "if":
        return f"if {show_expr(a[0])} {{ {show(a[1])} }} else {{ {show(a[2])} }}"
    if op in ("seq", "wseq"):
        return f"{_show_operand(a[0], left=True)} ; {show(a[1])}"
    if op in ("alloc", "walloc"):
        return f"&{_show_operand(a[0])}"
    if op == "expr":
        return f"expr {show_expr(a[0])}"
    if op == "proc":
        return f"proc {{ {show(a[0])} }}"
    if op == "out":
        return f"{a[0]!r}.{_show_operand(a[1])}"
    if op == "run":
        return f"[{show(a[0])}]@{a[1]!r}"
    if op == "retv":
        return f"ret({show_value(a[0])})@{a[1]!r}"
    if op == "ret":
        return f"ret@{a[0]!r}"
    if op == "hole":
        return "·"
    raise ValueError(f"not a Ref² term: {t!r}")


def _show_operand(t, left=False):
    if t.op in ("seq", "wseq") or (t.op in ("assign", "wassign") and left):
        return f"({show(t)})"
    if t.op in ("assign", "wassign", "out"):
        return f"({show(t)})"
    return show(t)


# ---------------------------------------------------------------------------
# semantics


@dataclass(frozen=True)
class Stuck:
    reason: str = ""

    def __bool__(self):
        return False


def _guard(e, s):
    n = ref_eev(e, s)
    return n if is_int(n) else None


def ref_reader_step(p: Term, s: RefStore):
    """The writer that p continues as on s, or Stuck."""
    op = p.op
    if op == "seq":
        return wseq(run(p.args[0], s), p.args[1])
    if op == "skip":
        return ret(s)
    if op == "assign":
        return wassign(p.args[0], run(p.args[1], s))
    if op == "while":
        n = _guard(p.args[0], s)
        if n is None:
            return Stuck(f"while guard {show_expr(p.args[0])} is not an integer")
        if n == 0:
            return ret(s)
        return out(s, run(seq(p.args[1], p), s))
    if op == "if":
        n = _guard(p.args[0], s)
        if n is None:
            return Stuck(f"if guard {show_expr(p.args[0])} is not an integer")
        return out(s, run(p.args[1] if n != 0 else p.args[2], s))
    if op == "alloc":
        return walloc(run(p.args[0], s))
    if op == "expr":
        v = ref_eev(p.args[0], s)
        if v is UNDEFINED:
            return Stuck(f"{show_expr(p.args[0])} is undefined")
        if isinstance(v, Term):
            return out(s, run(v, s))
        return retv(v, s)
    if op == "proc":
        return retv(p.args[0], s)
    raise ValueError(f"not a Ref² reader: {p!r}")


def ref_writer_steps(c: Term) -> tuple:
    """All steps of a writer; empty iff c is stuck.

    Allocation contributes one step at the least unused location, flagged
    ``fresh=True``: it represents every choice of a fresh location.
    """
    op = c.op
    if op == "run":
        d = ref_reader_step(*c.args)
        return () if isinstance(d, Stuck) else (Silent(d),)
    if op == "ret":
        return (Done(c.args[0]),)
    if op == "retv":
        return (DoneVal(*c.args),)
    if op == "out":
        return (Output(c.args[1], c.args[0]),)
    if op == "wseq":
        inner, q = c.args
        res = []
        for r in ref_writer_steps(inner):
            kind = type(r)
            if kind is Silent:
                res.append(Silent(wseq(r.next, q)))
            elif kind is Output:
                res.append(Output(wseq(r.next, q), r.state))
            elif kind is DoneVal:
                res.append(Output(run(q, r.store), r.store))
            else:
                res.append(Silent(run(q, r.final)))
        return tuple(res)
    if op == "walloc":
        res = []
        for r in ref_writer_steps(c.args[0]):
            kind = type(r)
            if kind is Silent:
                res.append(Silent(walloc(r.next)))
            elif kind is Output:
                res.append(Output(walloc(r.next), r.state))
            elif kind is DoneVal:
                l = r.store.fresh()
                res.append(DoneVal(l, r.store.set(l, r.value), fresh=True))
        return tuple(res)
    if op == "wassign":
        e, inner = c.args
        res = []
        for r in ref_writer_steps(inner):
            kind = type(r)
            if kind is Silent:
                res.append(Silent(wassign(e, r.next)))
            elif kind is Output:
                res.append(Output(wassign(e, r.next), r.state))
            elif kind is DoneVal:
                l = ref_eev(e, r.store)
                if isinstance(l, Loc):
                    res.append(Done(r.store.set(l, r.value)))
        return tuple(res)
    raise ValueError(f"not a Ref² writer: {c!r}")


@dataclass(frozen=True)
class Value:
    value: object
    store: RefStore


@dataclass(frozen=True)
class Store:
    store: RefStore


@dataclass(frozen=True)
class RunCut:
    steps: int


def ref_run(p: Term, s: RefStore, fuel: int):
    """Run a reader with canonical allocation: Value, Store, Stuck or RunCut."""
    if fuel < 1:
        raise ValueError("fuel must be positive")
    c = ref_reader_step(p, s)
    if isinstance(c, Stuck):
        return c
    for _ in range(fuel - 1):
        steps = ref_writer_steps(c)
        if not steps:
            return Stuck(f"writer {show(c)} has no step")
        (r,) = steps
        kind = type(r)
        if kind is Done:
            return Store(r.final)
        if kind is DoneVal:
            return Value(r.value, r.store)
        c = r.next
    return RunCut(fuel)


def ref_weak_closure(c: Term, fuel: int):
    """Weak transitions: silent and emitting steps both absorbed."""
    return weak_closure(c, ref_writer_steps, fuel, mode=2)


def terminates(x: Term, s: RefStore | None, fuel: int):
    """True if x ⇓ (on s for a reader), False if certified not to, None if unknown.

    Divergence is certified when the reachable writers are exhausted within
    ``fuel`` expansions without meeting a termination.
    """
    if s is not None:
        c = ref_reader_step(x, s)
        if isinstance(c, Stuck):
            return False
    else:
        c = x
    cl = ref_weak_closure(c, fuel)
    if cl.terminations or cl.values:
        return True
    return None if cl.truncated else False


# ---------------------------------------------------------------------------
# relations on values and stores


class KindMismatch(TypeError):
    pass


def value_related(R: Relation2, v, w) -> bool:
    """V(R): equal locations, equal integers, or related readers."""
    if isinstance(v, Term) and isinstance(w, Term):
        return R.has_r(v, w)
    if isinstance(v, Loc) or isinstance(w, Loc):
        return v == w
    if is_int(v) and is_int(w):
        return v == w
    return False


def store_related(R: Relation2, s: RefStore, t: RefStore) -> bool:
    """S(R): equal domains and pointwise V(R)."""
    if s.dom != t.dom:
        return False
    return all(value_related(R, s[l], t[l]) for l in s)


def value_store_related(R: Relation2, lhs, rhs) -> bool:
    if isinstance(lhs, RefStore) != isinstance(rhs, RefStore):
        raise KindMismatch("compare two stores or two values")
    if isinstance(lhs, RefStore):
        return store_related(R, lhs, rhs)
    return value_related(R, lhs, rhs)


# ---------------------------------------------------------------------------
# higher-order termination simulation


def _partner(q, s):
    """The writer q continues as on s; a stuck q is represented by the inert [q]_s."""
    d = ref_reader_step(q, s)
    return run(q, s) if isinstance(d, Stuck) else d


def _answer(R, R_w_has, c_move, d_closure):
    """Can d's weak closure answer the strong move of c?"""
    kind = type(c_move)
    if kind is Silent or kind is Output:
        return any(R_w_has(c_move.next, d2) for d2 in d_closure.silent_reach)
    if kind is Done:
        return any(store_related(R, c_move.final, t) for t in d_closure.terminations)
    return any(value_related(R, c_move.value, v) and store_related(R, c_move.store, t)
               for v, t in d_closure.values)


_CLAUSE = {Silent: "2", Output: "2", Done: "3", DoneVal: "4"}


def check_ho_termination_sim(R: Relation2, stores, fuel: int):
    """Check the higher-order termination simulation clauses for R.

    (1) related readers on a sampled store s continue as related writers; a
    stuck left side needs nothing, a stuck right side q is matched by the
    inert writer [q]_s. (2) every silent or emitting step of c is answered
    by a weak move of d into R. (3)/(4) termination with a store (and value)
    is answered by a weak termination of d with an S(R)/V(R)-related result.
    Missing answers from a truncated closure give Inconclusive.
    """
    inconclusive = None
    for c, d in sorted(R.w, key=repr):
        cl = None
        for move in ref_writer_steps(c):
            if cl is None:
                cl = ref_weak_closure(d, fuel)
            if not _answer(R, R.has_w, move, cl):
                if cl.truncated:
                    if inconclusive is None:
                        inconclusive = Inconclusive((c, d), "weak closure ran out of fuel")
                    continue
                return Fails((c, d), _CLAUSE[type(move)], sort="w", witness=move)
    for p, q in sorted(R.r, key=repr):
        for s in stores:
            c = ref_reader_step(p, s)
            if isinstance(c, Stuck):
                continue
            d = _partner(q, s)
            if not R.has_w(c, d):
                return Fails((p, q), "1", sort="r", store=s, witness=(c, d))
    if inconclusive is not None:  # a verdict that is falsy, so no `or` here
        return inconclusive
    return Holds(f"{len(R.r)} reader and {len(R.w)} writer pairs")


def reachable_writers(c, fuel: int):
    """All writers reachable from c (including c), or None if more than fuel."""
    cl = ref_weak_closure(c, fuel)
    return None if cl.truncated else cl.silent_reach


def ho_similarity(reader_pairs, stores, fuel: int, identity: bool = True):
    """Certify reader pairs by a greatest simulation on the reachable fragment.

    Writer candidates are the pairs of writers reachable from the two sides
    of each reader pair on each sampled store; candidates failing a clause
    are pruned until nothing changes. Returns (verdict, relation), with the
    verdict of the literal checker on the resulting relation.
    """
    reader_pairs = frozenset(reader_pairs)
    stores = list(stores)
    base = Relation2(reader_pairs, frozenset(), identity)
    cand = set()
    for p, q in reader_pairs:
        for s in stores:
            c = ref_reader_step(p, s)
            if isinstance(c, Stuck):
                continue
            left = reachable_writers(c, fuel)
            right = reachable_writers(_partner(q, s), fuel)
            if left is None or right is None:
                return Inconclusive((p, q), f"reachable writers exceed fuel on {s!r}"), base
            cand.update(itertools.product(left, right))
    if identity:
        cand = {(c, d) for c, d in cand if c != d}
    closures = {}

    def closure(d):
        cl = closures.get(d)
        if cl is None:
            cl = closures[d] = ref_weak_closure(d, fuel)
        return cl

    def has(c, d):
        return (c, d) in cand or (identity and c == d)

    changed = True
    while changed:
        changed = False
        for pair in list(cand):
            c, d = pair
            for move in ref_writer_steps(c):
                if not _answer(base, has, move, closure(d)):
                    cand.discard(pair)
                    changed = True
                    break
    rel = Relation2(reader_pairs, frozenset(cand), identity)
    return check_ho_termination_sim(rel, stores, fuel), rel


def certify_both_ways(p, q, stores, fuel, extra_pairs=()):
    """Two-way termination similarity of p and q on the sampled stores."""
    pairs = {(p, q), *extra_pairs}
    fwd, rel_f = ho_similarity(pairs, stores, fuel)
    bwd, rel_b = ho_similarity({(b, a) for a, b in pairs}, stores, fuel)
    return fwd, bwd


# ---------------------------------------------------------------------------
# worked relations


def skipping_relation(readers, stores) -> Relation2:
    """Δ plus skip;p ~ p and its writer pairs, for each p and sampled s."""
    r, w = set(), set()
    for p in readers:
        r.add((seq(SKIP, p), p))
        for s in stores:
            cs = _partner(p, s)
            w.add((wseq(run(SKIP, s), p), cs))
            w.add((wseq(ret(s), p), cs))
            if run(p, s) != cs:
                w.add((run(p, s), cs))
    return Relation2(frozenset(r), frozenset(w), identity=True)


def proc_assignment_relation(T: Relation2, loc: Loc, stores) -> Relation2:
    """Extend T by l := proc p ~ l := proc q for each reader pair (p, q) of T."""
    r, w = set(T.r), set(T.w)
    for p, q in T.r:
        r.add((assign(loc, proc(p)), assign(loc, proc(q))))
        for s in stores:
            w.add((wassign(loc, run(proc(p), s)), wassign(loc, run(proc(q), s))))
            w.add((wassign(loc, retv(p, s)), wassign(loc, retv(q, s))))
    return Relation2(frozenset(r), frozenset(w), T.identity)


# ---------------------------------------------------------------------------
# adequacy


def check_adequacy(R: Relation2, stores, fuel: int):
    """Related terms agree on termination; unknown outcomes give Inconclusive."""
    inconclusive = None
    pairs = [((p, q), s) for p, q in sorted(R.r, key=repr) for s in stores]
    pairs += [((c, d), None) for c, d in sorted(R.w, key=repr)]
    for (x, y), s in pairs:
        a, b = terminates(x, s, fuel), terminates(y, s, fuel)
        if a is None or b is None:
            if inconclusive is None:
                inconclusive = Inconclusive((x, y), "termination not decided within fuel")
            continue
        if a != b:
            return Fails((x, y), "adequacy", sort="r" if s is not None else "w", store=s,
                         witness=(a, b))
    if inconclusive is not None:
        return inconclusive
    return Holds(f"{len(pairs)} related runs agree on termination")


# ---------------------------------------------------------------------------
# contexts

HOLE = Term("hole")
EXPR_POOL = (0, 1, 2, Loc(0), Loc(1), Deref(Loc(0)), Deref(Loc(1)))


def default_stores():
    return [
        RefStore(),
        RefStore({0: 0}),
        RefStore({0: 1}),
        RefStore({0: 1, 1: 2}),
        RefStore({0: Loc(1), 1: 0}),
        RefStore({0: SKIP}),
    ]


def plug(ctx, t):
    if ctx is HOLE or ctx == HOLE:
        return t
    if not isinstance(ctx, Term):
        return ctx
    return Term(ctx.op, tuple(plug(a, t) if isinstance(a, Term) else a for a in ctx.args))


def _reader_terms(max_size: int):
    """Readers by (size, holes) with at most one hole; size counts nodes,
    expression leaves from the pool count 1."""
    table = {(1, 1): [HOLE], (1, 0): [SKIP]}

    def get(n, h):
        return table.get((n, h), [])

    for n in range(2, max_size + 1):
        for h in (0, 1):
            acc = []
            if h == 0:
                acc += [expr(e) for e in EXPR_POOL] if n == 2 else []
            for p in get(n - 1, h):
                acc += [alloc(p), proc(p)]
            for p in get(n - 2, h):
                acc += [while_(e, p) for e in EXPR_POOL] + [assign(e, p) for e in EXPR_POOL]
            for k in range(1, n - 1):
                for h1 in range(h + 1):
                    for p in get(k, h1):
                        for q in get(n - 1 - k, h - h1):
                            acc.append(seq(p, q))
            for k in range(1, n - 2):
                for h1 in range(h + 1):
                    for p in get(k, h1):
                        for q in get(n - 2 - k, h - h1):
                            acc += [if_(e, p, q) for e in EXPR_POOL]
            table[n, h] = acc
    return table


def enumerate_contexts(max_size: int, stores):
    """Reader contexts, then writer contexts [C]_s, by increasing size."""
    table = _reader_terms(max_size)
    for n in range(1, max_size + 1):
        for ctx in table.get((n, 1), []):
            yield "r", ctx
        if n >= 3:
            for ctx in table.get((n - 2, 1), []):
                for s in stores:
                    yield "w", run(ctx, s)


@dataclass(frozen=True)
class Counterexample:
    context: Term
    store: RefStore | None
    left: bool
    right: bool

    def __bool__(self):
        return False

    def show(self):
        return show(self.context)


@dataclass(frozen=True)
class NotFound:
    contexts: int
    undecided: int = 0

    def __bool__(self):
        return True


def ctx_refute(p, q, max_size: int, stores=None, fuel: int = 500):
    """Search for a context on which p and q differ in termination.

    A counterexample needs one side to terminate and the other to be
    certified non-terminating; runs that exhaust ``fuel`` are only counted.
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    stores = default_stores() if stores is None else list(stores)
    seen = undecided = 0
    for sort, ctx in enumerate_contexts(max_size, stores):
        seen += 1
        cp, cq = plug(ctx, p), plug(ctx, q)
        for s in (stores if sort == "r" else [None]):
            a, b = terminates(cp, s, fuel), terminates(cq, s, fuel)
            if a is None or b is None:
                undecided += a is not b
                continue
            if a != b:
                return Counterexample(ctx, s, a, b)
    return NotFound(seen, undecided)
