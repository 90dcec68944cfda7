"""Stateful SOS specifications over a finite state set.

A specification gives, for every operator f of arity n, a table of rules
indexed by triggers (W, s, s_1..s_n): W is the set of operand positions that
take a step, s the input state and s_i the state each operand steps or
terminates in. Rules are written as schemas with wildcards and resolved by
first match. From a spec in the cool format the reader-writer extension L²
is derived mechanically.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from .syntax import STATE, MetaVar, OpSig, R, Signature, Term, W, substitute, variables
from .transitions import (Continue, Cut, Done, Finished, Lasso, Output, Silent, consistent,
                          paused_gc, run_lasso, trace_by_weak_hops)

ANY = "*"


class SpecError(ValueError):
    pass


class ParseError(SpecError):
    pass


class CoverageError(SpecError):
    def __init__(self, op, trigger):
        self.op, self.trigger = op, trigger
        super().__init__(f"{op}: no rule for trigger {trigger}")


class OverlapError(SpecError):
    def __init__(self, op, trigger):
        self.op, self.trigger = op, trigger
        super().__init__(f"{op}: two different rules share the trigger schema {trigger}")


class VariableDisciplineError(SpecError):
    def __init__(self, rule, var):
        self.rule, self.var = rule, var
        super().__init__(f"rule {rule} uses {var}, which its trigger does not provide")


class NotCool(SpecError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"specification is not cool: {report.violations[:3]}")


# ---------------------------------------------------------------------------
# open terms in the rule language: f(t1, ..., tn), x1, y2, ...


def x(i):
    return MetaVar(f"x{i}")


def y(i):
    return MetaVar(f"y{i}")


def _is_metavar_name(name):
    return len(name) > 1 and name[0] in "xy" and name[1:].isdigit()


def parse_term(text: str, arities: dict | None = None):
    """Read ``seq(y1, x2)``; operator names may contain brackets, e.g. ``while[x](x1)``."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def name():
        nonlocal pos
        start, depth = pos, 0
        while pos < len(text):
            ch = text[pos]
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif depth == 0 and (ch in "()," or ch.isspace()):
                break
            pos += 1
        if pos == start:
            raise ParseError(f"expected a name at column {start + 1} of {text!r}")
        return text[start:pos]

    def term():
        nonlocal pos
        skip_ws()
        n = name()
        skip_ws()
        if _is_metavar_name(n):
            return MetaVar(n)
        args = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            skip_ws()
            if text[pos:pos + 1] != ")":
                while True:
                    args.append(term())
                    skip_ws()
                    if text[pos:pos + 1] == ",":
                        pos += 1
                        continue
                    break
            if text[pos:pos + 1] != ")":
                raise ParseError(f"expected ')' at column {pos + 1} of {text!r}")
            pos += 1
        if arities is not None:
            if n not in arities:
                raise ParseError(f"unknown operator {n!r} in {text!r}")
            if arities[n] != len(args):
                raise ParseError(f"{n} takes {arities[n]} arguments, got {len(args)} in {text!r}")
        return Term(n, tuple(args))

    t = term()
    skip_ws()
    if pos != len(text):
        raise ParseError(f"trailing input at column {pos + 1} of {text!r}")
    return t


def show_term(t) -> str:
    if isinstance(t, MetaVar):
        return t.name
    if not t.args:
        return t.op
    return f"{t.op}({', '.join(show_term(a) for a in t.args)})"


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class Trigger:
    W: frozenset
    s: str
    succ: tuple


@dataclass(frozen=True)
class Step:
    term: object  # open term
    state: str  # a state, "@s" for the input state, "@i" for s_i

    kind = "step"


@dataclass(frozen=True)
class Stop:
    state: str

    kind = "stop"


@dataclass(frozen=True)
class RuleSchema:
    """W: operands that must step; T: operands that must terminate.

    Positions in neither set are unconstrained (their premise is dropped).
    """

    W: frozenset
    T: frozenset
    s: str
    succ: tuple
    conclusion: object

    def matches(self, trig: Trigger) -> bool:
        if not self.W <= trig.W or self.T & trig.W:
            return False
        if self.s != ANY and self.s != trig.s:
            return False
        for i, want in enumerate(self.succ, 1):
            if want != ANY and (i in self.W or i in self.T) and want != trig.succ[i - 1]:
                return False
        return True

    def key(self):
        return (self.W, self.T, self.s, self.succ)


def resolve_state(ref: str, trig: Trigger) -> str:
    if ref == "@s":
        return trig.s
    if ref.startswith("@") and ref[1:].isdigit():
        return trig.succ[int(ref[1:]) - 1]
    return ref


@dataclass(frozen=True)
class StatefulSpec:
    states: tuple
    arities: dict = field(hash=False)
    rules: dict = field(hash=False)  # op -> tuple of RuleSchema, in priority order

    def signature(self) -> Signature:
        return Signature(OpSig(f, (R,) * n, R) for f, n in self.arities.items())

    def triggers(self, op):
        n = self.arities[op]
        for k in range(n + 1):
            for Wset in itertools.combinations(range(1, n + 1), k):
                for s in self.states:
                    for succ in itertools.product(self.states, repeat=n):
                        yield Trigger(frozenset(Wset), s, succ)

    def resolve(self, op, trig: Trigger):
        """First matching schema, instantiated: Step(open term, state) or Stop(state)."""
        memo = self._memo()
        key = (op, trig.W, trig.s, trig.succ)
        c = memo.get(key)
        if c is None:
            c = memo[key] = _resolve(self, op, trig)
        return c

    def _memo(self):
        m = self.__dict__.get("_resolved")
        if m is None:
            m = {}
            object.__setattr__(self, "_resolved", m)
        return m

    def premise_positions(self, op) -> tuple:
        """Operand positions some rule for ``op`` actually inspects.

        Every other operand has its premise dropped in all rules, so its
        behaviour cannot influence which rule fires or what it concludes.
        """
        cache = self.__dict__.get("_positions")
        if cache is None:
            cache = {}
            object.__setattr__(self, "_positions", cache)
        if op not in cache:
            used = set()
            for r in self.rules.get(op, ()):
                used |= r.W | r.T
            cache[op] = tuple(sorted(used))
        return cache[op]

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


def _resolve(spec, op, trig):
    for rule in spec.rules.get(op, ()):
        if rule.matches(trig):
            c = rule.conclusion
            if isinstance(c, Stop):
                return Stop(resolve_state(c.state, trig))
            return Step(c.term, resolve_state(c.state, trig))
    raise CoverageError(op, trig)


def resolve_rule(spec: StatefulSpec, op, trigger) -> object:
    if not isinstance(trigger, Trigger):
        Wset, s, succ = trigger
        trigger = Trigger(frozenset(Wset), s, tuple(succ))
    return spec.resolve(op, trigger)


# ---------------------------------------------------------------------------
# loading and validation


def _check_state_ref(ref, states, n, where):
    if ref == "@s" or ref in states:
        return
    if ref.startswith("@") and ref[1:].isdigit() and 1 <= int(ref[1:]) <= n:
        return
    raise SpecError(f"{where}: unknown state {ref!r}")


def build_spec(states, arities: dict, rules) -> StatefulSpec:
    """Validate and assemble a spec from (op, RuleSchema) pairs."""
    states = tuple(states)
    if not states:
        raise SpecError("need at least one state")
    if len(set(states)) != len(states):
        raise SpecError("duplicate state")
    for name in arities:
        if _is_metavar_name(name) or not name or any(c in name for c in "(), "):
            raise SpecError(f"bad operator name {name!r}")
    table: dict[str, list] = {op: [] for op in arities}
    seen: dict = {}
    for op, rule in rules:
        if op not in arities:
            raise SpecError(f"rule for unknown operator {op!r}")
        n = arities[op]
        where = f"rule for {op}"
        if len(rule.succ) != n:
            raise SpecError(f"{where}: succ has {len(rule.succ)} entries, arity is {n}")
        if not rule.W <= set(range(1, n + 1)) or not rule.T <= set(range(1, n + 1)) or rule.W & rule.T:
            raise SpecError(f"{where}: bad W/T index sets")
        if rule.s != ANY and rule.s not in states:
            raise SpecError(f"{where}: unknown state {rule.s!r}")
        for v in rule.succ:
            if v != ANY and v not in states:
                raise SpecError(f"{where}: unknown state {v!r}")
        c = rule.conclusion
        _check_state_ref(c.state, states, n, where)
        if c.state.startswith("@") and c.state != "@s":
            i = int(c.state[1:])
            if i not in rule.W and i not in rule.T:
                raise VariableDisciplineError(f"{op} {rule.key()}", c.state)
        if isinstance(c, Step):
            for v in variables(c.term):
                i = int(v.name[1:])
                if not 1 <= i <= n:
                    raise VariableDisciplineError(f"{op} {rule.key()}", v.name)
                if v.name[0] == "y" and i not in rule.W:
                    raise VariableDisciplineError(f"{op} {rule.key()}", v.name)
            _check_arities(c.term, arities)
        k = (op, rule.key())
        if k in seen and seen[k] != c:
            raise OverlapError(op, rule.key())
        seen[k] = c
        table[op].append(rule)
    spec = StatefulSpec(states, dict(arities), {op: tuple(rs) for op, rs in table.items()})
    for op in arities:
        for trig in spec.triggers(op):
            spec.resolve(op, trig)  # raises CoverageError
    return spec


def _check_arities(t, arities):
    if isinstance(t, MetaVar):
        return
    if t.op not in arities or arities[t.op] != len(t.args):
        raise SpecError(f"ill-formed conclusion term {show_term(t)}")
    for a in t.args:
        _check_arities(a, arities)


def load_spec(document) -> StatefulSpec:
    """Read the JSON spec format (a string, bytes or an already parsed dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(str(e)) from None
    try:
        states = document["states"]
        arities = {o["name"]: int(o["arity"]) for o in document["operators"]}
        rules = []
        for r in document["rules"]:
            op = r["op"]
            n = arities.get(op, 0)
            trig = r.get("trigger", {})
            Wset = frozenset(trig.get("W", []))
            T = frozenset(trig["T"]) if "T" in trig else frozenset(range(1, n + 1)) - Wset
            succ = tuple(trig.get("succ", [ANY] * n))
            concl = r["conclusion"]
            if concl["kind"] == "stop":
                c = Stop(concl["state"])
            elif concl["kind"] == "step":
                c = Step(parse_term(concl["term"]), concl["state"])
            else:
                raise ParseError(f"unknown conclusion kind {concl['kind']!r}")
            rules.append((op, RuleSchema(Wset, T, trig.get("s", ANY), succ, c)))
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed spec document: {e!r}") from None
    return build_spec(states, arities, rules)


def dump_spec(spec: StatefulSpec) -> dict:
    rules = []
    for op, rs in spec.rules.items():
        for r in rs:
            c = r.conclusion
            concl = ({"kind": "stop", "state": c.state} if isinstance(c, Stop)
                     else {"kind": "step", "term": show_term(c.term), "state": c.state})
            rules.append({"op": op,
                          "trigger": {"W": sorted(r.W), "T": sorted(r.T), "s": r.s,
                                      "succ": list(r.succ)},
                          "conclusion": concl})
    return {"states": list(spec.states),
            "operators": [{"name": f, "arity": n} for f, n in spec.arities.items()],
            "rules": rules}


# ---------------------------------------------------------------------------
# the operational model of L


def l_step(spec: StatefulSpec, p: Term, s: str):
    """One step of a closed term: Continue(p', s') or Done(s').

    Operands are run one step in state s to build the trigger; positions no
    rule inspects are filled in as terminating in an arbitrary state, which
    cannot change the rule selected.
    """
    n = len(p.args)
    results = [None] * n
    for i in spec.premise_positions(p.op):
        results[i - 1] = l_step(spec, p.args[i - 1], s)
    Wset = frozenset(i for i, r in enumerate(results, 1) if isinstance(r, Continue))
    filler = spec.states[0]
    succ = tuple(filler if r is None else r.store if isinstance(r, Continue) else r.final
                 for r in results)
    c = spec.resolve(p.op, Trigger(Wset, s, succ))
    if isinstance(c, Stop):
        return Done(c.state)
    env = {}
    for i, (a, r) in enumerate(zip(p.args, results), 1):
        env[f"x{i}"] = a
        if isinstance(r, Continue):
            env[f"y{i}"] = r.next
    return Continue(substitute(c.term, env), c.state)


def _l_config_step(spec):
    def step(config):
        r = l_step(spec, *config)
        if isinstance(r, Done):
            return r
        return r.store, (r.next, r.store)
    return step


def l_lasso(spec, p, s, fuel):
    """l_trace with repeated-configuration detection."""
    return run_lasso((p, s), _l_config_step(spec), fuel)


def l_trace(spec, p, s, fuel):
    emitted = []
    for _ in range(fuel):
        r = l_step(spec, p, s)
        if isinstance(r, Done):
            return Finished(tuple(emitted), r.final)
        p, s = r.next, r.store
        emitted.append(s)
    return Cut(tuple(emitted))


# ---------------------------------------------------------------------------
# the cool format


@dataclass
class CoolReport:
    verdict: str
    passive: set
    active: dict  # op -> receiving position
    violations: list  # (op, j, trigger, reason); j is None for passivity failures

    @property
    def cool(self):
        return self.verdict == "cool"

    def reasons(self, op, j=None):
        return [r for (o, jj, _, r) in self.violations if o == op and (j is None or jj == j)]

    def to_json(self):
        return {"verdict": self.verdict, "passive": sorted(self.passive),
                "active": dict(sorted(self.active.items())),
                "violations": [{"op": o, "j": j, "trigger": _trig_json(t), "reason": r}
                               for o, j, t, r in self.violations]}


def _trig_json(t):
    if t is None:
        return None
    return {"W": sorted(t.W), "s": t.s, "succ": list(t.succ)}


def _uses_y(t):
    return any(v.name[0] == "y" for v in variables(t))


def _is_passive(spec, op):
    by_state = {}
    for trig in spec.triggers(op):
        c = spec.resolve(op, trig)
        if isinstance(c, Step) and _uses_y(c.term):
            return False
        prev = by_state.setdefault(trig.s, c)
        if prev != c:
            return False
    return True


def _cool_violation(spec, op, j):
    """First violation of the cool shape for receiving position j, or None."""
    n = spec.arities[op]
    patience = Term(op, tuple(y(i) if i == j else x(i) for i in range(1, n + 1)))
    on_term = {}
    for trig in spec.triggers(op):
        c = spec.resolve(op, trig)
        sj = trig.succ[j - 1]
        if j in trig.W:
            if not (isinstance(c, Step) and c.term == patience and c.state == sj):
                return trig, "no-patience-rule"
            continue
        if isinstance(c, Step):
            vs = variables(c.term)
            if x(j) in vs:
                return trig, "mentions-receiving"
            if _uses_y(c.term):
                return trig, "uses-y"
        prev = on_term.setdefault(sj, (trig, c))
        if prev[1] != c:
            other = prev[0]
            if other.s != trig.s and other.W == trig.W and other.succ == trig.succ:
                return trig, "depends-on-input-state"
            return trig, "depends-on-other-operands"
    return None


def check_cool(spec: StatefulSpec) -> CoolReport:
    passive, active, violations = set(), {}, []
    for op, n in spec.arities.items():
        if _is_passive(spec, op):
            passive.add(op)
            continue
        if n == 0:
            violations.append((op, None, None, "not-passive"))
            continue
        found = None
        for j in range(1, n + 1):
            v = _cool_violation(spec, op, j)
            if v is None:
                found = j
                break
            violations.append((op, j, v[0], _refine_reason(spec, op, j, v)))
        if found is not None:
            active[op] = found
            violations = [v for v in violations if v[0] != op]
    return CoolReport("cool" if not violations else "notCool", passive, active, violations)


def _refine_reason(spec, op, j, v):
    trig, reason = v
    if reason != "depends-on-other-operands":
        return reason
    # look for a witness differing only in the input state
    base = spec.resolve(op, trig)
    for s in spec.states:
        t2 = Trigger(trig.W, s, trig.succ)
        if spec.resolve(op, t2) != base:
            return "depends-on-input-state"
    return reason


def check_cool_naive(spec: StatefulSpec, report: CoolReport) -> bool:
    """Re-check an accepted spec against the literal side conditions.

    Independent of check_cool's search: expands every trigger and tests the
    two rule shapes of the cool format directly.
    """
    for op, n in spec.arities.items():
        rules = [(t, spec.resolve(op, t)) for t in spec.triggers(op)]
        if op in report.passive:
            for t, c in rules:
                if isinstance(c, Step) and any(v.name.startswith("y") for v in variables(c.term)):
                    return False
                if c != spec.resolve(op, Trigger(frozenset(), t.s, (spec.states[0],) * n)):
                    return False
            continue
        j = report.active.get(op)
        if j is None:
            return False
        for t, c in rules:
            if j in t.W:
                args = [MetaVar(f"x{i}") for i in range(1, n + 1)]
                args[j - 1] = MetaVar(f"y{j}")
                if c != Step(Term(op, tuple(args)), t.succ[j - 1]):
                    return False
            else:
                if isinstance(c, Step) and variables(c.term) - {MetaVar(f"x{i}") for i in range(1, n + 1) if i != j}:
                    return False
                for t2, c2 in rules:
                    if j not in t2.W and t2.succ[j - 1] == t.succ[j - 1] and c2 != c:
                        return False
    return True


# ---------------------------------------------------------------------------
# the derived reader-writer extension L²


def bar(op):
    return f"{op}~"


@dataclass(frozen=True)
class RWSpec:
    spec: StatefulSpec
    passive: frozenset
    active: dict = field(hash=False)  # op -> j
    passive_table: dict = field(hash=False)  # (op, s) -> Step/Stop
    active_table: dict = field(hash=False)  # (op, s') -> Step/Stop, independent of s

    @property
    def states(self):
        return self.spec.states

    def signature(self) -> Signature:
        ops = [OpSig(f, (R,) * n, R) for f, n in self.spec.arities.items()]
        for f, j in self.active.items():
            n = self.spec.arities[f]
            ops.append(OpSig(bar(f), tuple(W if i == j else R for i in range(1, n + 1)), W))
        ops += [OpSig("run", (R, STATE), W), OpSig("out", (STATE, W), W), OpSig("ret", (STATE,), W)]
        return Signature(ops)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    def to_json(self):
        sig = self.signature()
        return {
            "signature": [{"name": o.name, "args": [a.value if hasattr(a, "value") else a for a in o.args],
                           "result": o.result.value} for o in sig],
            "passive": {f"{f}|{s}": _concl_json(c) for (f, s), c in self.passive_table.items()},
            "active": {f"{f}|{s}": _concl_json(c) for (f, s), c in self.active_table.items()},
            "receiving": dict(self.active),
        }


def _concl_json(c):
    if isinstance(c, Stop):
        return {"kind": "stop", "state": c.state}
    return {"kind": "step", "term": show_term(c.term), "state": c.state}


def derive_rw(spec: StatefulSpec) -> RWSpec:
    report = check_cool(spec)
    if not report.cool:
        raise NotCool(report)
    ptable, atable = {}, {}
    for f in report.passive:
        n = spec.arities[f]
        for s in spec.states:
            ptable[f, s] = spec.resolve(f, Trigger(frozenset(), s, (spec.states[0],) * n))
    for f, j in report.active.items():
        n = spec.arities[f]
        for s1 in spec.states:
            succ = tuple(s1 if i == j else spec.states[0] for i in range(1, n + 1))
            atable[f, s1] = spec.resolve(f, Trigger(frozenset(), spec.states[0], succ))
    return RWSpec(spec, frozenset(report.passive), dict(report.active), ptable, atable)


def w_run(p, s):
    return Term("run", (p, s))


def w_out(s, c):
    return Term("out", (s, c))


def w_ret(s):
    return Term("ret", (s,))


def _plug(t, args):
    return substitute(t, {f"x{i}": a for i, a in enumerate(args, 1)})


def rw_reader_step(rw: RWSpec, p: Term, s: str) -> Term:
    f = p.op
    if f in rw.passive:
        c = rw.passive_table[f, s]
        if isinstance(c, Stop):
            return w_ret(c.state)
        return w_out(c.state, w_run(_plug(c.term, p.args), c.state))
    j = rw.active[f]
    return Term(bar(f), p.args[:j - 1] + (w_run(p.args[j - 1], s),) + p.args[j:])


def rw_writer_step(rw: RWSpec, c: Term):
    op = c.op
    if op == "run":
        p, s = c.args
        return Silent(rw_reader_step(rw, p, s))
    if op == "ret":
        return Done(c.args[0])
    if op == "out":
        s, d = c.args
        return Output(d, s)
    f = op[:-1]
    j = rw.active[f]
    inner = c.args[j - 1]
    r = rw_writer_step(rw, inner)
    if isinstance(r, (Silent, Output)):
        new = Term(op, c.args[:j - 1] + (r.next,) + c.args[j:])
        return Silent(new) if isinstance(r, Silent) else Output(new, r.state)
    concl = rw.active_table[f, r.final]
    if isinstance(concl, Stop):
        return Done(concl.state)
    s2 = concl.state
    return Output(w_run(_plug(concl.term, c.args), s2), s2)


def rw_writer_steps(rw):
    return lambda c: (rw_writer_step(rw, c),)


def rw_trace(rw: RWSpec, p: Term, s: str, fuel: int, detect_cycles: bool = False):
    """Reader trace of L² assembled from level-1 weak hops."""
    if fuel < 2:
        return Cut()
    return trace_by_weak_hops(rw_reader_step(rw, p, s), rw_writer_steps(rw), fuel - 1,
                              detect_cycles)


@dataclass
class PreservationReport:
    checked: int = 0
    agree_finished: int = 0
    agree_diverging: int = 0
    cut: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches


def verify_preservation(spec: StatefulSpec, terms, states=None, fuel: int = 100,
                        rw: RWSpec | None = None, detect_cycles: bool = True) -> PreservationReport:
    """Compare traces of L and of the derived L² on every (term, state).

    The L² run is given ``4 * fuel + 4`` expansions; results where a side
    ran out of fuel count as agreement only if they are consistent. With
    ``detect_cycles`` runs that revisit a configuration are compared as
    complete infinite traces.
    """
    rw = rw or derive_rw(spec)
    states = spec.states if states is None else tuple(states)
    report = PreservationReport()
    with paused_gc():
        for p in terms:
            for s in states:
                if detect_cycles:
                    a = l_lasso(spec, p, s, fuel)
                else:
                    a = l_trace(spec, p, s, fuel)
                b = rw_trace(rw, p, s, 4 * fuel + 4, detect_cycles)
                report.checked += 1
                if not consistent(a, b):
                    report.mismatches.append((p, s, a, b))
                elif isinstance(a, Finished) and isinstance(b, Finished):
                    report.agree_finished += 1
                elif isinstance(a, Lasso) and isinstance(b, Lasso):
                    report.agree_diverging += 1
                else:
                    report.cut += 1
    return report


# ---------------------------------------------------------------------------
# generators


def enumerate_terms(spec: StatefulSpec, depth: int):
    """All closed terms of depth <= depth (constants have depth 1)."""
    by_depth = [[]]
    for d in range(1, depth + 1):
        below = [t for lvl in by_depth for t in lvl]
        top = set(by_depth[-1])
        new = []
        for f, n in spec.arities.items():
            if n == 0:
                if d == 1:
                    new.append(Term(f))
                continue
            for args in itertools.product(below, repeat=n):
                if any(a in top for a in args):
                    new.append(Term(f, args))
        by_depth.append(new)
    return [t for lvl in by_depth for t in lvl]


def random_term(spec: StatefulSpec, rng: random.Random, depth: int):
    consts = [f for f, n in spec.arities.items() if n == 0]
    if depth <= 1:
        return Term(rng.choice(consts))
    f = rng.choice(list(spec.arities))
    n = spec.arities[f]
    return Term(f, tuple(random_term(spec, rng, rng.randint(1, depth - 1)) for _ in range(n)))


def _random_open_term(rng, arities, allowed, depth):
    """A random conclusion term using each variable in ``allowed`` at most once.

    Linearity keeps terms from doubling at every step of a run.
    """
    unused = list(allowed)
    consts = [f for f, n in arities.items() if n == 0]

    def go(d):
        if d <= 1 or rng.random() < 0.4:
            pool = [MetaVar(v) for v in unused] + [Term(c) for c in consts]
            t = rng.choice(pool)
            if isinstance(t, MetaVar):
                unused.remove(t.name)
            return t
        f = rng.choice(list(arities))
        return Term(f, tuple(go(d - 1) for _ in range(arities[f])))

    return go(depth)


def random_cool_spec(rng: random.Random, max_states=3, max_ops=4, max_arity=2,
                     stop_prob: float = 0.45) -> StatefulSpec:
    """A random spec that is cool by construction.

    Passive operators get one premise-free rule per input state; active
    operators get the patience rule and one conclusion per s_j. Conclusion
    terms are linear in the operand variables. ``stop_prob`` is the chance
    that a conclusion terminates instead of stepping.
    """
    states = tuple(f"s{i}" for i in range(rng.randint(1, max_states)))
    n_ops = rng.randint(1, max_ops)
    arities = {"k0": 0}
    for i in range(1, n_ops):
        arities[f"f{i}"] = rng.randint(0, max_arity)
    rules = []
    for f, n in arities.items():
        is_active = n > 0 and rng.random() < 0.6
        if not is_active:
            allowed = [f"x{i}" for i in range(1, n + 1)]
            for s in states:
                if rng.random() < stop_prob:
                    c = Stop(rng.choice(states))
                else:
                    c = Step(_random_open_term(rng, arities, allowed, 3), rng.choice(states))
                rules.append((f, RuleSchema(frozenset(), frozenset(), s, (ANY,) * n, c)))
            continue
        j = rng.randint(1, n)
        pat = Term(f, tuple(y(i) if i == j else x(i) for i in range(1, n + 1)))
        rules.append((f, RuleSchema(frozenset({j}), frozenset(), ANY, (ANY,) * n, Step(pat, f"@{j}"))))
        allowed = [f"x{i}" for i in range(1, n + 1) if i != j]
        for s1 in states:
            if rng.random() < stop_prob + 0.05:
                c = Stop(rng.choice(states + ("@" + str(j),)))
            else:
                c = Step(_random_open_term(rng, arities, allowed, 3), rng.choice(states))
            succ = tuple(s1 if i == j else ANY for i in range(1, n + 1))
            rules.append((f, RuleSchema(frozenset(), frozenset({j}), ANY, succ, c)))
    return build_spec(states, arities, rules)


# ---------------------------------------------------------------------------
# Imp as a stateful SOS specification over a finite store universe


def imp_spec(variables=("x",), values=(0, 1, 2), exprs=None) -> StatefulSpec:
    """Imp restricted to stores over ``variables`` with values in ``values``.

    Expressions are atoms (constants from ``values`` and the variables), so
    the store universe is closed under every assignment. States are named by
    the store they stand for, e.g. ``{x=1}``.
    """
    from .imp import eev
    from .syntax import Num, Var, VarStore

    if exprs is None:
        exprs = [Num(v) for v in values] + [Var(v) for v in variables]
    stores = [VarStore(dict(zip(variables, vals)))
              for vals in itertools.product(values, repeat=len(variables))]
    name = {st: repr(st) for st in stores}
    states = tuple(name[st] for st in stores)
    arities = {"skip": 0, "seq": 2}
    rules = [("skip", RuleSchema(frozenset(), frozenset(), ANY, (), Stop("@s")))]
    for v in variables:
        for e in exprs:
            op = f"assign[{v}:={e!r}]"
            arities[op] = 0
            for st in stores:
                new = st.set(v, eev(e, st))
                if new not in name:
                    raise SpecError(f"store universe not closed under {op}")
                rules.append((op, RuleSchema(frozenset(), frozenset(), name[st], (), Stop(name[new]))))
    for e in exprs:
        op = f"while[{e!r}]"
        arities[op] = 1
        for st in stores:
            if eev(e, st) == 0:
                c = Stop("@s")
            else:
                c = Step(Term("seq", (x(1), Term(op, (x(1),)))), "@s")
            rules.append((op, RuleSchema(frozenset(), frozenset(), name[st], (ANY,), c)))
    rules.append(("seq", RuleSchema(frozenset({1}), frozenset(), ANY, (ANY, ANY),
                                    Step(Term("seq", (y(1), x(2))), "@1"))))
    rules.append(("seq", RuleSchema(frozenset(), frozenset({1}), ANY, (ANY, ANY),
                                    Step(x(2), "@1"))))
    return build_spec(states, arities, rules)


def imp_to_spec_term(p: Term) -> Term:
    """Translate an Imp program (atom expressions only) into Imp-as-spec syntax."""
    if p.op == "skip":
        return Term("skip")
    if p.op == "assign":
        v, e = p.args
        return Term(f"assign[{v}:={e!r}]")
    if p.op == "while":
        e, body = p.args
        return Term(f"while[{e!r}]", (imp_to_spec_term(body),))
    if p.op == "seq":
        return Term("seq", tuple(imp_to_spec_term(a) for a in p.args))
    raise ValueError(f"not an Imp program: {p!r}")


def imp2_to_rw_term(c: Term) -> Term:
    """Translate a hand-coded Imp² writer or reader into derived-L² syntax."""
    if c.op == "run":
        p, s = c.args
        return w_run(imp_to_spec_term(p), repr(s))
    if c.op == "out":
        s, d = c.args
        return w_out(repr(s), imp2_to_rw_term(d))
    if c.op == "ret":
        return w_ret(repr(c.args[0]))
    if c.op == "wseq":
        inner, q = c.args
        return Term(bar("seq"), (imp2_to_rw_term(inner), imp_to_spec_term(q)))
    return imp_to_spec_term(c)
