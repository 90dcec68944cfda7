"""Step results, traces, and weak-transition closures shared by all languages.

A writer step is one of ``Silent(d)`` (c -> d), ``Output(d, s)`` (c -s-> d),
``Done(s)`` (c terminates in s) or, for languages with values,
``DoneVal(v, s)``. A single-sorted program step is ``Continue(p', s')`` or
``Done(s')``.
"""

from __future__ import annotations

import contextlib
import enum
import gc
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

# Step results are created once per transition, millions of times in the
# exhaustive checks; they are treated as immutable but not frozen, since a
# frozen dataclass pays for object.__setattr__ on every construction.


@dataclass(slots=True, unsafe_hash=True)
class Silent:
    next: Any


@dataclass(slots=True, unsafe_hash=True)
class Output:
    next: Any
    state: Any


@dataclass(slots=True, unsafe_hash=True)
class Done:
    final: Any


@dataclass(frozen=True, slots=True)
class DoneVal:
    value: Any
    store: Any
    # set on allocation steps: the location is one canonical pick among all fresh ones
    fresh: bool = field(default=False, compare=False)


@dataclass(slots=True, unsafe_hash=True)
class Continue:
    next: Any
    store: Any


# --- verdicts -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Holds:
    note: str = ""

    def __bool__(self):
        return True


@dataclass(frozen=True, slots=True)
class Fails:
    """A replayable counterexample: the pair, the violated clause, the witness."""

    pair: tuple
    clause: Any
    sort: str = "r"
    store: Any = None
    witness: Any = None
    depth: int | None = None
    detail: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True, slots=True)
class Inconclusive:
    pair: tuple
    reason: str = ""

    def __bool__(self):
        return False


# --- trace / cost / termination results -------------------------------------


@dataclass(frozen=True, slots=True)
class Finished:
    emitted: tuple
    final: Any

    @property
    def finished(self):
        return True


@dataclass(frozen=True, slots=True)
class Cut:
    emitted: tuple = ()

    @property
    def finished(self):
        return False


@dataclass(frozen=True, slots=True)
class CostFinished:
    steps: int
    final: Any

    @property
    def finished(self):
        return True


@dataclass(frozen=True, slots=True)
class TerFinished:
    final: Any

    @property
    def finished(self):
        return True


@dataclass(frozen=True, slots=True)
class Lasso:
    """An infinite trace certified by a repeated configuration.

    The emitted states are ``prefix`` followed by ``cycle`` forever. An empty
    cycle means the run livelocks silently after emitting the prefix.
    """

    prefix: tuple
    cycle: tuple

    @property
    def finished(self):
        return False

    def unroll(self, n: int) -> tuple:
        out = list(self.prefix[:n])
        if not self.cycle:
            return tuple(out)
        while len(out) < n:
            out.extend(self.cycle)
        return tuple(out[:n])


def cost_of_trace(t):
    """(s1..sn, s') -> (n, s'); a cut trace maps to Cut."""
    if isinstance(t, Finished):
        return CostFinished(len(t.emitted), t.final)
    return Cut()


def ter_of_trace(t):
    if isinstance(t, Finished):
        return TerFinished(t.final)
    return Cut()


def consistent(a, b) -> bool:
    """Can two (possibly cut) traces be prefixes of the same full trace?

    Lassos denote complete infinite traces and are compared exactly.
    """
    if isinstance(a, Lasso) or isinstance(b, Lasso):
        return _consistent_lasso(a, b)
    if isinstance(a, Finished) and isinstance(b, Finished):
        return a == b
    if isinstance(a, Cut) and isinstance(b, Cut):
        n = min(len(a.emitted), len(b.emitted))
        return a.emitted[:n] == b.emitted[:n]
    fin, cut = (a, b) if isinstance(a, Finished) else (b, a)
    k = len(cut.emitted)
    return k <= len(fin.emitted) and fin.emitted[:k] == cut.emitted


def _consistent_lasso(a, b) -> bool:
    if isinstance(a, Lasso) and isinstance(b, Lasso):
        if bool(a.cycle) != bool(b.cycle):
            return False
        if not a.cycle:
            return a.prefix == b.prefix
        # eventually periodic sequences agree everywhere iff they agree this far
        n = max(len(a.prefix), len(b.prefix)) + math.lcm(len(a.cycle), len(b.cycle))
        return a.unroll(n) == b.unroll(n)
    las, other = (a, b) if isinstance(a, Lasso) else (b, a)
    if isinstance(other, Finished):
        return False
    k = len(other.emitted)
    if not las.cycle and k > len(las.prefix):
        return False
    return las.unroll(k) == other.emitted


# --- semantics flavours -----------------------------------------------------


class Flavor(enum.Enum):
    TRACE = "trace"
    COST = "cost"
    TERMINATION = "ter"

    @classmethod
    def parse(cls, text):
        aliases = {"trc": "trace", "cst": "cost", "termination": "ter"}
        return cls(aliases.get(text, text))

    @property
    def level(self):
        return 2 if self is Flavor.TERMINATION else 1

    def observe(self, trace):
        if self is Flavor.TRACE:
            return trace if isinstance(trace, Finished) else Cut()
        if self is Flavor.COST:
            return cost_of_trace(trace)
        return ter_of_trace(trace)


# --- driving a deterministic writer -----------------------------------------


def run_writer(c, step: Callable, fuel: int, emitted=()):
    """Follow a deterministic writer for at most ``fuel`` steps.

    ``step`` maps a writer to a single step result.
    """
    out = list(emitted)
    for _ in range(fuel):
        r = step(c)
        if isinstance(r, Done):
            return Finished(tuple(out), r.final)
        if isinstance(r, Output):
            out.append(r.state)
        c = r.next
    return Cut(tuple(out))


def run_lasso(config, step: Callable, fuel: int, after_output_only: bool = False):
    """Follow a deterministic system, detecting repeated configurations.

    ``step`` maps a configuration to ``(emitted_or_None, next_config)`` or to
    ``Done(final)``. Returns Finished, Lasso (a certified infinite run) or Cut.
    With ``after_output_only`` configurations are remembered only right after
    an emitting step: cheaper, and still exact for every cycle that emits,
    while a silent livelock then runs out of fuel and shows up as Cut.
    """
    out = []
    seen = {config: 0}
    for _ in range(fuel):
        r = step(config)
        if type(r) is Done:
            return Finished(tuple(out), r.final)
        emitted, config = r
        if emitted is not None:
            out.append(emitted)
        elif after_output_only:
            continue
        k = seen.get(config)
        if k is not None:
            return Lasso(tuple(out[:k]), tuple(out[k:]))
        seen[config] = len(out)
    return Cut(tuple(out))


@contextlib.contextmanager
def paused_gc():
    """Suspend the cycle collector for loops that only make acyclic garbage.

    Reference counting still frees everything; this only skips the repeated
    scans of the (large, long-lived) enumerated term sets.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


# --- weak closures ----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class WeakClosure:
    source: Any
    mode: int  # 1 or 2
    silent_reach: frozenset
    outputs: frozenset  # (state, writer)
    terminations: frozenset  # states
    values: frozenset = frozenset()  # (value, store) for value-returning writers
    truncated: bool = False
    expanded: int = field(default=0, compare=False)

    @property
    def diverges(self):
        """No termination reachable and the exploration was exhaustive."""
        return not self.truncated and not self.terminations and not self.values


def weak_closure(c, steps: Callable[[Any], Iterable], fuel: int | None = None, mode: int = 1):
    """Explore weak transitions from writer ``c``.

    ``steps`` returns the set of strong steps of a writer. Mode 1 follows
    silent steps only (the closure keeps intermediate states observable);
    mode 2 also follows emitting steps, ignoring the states they emit.
    ``fuel`` bounds the number of writers expanded; None means explore until
    exhausted (only safe on finite systems).
    """
    if mode not in (1, 2):
        raise ValueError("mode is 1 or 2")
    if fuel is not None and fuel < 1:
        raise ValueError("fuel must be positive")
    seen = {c}
    queue = deque([c])
    outputs, terms, values = set(), set(), set()
    expanded = 0
    while queue:
        if fuel is not None and expanded >= fuel:
            break
        x = queue.popleft()
        expanded += 1
        for r in steps(x):
            if isinstance(r, Silent):
                nxt = r.next
            elif isinstance(r, Output):
                outputs.add((r.state, r.next))
                if mode == 1:
                    continue
                nxt = r.next
            elif isinstance(r, Done):
                terms.add(r.final)
                continue
            elif isinstance(r, DoneVal):
                values.add((r.value, r.store))
                continue
            else:
                raise TypeError(f"not a writer step: {r!r}")
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return WeakClosure(c, mode, frozenset(seen), frozenset(outputs), frozenset(terms),
                       frozenset(values), truncated=bool(queue), expanded=expanded)


def trace_by_weak_hops(c, steps: Callable, fuel: int, detect_cycles: bool = False):
    """Trace of a deterministic writer assembled from level-1 weak hops.

    Each hop is c_i =(1,s)=> c_{i+1}; the trace ends with c_n ⇓1 s. This is
    the textbook reading of the trace map and is deliberately a different
    route from ``run_writer``. With ``detect_cycles`` a writer reached again
    at a hop boundary certifies an infinite trace (Lasso).
    """
    emitted = []
    seen = {c: 0}
    budget = fuel
    while budget > 0:
        cl = weak_closure(c, steps, budget, 1)
        budget -= cl.expanded
        if cl.terminations:
            (s,) = cl.terminations
            return Finished(tuple(emitted), s)
        if cl.outputs:
            if len(cl.outputs) != 1:
                raise ValueError("writer is not deterministic")
            (s, d), = cl.outputs
            emitted.append(s)
            c = d
            if detect_cycles:
                k = seen.get(c)
                if k is not None:
                    return Lasso(tuple(emitted[:k]), tuple(emitted[k:]))
                seen[c] = len(emitted)
            continue
        if not cl.truncated:
            return Lasso(tuple(emitted), ())  # silent livelock, fully explored
        break
    return Cut(tuple(emitted))
