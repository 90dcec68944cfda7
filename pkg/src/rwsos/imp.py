"""Imp: integer variables, assignment, sequencing and while loops.

Programs are :class:`~rwsos.syntax.Term` values over ``IMP_SIGNATURE``;
``imp_step`` implements the small-step rules and the ``*_trace`` helpers
read off the trace, cost and termination semantics under an explicit fuel.
"""

from __future__ import annotations

from typing import Iterable

from .syntax import (ARITH, EXPR, INT64_MAX, INT64_MIN, VAR, BinOp, Expr, Num, OpSig,
                     Overflow, R, Signature, Term, Var, VarStore, as_expr, check_int)
from .transitions import (Continue, Cut, Done, Fails, Finished, Holds,  # noqa: F401
                          cost_of_trace, run_lasso, ter_of_trace)

IMP_SIGNATURE = Signature([
    OpSig("skip", (), R),
    OpSig("assign", (VAR, EXPR), R),
    OpSig("while", (EXPR, R), R),
    OpSig("seq", (R, R), R),
])

SKIP = Term("skip")


def skip():
    return SKIP


def assign(x: str, e) -> Term:
    return Term("assign", (x, as_expr(e)))


def while_(e, body: Term) -> Term:
    return Term("while", (as_expr(e), body))


def seq(p: Term, q: Term, *rest: Term) -> Term:
    """Right-nested sequence p ; (q ; ...)."""
    if rest:
        return Term("seq", (p, seq(q, *rest)))
    return Term("seq", (p, q))


def eev(e: Expr, s: VarStore) -> int:
    kind = type(e)
    if kind is Var:
        return s[e.name]
    if kind is Num:
        return check_int(e.n)
    if kind is BinOp:
        v = ARITH[e.op](eev(e.left, s), eev(e.right, s))
        if not INT64_MIN <= v <= INT64_MAX:
            raise Overflow(f"{e!r} = {v}")
        return v
    raise TypeError(f"not an expression: {e!r}")


def imp_step(p: Term, s: VarStore):
    """One transition p,s -> p',s' (Continue) or p,s ↓ s' (Done)."""
    op = p.op
    if op == "seq":
        first, second = p.args
        r = imp_step(first, s)
        if type(r) is Done:
            return Continue(second, r.final)
        return Continue(Term("seq", (r.next, second)), r.store)
    if op == "skip":
        return Done(s)
    if op == "assign":
        x, e = p.args
        return Done(s.set(x, eev(e, s)))
    if op == "while":
        e, body = p.args
        if eev(e, s) == 0:
            return Done(s)
        return Continue(Term("seq", (body, p)), s)
    raise ValueError(f"not an Imp program: {p!r}")


def imp_trace(p: Term, s: VarStore, fuel: int):
    if fuel < 1:
        raise ValueError("fuel must be positive")
    emitted = []
    for _ in range(fuel):
        r = imp_step(p, s)
        if isinstance(r, Done):
            return Finished(tuple(emitted), r.final)
        p, s = r.next, r.store
        emitted.append(s)
    return Cut(tuple(emitted))


def _imp_config_step(config):
    p, s = config
    r = imp_step(p, s)
    if type(r) is Done:
        return r
    return r.store, (r.next, r.store)


def imp_lasso(p: Term, s: VarStore, fuel: int):
    """Like imp_trace, but a repeated configuration certifies divergence (Lasso)."""
    if fuel < 1:
        raise ValueError("fuel must be positive")
    return run_lasso((p, s), _imp_config_step, fuel)


def imp_cost(p, s, fuel):
    return cost_of_trace(imp_trace(p, s, fuel))


def imp_ter(p, s, fuel):
    return ter_of_trace(imp_trace(p, s, fuel))


# ---------------------------------------------------------------------------
# resumption bisimulation


def check_resumption_bisim(R: Iterable[tuple], stores: Iterable[VarStore], depth: int):
    """Check the four resumption-bisimulation clauses on a store sample.

    Successor pairs are added to the relation and checked in turn, up to
    ``depth`` levels. Every related pair is exercised on every sample store,
    which models an observer that may overwrite the store between steps.
    A failure is a genuine counterexample; success only covers the sample.
    """
    stores = list(stores)
    if not stores:
        raise ValueError("need at least one store")
    if depth < 1:
        raise ValueError("depth must be positive")
    seen = set()
    frontier = list(dict.fromkeys(R))
    for level in range(1, depth + 1):
        nxt = []
        for p, q in frontier:
            if (p, q) in seen:
                continue
            seen.add((p, q))
            for s in stores:
                a, b = imp_step(p, s), imp_step(q, s)
                for clause, x, y in (("a", a, b), ("c", b, a)):
                    if isinstance(x, Continue) and not (isinstance(y, Continue) and y.store == x.store):
                        return Fails((p, q), clause, store=s, depth=level, detail=f"{x} unmatched by {y}")
                for clause, x, y in (("b", a, b), ("d", b, a)):
                    if isinstance(x, Done) and y != x:
                        return Fails((p, q), clause, store=s, depth=level, detail=f"{x} unmatched by {y}")
                if isinstance(a, Continue):
                    nxt.append((a.next, b.next))
        frontier = nxt
        if not frontier:
            break
    return Holds(f"up to depth {depth} on a sample of {len(stores)} stores; "
                 f"{len(seen)} pairs checked")


# ---------------------------------------------------------------------------
# enumeration of small programs

VARIABLES = ("x", "y")
CONSTANTS = (0, 1, 2)


def enumerate_exprs(depth: int, variables=VARIABLES, constants=CONSTANTS, ops=("+", "-", "*")):
    """All expressions of height <= depth (atoms have height 1)."""
    levels = [[Num(c) for c in constants] + [Var(v) for v in variables]]
    for _ in range(1, depth):
        below = [e for lvl in levels for e in lvl]
        new = [BinOp(o, a, b) for o in ops for a in below for b in below
               if max(_h(a), _h(b)) == len(levels)]
        levels.append(new)
    return [e for lvl in levels[:depth] for e in lvl]


def _h(e):
    return 1 + max(_h(e.left), _h(e.right)) if isinstance(e, BinOp) else 1


def enumerate_programs(depth: int, variables=VARIABLES, exprs=None):
    """All Imp programs of statement height <= depth.

    skip and assignments have height 1; while and ; add one level. Embedded
    expressions come from ``exprs`` (default: the atoms over the constants
    and variables) and do not add height.
    """
    if exprs is None:
        exprs = enumerate_exprs(1, variables)
    leaves = [SKIP] + [assign(x, e) for x in variables for e in exprs]
    by_height = [leaves]
    for h in range(2, depth + 1):
        lower = [p for lvl in by_height for p in lvl]
        top = by_height[-1]
        top_set = set(top)
        new = [while_(e, p) for e in exprs for p in top]
        new += [seq(p, q) for p in lower for q in lower if p in top_set or q in top_set]
        by_height.append(new)
    return [p for lvl in by_height for p in lvl]


def enumerate_programs_ast(depth: int, variables=VARIABLES, exprs=None):
    """All Imp programs of syntax-tree depth <= depth.

    Every node counts, including expression leaves: skip has depth 1,
    ``x := 1`` and ``while x skip`` depth 2. Expressions are drawn from
    ``exprs`` (default: atoms over the constants and variables) and count
    as a single leaf.
    """
    if exprs is None:
        exprs = enumerate_exprs(1, variables)
    levels = {1: [SKIP]}
    if depth >= 2:
        levels[2] = ([assign(x, e) for x in variables for e in exprs]
                     + [while_(e, SKIP) for e in exprs] + [seq(SKIP, SKIP)])
    for d in range(3, depth + 1):
        lower = [p for k in range(1, d) for p in levels[k]]
        top = levels[d - 1]
        top_set = set(top)
        levels[d] = ([while_(e, p) for e in exprs for p in top]
                     + [seq(p, q) for p in lower for q in lower if p in top_set or q in top_set])
    return [p for k in range(1, depth + 1) for p in levels.get(k, [])]
