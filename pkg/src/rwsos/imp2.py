"""Imp²: Imp split into readers (programs awaiting a store) and writers.

Readers are exactly Imp programs. Writers are ``run(p, s)`` (written
[p]_s), ``out(s, c)`` (s.c), ``ret(s)`` and ``wseq(c, q)`` (c ; q).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .imp import IMP_SIGNATURE, eev, imp_lasso, imp_trace
from .syntax import STORE, OpSig, R, Term, W, VarStore
from .transitions import (Cut, Done, Finished, Lasso, Output, Silent, consistent, paused_gc, run_lasso, run_writer,
                          weak_closure as _weak_closure)

IMP2_SIGNATURE = IMP_SIGNATURE.extend([
    OpSig("run", (R, STORE), W),
    OpSig("out", (STORE, W), W),
    OpSig("ret", (STORE,), W),
    OpSig("wseq", (W, R), W),
])

WRITER_OPS = frozenset({"run", "out", "ret", "wseq"})


def run(p: Term, s: VarStore) -> Term:
    return Term("run", (p, s))


def out(s: VarStore, c: Term) -> Term:
    return Term("out", (s, c))


def ret(s: VarStore) -> Term:
    return Term("ret", (s,))


def wseq(c: Term, q: Term) -> Term:
    return Term("wseq", (c, q))


def is_writer(t: Term) -> bool:
    return t.op in WRITER_OPS


def reader_step(p: Term, s: VarStore) -> Term:
    # terms are built inline: this is the innermost loop of the embedding check
    op = p.op
    if op == "seq":
        first, second = p.args
        return Term("wseq", (Term("run", (first, s)), second))
    if op == "skip":
        return Term("ret", (s,))
    if op == "assign":
        x, e = p.args
        return Term("ret", (s.set(x, eev(e, s)),))
    if op == "while":
        e, body = p.args
        if eev(e, s) == 0:
            return Term("ret", (s,))
        return Term("out", (s, Term("run", (Term("seq", (body, p)), s))))
    raise ValueError(f"not an Imp² reader: {p!r}")


def writer_step(c: Term):
    op = c.op
    if op == "wseq":
        inner, q = c.args
        if inner.op == "run":  # the common case, without the extra call
            return Silent(Term("wseq", (reader_step(*inner.args), q)))
        r = writer_step(inner)
        kind = type(r)
        if kind is Silent:
            return Silent(Term("wseq", (r.next, q)))
        if kind is Output:
            return Output(Term("wseq", (r.next, q)), r.state)
        return Output(Term("run", (q, r.final)), r.final)
    if op == "run":
        p, s = c.args
        return Silent(reader_step(p, s))
    if op == "out":
        s, d = c.args
        return Output(d, s)
    if op == "ret":
        return Done(c.args[0])
    raise ValueError(f"not an Imp² writer: {c!r}")


def writer_steps(c: Term):
    return (writer_step(c),)


def weak_closure(c: Term, fuel: int, mode: int | str = 1):
    """Weak transitions of an Imp² writer; mode is 1/'level1' or 2/'level2'."""
    if isinstance(mode, str):
        mode = {"level1": 1, "level2": 2}[mode]
    return _weak_closure(c, writer_steps, fuel, mode)


class ArgMismatch(TypeError):
    pass


def imp2_trace(x: Term, s: VarStore | None, fuel: int):
    """Trace of a reader on ``s`` or of a writer (``s`` must then be None)."""
    if fuel < 1:
        raise ValueError("fuel must be positive")
    if is_writer(x):
        if s is not None:
            raise ArgMismatch("a writer takes no input store")
        return run_writer(x, writer_step, fuel)
    if s is None:
        raise ArgMismatch("a reader needs an input store")
    if fuel == 1:
        return Cut()
    return run_writer(reader_step(x, s), writer_step, fuel - 1)


def _writer_config_step(c):
    """writer_step as ``(emitted_or_None, next)`` or Done, without step objects."""
    op = c.op
    if op == "wseq":
        inner, q = c.args
        if inner.op == "run":
            p, s = inner.args
            return None, Term("wseq", (reader_step(p, s), q))
        r = _writer_config_step(inner)
        if type(r) is Done:
            f = r.final
            return f, Term("run", (q, f))
        return r[0], Term("wseq", (r[1], q))
    if op == "run":
        p, s = c.args
        return None, reader_step(p, s)
    if op == "out":
        s, d = c.args
        return s, d
    if op == "ret":
        return Done(c.args[0])
    raise ValueError(f"not an Imp² writer: {c!r}")


def imp2_lasso(p: Term, s: VarStore, fuel: int):
    """Reader trace with repeated-configuration detection (see run_lasso).

    Every cycle of Imp² writers unfolds a loop and therefore emits, so
    checking configurations after emitting steps loses nothing.
    """
    if fuel < 2:
        return Cut()
    return run_lasso(reader_step(p, s), _writer_config_step, fuel - 1, after_output_only=True)


def embedding_fuel(fuel: int) -> int:
    return 4 * fuel + 4


@dataclass
class EmbeddingReport:
    checked: int = 0
    agree_finished: int = 0
    agree_diverging: int = 0  # both runs closed a cycle and the infinite traces agree
    cut_cut: int = 0
    one_cut: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches


def verify_embedding(terms, stores, fuel: int, detect_cycles: bool = True) -> EmbeddingReport:
    """Compare Imp traces with Imp² reader traces on every (term, store).

    The Imp² run gets ``4 * fuel + 4`` steps. A mismatch is any pair of
    results that cannot be prefixes of one trace; results where at least
    one side ran out of fuel are tallied separately. With ``detect_cycles``
    both runs stop at the first repeated configuration, so divergent runs
    are compared as complete infinite traces instead of as prefixes.
    """
    report = EmbeddingReport()
    stores = list(stores)
    f2 = embedding_fuel(fuel)
    run1, run2 = (imp_lasso, imp2_lasso) if detect_cycles else (imp_trace, imp2_trace)
    with paused_gc():
        for p in terms:
            for s in stores:
                a = run1(p, s, fuel)
                b = run2(p, s, f2)
                report.checked += 1
                if not consistent(a, b):
                    report.mismatches.append((p, s, a, b))
                elif isinstance(a, Finished) and isinstance(b, Finished):
                    report.agree_finished += 1
                elif isinstance(a, Lasso) and isinstance(b, Lasso):
                    report.agree_diverging += 1
                elif isinstance(a, Cut) and isinstance(b, Cut):
                    report.cut_cut += 1
                else:
                    report.one_cut += 1
    return report
