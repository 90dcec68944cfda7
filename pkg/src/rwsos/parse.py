"""Concrete syntax for Imp, Imp² and Ref².

Imp:   skip | x := e | while e { p } | p ; q | ( p )
       with expressions over + - *, integers and identifiers.
Imp²:  adds writers [p]@{x=1,y=2}, {x=1}.c, ret@{x=1} and c ; q.
Ref²:  skip | while e { p } | e := p | if e { p } else { q } | p ; q | &p
       | expr e | proc { p }, expressions !e, e (+) e, e (-) e, #n, integers.
       ``e := e2`` with a bare expression on the right means ``e := expr e2``.
Sequencing associates to the right and binds loosest.
"""

from __future__ import annotations

import re

from . import imp as I
from . import imp2 as I2
from . import ref2 as F
from .syntax import BinOp, Num, Var, VarStore

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>\(\+\)|\(-\)|:=|[;{}()\[\]@.,&!#=+*-])
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

KEYWORDS = {"skip", "while", "if", "else", "expr", "proc", "ret"}


class ParseError(ValueError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        where = f"end of input" if not found else repr(found)
        super().__init__(f"line {line}, column {col}: expected {expected}, found {where}")


def tokenize(text: str):
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        else:
            toks.append((kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, value=None, kind=None, ahead=0):
        k, v, *_ = self.toks[min(self.i + ahead, len(self.toks) - 1)]
        return (value is None or v == value) and (kind is None or k == kind)

    def fail(self, expected):
        k, v, line, col = self.tok
        raise ParseError(line, col, expected, v)

    def eat(self, value=None, kind=None, expected=None):
        if not self.peek(value, kind):
            self.fail(expected or repr(value) if value else expected or kind)
        t = self.tok
        self.i += 1
        return t[1]

    def accept(self, value):
        if self.peek(value):
            self.i += 1
            return True
        return False

    def done(self, result):
        if not self.peek(kind="eof"):
            self.fail("end of input")
        return result

    def integer(self):
        neg = self.accept("-")
        n = int(self.eat(kind="int", expected="an integer"))
        return -n if neg else n

    # --- Imp -------------------------------------------------------------

    def imp_expr(self):
        e = self.imp_term()
        while self.peek("+") or self.peek("-"):
            op = self.eat()
            e = BinOp(op, e, self.imp_term())
        return e

    def imp_term(self):
        e = self.imp_atom()
        while self.peek("*"):
            self.eat()
            e = BinOp("*", e, self.imp_atom())
        return e

    def imp_atom(self):
        if self.peek(kind="int") or (self.peek("-") and self.peek(kind="int", ahead=1)):
            return Num(self.integer())
        if self.peek(kind="name") and self.tok[1] not in KEYWORDS:
            return Var(self.eat())
        if self.accept("("):
            e = self.imp_expr()
            self.eat(")")
            return e
        self.fail("an expression")

    def imp_prog(self, writers=False):
        p = self.imp_stmt(writers)
        if self.accept(";"):
            q = self.imp_prog(False)
            return I2.wseq(p, q) if I2.is_writer(p) else I.seq(p, q)
        return p

    def imp_stmt(self, writers=False):
        if self.accept("skip"):
            return I.SKIP
        if self.accept("while"):
            e = self.imp_expr()
            self.eat("{")
            body = self.imp_prog()
            self.eat("}")
            return I.while_(e, body)
        if self.accept("("):
            p = self.imp_prog(writers)
            self.eat(")")
            return p
        if writers:
            if self.accept("["):
                p = self.imp_prog()
                self.eat("]")
                self.eat("@")
                return I2.run(p, self.var_store())
            if self.peek("{"):
                s = self.var_store()
                self.eat(".")
                return I2.out(s, self.imp_stmt(True))
            if self.accept("ret"):
                self.eat("@")
                return I2.ret(self.var_store())
        if self.peek(kind="name") and self.tok[1] not in KEYWORDS:
            x = self.eat()
            self.eat(":=")
            return I.assign(x, self.imp_expr())
        self.fail("a statement")

    def var_store(self):
        self.eat("{")
        b = {}
        while not self.peek("}"):
            x = self.eat(kind="name", expected="a variable")
            self.eat("=")
            b[x] = self.integer()
            if not self.accept(","):
                break
        self.eat("}")
        return VarStore(b)

    # --- Ref² -------------------------------------------------------------

    def ref_expr(self):
        e = self.ref_atom()
        while self.peek("(+)") or self.peek("(-)"):
            op = self.eat().strip("()")
            e = F.RBin(op, e, self.ref_atom())
        return e

    def ref_atom(self):
        if self.peek(kind="int") or (self.peek("-") and self.peek(kind="int", ahead=1)):
            return self.integer()
        if self.accept("#"):
            return F.Loc(int(self.eat(kind="int", expected="a location number")))
        if self.accept("!"):
            return F.Deref(self.ref_atom())
        if self.accept("("):
            e = self.ref_expr()
            self.eat(")")
            return e
        self.fail("an expression")

    def ref_prog(self):
        p = self.ref_stmt()
        if self.accept(";"):
            return F.seq(p, self.ref_prog())
        return p

    def ref_block(self):
        self.eat("{")
        p = self.ref_prog()
        self.eat("}")
        return p

    def ref_stmt(self):
        if self.accept("skip"):
            return F.SKIP
        if self.accept("while"):
            e = self.ref_expr()
            return F.while_(e, self.ref_block())
        if self.accept("if"):
            e = self.ref_expr()
            p = self.ref_block()
            self.eat("else")
            return F.if_(e, p, self.ref_block())
        if self.accept("&"):
            return F.alloc(self.ref_stmt())
        if self.accept("expr"):
            return F.expr(self.ref_expr())
        if self.accept("proc"):
            return F.proc(self.ref_block())
        if self.peek("("):
            # a parenthesised program, or the left-hand side of an assignment
            save = self.i
            try:
                self.eat("(")
                p = self.ref_prog()
                self.eat(")")
                if not self.peek(":="):
                    return p
            except ParseError:
                pass
            self.i = save
        lhs = self.ref_expr()
        self.eat(":=", expected="':='")
        return F.assign(lhs, self.ref_rhs())

    def ref_rhs(self):
        if self.peek(kind="name") or self.peek("&"):
            return self.ref_stmt()
        if self.peek("("):
            save = self.i
            try:
                return self.ref_stmt()
            except ParseError:
                self.i = save
        return F.expr(self.ref_expr())


def parse_program(language: str, text: str):
    """Parse a program of ``language`` ('imp', 'imp2' or 'ref2')."""
    p = _Parser(text)
    if language == "imp":
        return p.done(p.imp_prog())
    if language == "imp2":
        return p.done(p.imp_prog(writers=True))
    if language == "ref2":
        return p.done(p.ref_prog())
    raise ValueError(f"unknown language {language!r}")


def parse_imp_expr(text: str):
    p = _Parser(text)
    return p.done(p.imp_expr())


def parse_ref_expr(text: str):
    p = _Parser(text)
    return p.done(p.ref_expr())


def parse_var_store(text: str) -> VarStore:
    p = _Parser(text)
    return p.done(p.var_store())


def show_imp(t) -> str:
    """Concrete Imp/Imp² syntax that parses back to the same term."""
    op, a = t.op, t.args
    if op == "skip":
        return "skip"
    if op == "assign":
        return f"{a[0]} := {_show_iexpr(a[1])}"
    if op == "while":
        return f"while {_show_iexpr(a[0])} {{ {show_imp(a[1])} }}"
    if op in ("seq", "wseq"):
        left = show_imp(a[0])
        if a[0].op in ("seq", "wseq"):
            left = f"({left})"
        return f"{left} ; {show_imp(a[1])}"
    if op == "run":
        return f"[{show_imp(a[0])}]@{_show_vs(a[1])}"
    if op == "out":
        inner = show_imp(a[1])
        if a[1].op in ("wseq",):
            inner = f"({inner})"
        return f"{_show_vs(a[0])}.{inner}"
    if op == "ret":
        return f"ret@{_show_vs(a[0])}"
    raise ValueError(f"not an Imp² term: {t!r}")


def _show_vs(s: VarStore) -> str:
    return "{" + ",".join(f"{k}={v}" for k, v in s.as_dict().items()) + "}"


def _show_iexpr(e) -> str:
    if isinstance(e, BinOp):
        return f"({_show_iexpr(e.left)} {e.op} {_show_iexpr(e.right)})"
    return repr(e)
