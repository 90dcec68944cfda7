"""Shared vocabulary: sorts, signatures, terms, variable stores, arithmetic.

Terms are immutable trees. An argument slot of an operator is either a sort
(the argument is a subterm) or a literal kind (the argument is an embedded
value such as a variable name, an expression or a store).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class Sort(enum.Enum):
    READER = "r"
    WRITER = "w"

    def __repr__(self):
        return self.value


R = Sort.READER
W = Sort.WRITER

# literal kinds that may occupy an argument slot
VAR = "var"
EXPR = "expr"
STORE = "store"
STATE = "state"
VALUE = "value"
LITERAL_KINDS = frozenset({VAR, EXPR, STORE, STATE, VALUE})


class SortError(Exception):
    def __init__(self, path, expected, found):
        self.path = tuple(path)
        self.expected = expected
        self.found = found
        super().__init__(f"at {list(self.path)}: expected {expected}, found {found}")


class MissingBinding(KeyError):
    pass


class Overflow(ArithmeticError):
    pass


def check_int(n: int) -> int:
    if not INT64_MIN <= n <= INT64_MAX:
        raise Overflow(n)
    return n


@dataclass(frozen=True)
class OpSig:
    name: str
    args: tuple  # Sort or literal kind per slot
    result: Sort

    @property
    def arity(self):
        return len(self.args)


class Signature:
    """A finite family of operators, each with argument slots and a result sort."""

    def __init__(self, operators: Iterable[OpSig]):
        self.operators: dict[str, OpSig] = {}
        for op in operators:
            if op.name in self.operators:
                raise ValueError(f"duplicate operator {op.name!r}")
            for a in op.args:
                if not isinstance(a, Sort) and a not in LITERAL_KINDS:
                    raise ValueError(f"bad argument slot {a!r} for {op.name!r}")
            self.operators[op.name] = op

    def __contains__(self, name):
        return name in self.operators

    def __getitem__(self, name) -> OpSig:
        return self.operators[name]

    def __iter__(self) -> Iterator[OpSig]:
        return iter(self.operators.values())

    @property
    def single_sorted(self):
        return all(
            op.result is R and all(a is R for a in op.args if isinstance(a, Sort))
            for op in self
        )

    @property
    def literal_kinds(self):
        return {a for op in self for a in op.args if not isinstance(a, Sort)}

    def extend(self, operators: Iterable[OpSig]) -> "Signature":
        return Signature([*self, *operators])


class Term:
    """An operator applied to arguments (subterms or literals)."""

    __slots__ = ("op", "args", "_hash")

    def __init__(self, op: str, args: tuple = ()):
        self.op = op
        self.args = args if type(args) is tuple else tuple(args)
        self._hash = None  # computed on first use; most step results are never hashed

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return self.op == other.op and hash(self) == hash(other) and self.args == other.args

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.op, self.args))
        return h

    def __repr__(self):
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(map(repr, self.args))})"

    def __reduce__(self):
        return (Term, (self.op, self.args))

    @property
    def children(self):
        return tuple(a for a in self.args if isinstance(a, (Term, MetaVar)))

    def replace_arg(self, i: int, new) -> "Term":
        args = list(self.args)
        args[i] = new
        return Term(self.op, args)


@dataclass(frozen=True)
class MetaVar:
    """A rule variable x_i (operand) or y_i (operand's continuation)."""

    name: str
    sort: Sort = R

    def __repr__(self):
        return self.name


def term_depth(t) -> int:
    if not isinstance(t, Term):
        return 0
    return 1 + max((term_depth(c) for c in t.children), default=0)


def term_size(t) -> int:
    if not isinstance(t, Term):
        return 0
    return 1 + sum(term_size(c) for c in t.children)


def variables(t) -> set:
    if isinstance(t, MetaVar):
        return {t}
    if isinstance(t, Term):
        out = set()
        for c in t.children:
            out |= variables(c)
        return out
    return set()


def _literal_ok(kind, value) -> bool:
    if kind == VAR:
        return isinstance(value, str)
    if kind == EXPR:
        return isinstance(value, Expr) or _is_foreign_expr(value)
    if kind == STORE:
        return isinstance(value, Mapping) or hasattr(value, "dom")
    if kind == STATE:
        return isinstance(value, (str, VarStore))
    if kind == VALUE:
        return True
    return False


def _is_foreign_expr(value):
    # languages with their own expression trees (Ref2) tag them with this attribute
    return getattr(value, "is_expression", False)


def validate_term(sig: Signature, t, path=(), open_vars: bool = False) -> Sort:
    """Check arity and sorts of ``t`` against ``sig`` and return its sort.

    Raises SortError with the path (argument indices from the root) to the
    first violation. With ``open_vars`` metavariables are accepted as leaves
    of their declared sort.
    """
    if isinstance(t, MetaVar):
        if not open_vars:
            raise SortError(path, "closed term", f"variable {t.name}")
        return t.sort
    if not isinstance(t, Term):
        raise SortError(path, "term", type(t).__name__)
    if t.op not in sig:
        raise SortError(path, "known operator", t.op)
    opsig = sig[t.op]
    if len(t.args) != opsig.arity:
        raise SortError(path, f"arity {opsig.arity}", len(t.args))
    for i, (slot, arg) in enumerate(zip(opsig.args, t.args)):
        here = (*path, i)
        if isinstance(slot, Sort):
            if not isinstance(arg, (Term, MetaVar)):
                raise SortError(here, slot, f"literal {arg!r}")
            got = validate_term(sig, arg, here, open_vars)
            if got is not slot:
                raise SortError(here, slot, got)
        elif isinstance(arg, (Term, MetaVar)) or not _literal_ok(slot, arg):
            raise SortError(here, f"{slot} literal", arg)
    return opsig.result


def substitute(t, assignment: Mapping):
    """Simultaneous replacement of metavariables; there are no binders."""
    if isinstance(t, MetaVar):
        try:
            return assignment[t] if t in assignment else assignment[t.name]
        except KeyError:
            raise MissingBinding(t.name) from None
    if isinstance(t, Term):
        if not any(isinstance(a, (Term, MetaVar)) for a in t.args):
            return t
        return Term(t.op, tuple(substitute(a, assignment) if isinstance(a, (Term, MetaVar)) else a
                                for a in t.args))
    return t


# ---------------------------------------------------------------------------
# variable stores


class VarStore(Mapping):
    """A total store A -> Z with finite support.

    Unbound variables read as 0. Bindings to 0 are dropped on construction so
    that equal stores have equal representations.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, bindings: Mapping[str, int] | Iterable = ()):
        items = dict(bindings)
        for k, v in items.items():
            if not isinstance(k, str):
                raise TypeError(f"variable names are strings, got {k!r}")
            check_int(v)
        self._items = tuple(sorted((k, int(v)) for k, v in items.items() if v != 0))
        self._hash = hash(self._items)

    def __getitem__(self, x):
        for k, v in self._items:
            if k == x:
                return v
        return 0

    def __contains__(self, x):
        return isinstance(x, str)

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, VarStore):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == VarStore(other)
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ",".join(f"{k}={v}" for k, v in self._items) + "}"

    def __reduce__(self):
        return (VarStore, (dict(self._items),))

    def set(self, x: str, n: int) -> "VarStore":
        if not INT64_MIN <= n <= INT64_MAX:
            raise Overflow(n)
        items = self._items
        i = 0
        while i < len(items) and items[i][0] < x:
            i += 1
        rest = items[i + 1:] if i < len(items) and items[i][0] == x else items[i:]
        items = items[:i] + ((x, int(n)),) + rest if n != 0 else items[:i] + rest
        new = VarStore.__new__(VarStore)
        new._items = items
        new._hash = hash(items)
        return new

    def as_dict(self):
        return dict(self._items)


# ---------------------------------------------------------------------------
# arithmetic expressions


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    n: int

    def __repr__(self):
        return str(self.n)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - *
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in ARITH:
            raise ValueError(f"unknown operator {self.op!r}")

    def __repr__(self):
        return f"({self.left!r}{self.op}{self.right!r})"


ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def expr_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def expr_depth(e: Expr) -> int:
    if isinstance(e, BinOp):
        return 1 + max(expr_depth(e.left), expr_depth(e.right))
    return 1


def as_expr(x: Any) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(x, int):
        return Num(x)
    if isinstance(x, str):
        return Var(x)
    raise TypeError(f"cannot read {x!r} as an expression")
