"""Abstract syntax for the three sorts: data, conditions and processes.

All nodes are immutable and hashable, so terms can be shared freely and used
as dictionary keys (state identities in LTS exploration, memo tables).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


# ---------------------------------------------------------------- data terms


@dataclass(frozen=True)
class Num:
    """A canonical numeral denoting a carrier element."""

    value: int


@dataclass(frozen=True)
class Flex:
    """A flexible (program) variable constant."""

    name: str


@dataclass(frozen=True)
class LVar:
    """A logical variable of sort Data."""

    name: str


@dataclass(frozen=True)
class Op:
    """An operator of the data signature applied to arguments.

    Operators: ``+`` and ``-`` (binary), ``neg`` (unary minus).
    """

    op: str
    args: tuple


DataTerm = Union[Num, Flex, LVar, Op]


# ----------------------------------------------------------- condition terms


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Eq:
    left: DataTerm
    right: DataTerm


@dataclass(frozen=True)
class Geq:
    left: DataTerm
    right: DataTerm


@dataclass(frozen=True)
class Not:
    arg: "CondTerm"


@dataclass(frozen=True)
class And:
    left: "CondTerm"
    right: "CondTerm"


@dataclass(frozen=True)
class Or:
    left: "CondTerm"
    right: "CondTerm"


@dataclass(frozen=True)
class Imp:
    left: "CondTerm"
    right: "CondTerm"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "CondTerm"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "CondTerm"


@dataclass(frozen=True)
class CVar:
    """A variable of sort Cond (only legal outside asserted processes)."""

    name: str


CondTerm = Union[Top, Bot, Eq, Geq, Not, And, Or, Imp, Forall, Exists, CVar]

TOP = Top()
BOT = Bot()


def conj(*conds):
    """Left-nested conjunction; the empty conjunction is ``TOP``."""
    if not conds:
        return TOP
    out = conds[0]
    for c in conds[1:]:
        out = And(out, c)
    return out


def disj(*conds):
    """Left-nested disjunction (the finite disjunction of a set); empty is ``BOT``."""
    if not conds:
        return BOT
    out = conds[0]
    for c in conds[1:]:
        out = Or(out, c)
    return out


def iff(a, b):
    return And(Imp(a, b), Imp(b, a))


# ------------------------------------------------------------- process terms


@dataclass(frozen=True)
class Delta:
    pass


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Act:
    """Basic action (``args == ()``) or data-parameterized action."""

    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Assign:
    var: str
    expr: DataTerm


@dataclass(frozen=True)
class Alt:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class Seq:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class Iter:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class Par:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class LMerge:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class CMerge:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class Encap:
    blocked: frozenset
    body: "ProcTerm"


@dataclass(frozen=True)
class Guard:
    cond: CondTerm
    body: "ProcTerm"


@dataclass(frozen=True)
class Eval:
    sigma: "EvaluationMap"
    body: "ProcTerm"


@dataclass(frozen=True)
class Hole:
    """The placeholder of a context."""


ProcTerm = Union[
    Delta, Eps, Act, Assign, Alt, Seq, Iter, Par, LMerge, CMerge, Encap, Guard, Eval, Hole
]

DELTA = Delta()
EPS = Eps()
HOLE = Hole()

BINARY = (Alt, Seq, Iter, Par, LMerge, CMerge)
ACTIONS = (Act, Assign)


def is_action(t) -> bool:
    return isinstance(t, (Act, Assign))


def alt(*terms):
    """Right-nested alternative composition; the empty sum is ``DELTA``."""
    if not terms:
        return DELTA
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Alt(t, out)
    return out


def seq(*terms):
    """Right-nested sequential composition; the empty product is ``EPS``."""
    if not terms:
        return EPS
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Seq(t, out)
    return out


def summands(t) -> list:
    """Flatten top-level alternative composition."""
    out = []
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Alt):
            stack.append(u.right)
            stack.append(u.left)
        else:
            out.append(u)
    return out


# ------------------------------------------------------------ evaluation maps


@dataclass(frozen=True)
class EvaluationMap:
    """Total map from flexible variables to closed data terms or themselves.

    Only the variables bound to values are stored; every other variable maps
    to itself.  ``items`` is kept sorted so that equal maps compare equal.
    """

    items: tuple = ()
    name: str | None = field(default=None, compare=False)

    @classmethod
    def of(cls, mapping=None, name=None, **kw):
        d = dict(mapping or {})
        d.update(kw)
        items = []
        for v, e in d.items():
            if isinstance(e, int):
                e = Num(e)
            if e == Flex(v):
                continue
            if isinstance(e, Flex):
                raise ValueError(f"evaluation map cannot send {v} to another variable {e.name}")
            items.append((v, e))
        return cls(tuple(sorted(items, key=lambda kv: kv[0])), name)

    def __call__(self, v: str):
        for k, e in self.items:
            if k == v:
                return e
        return Flex(v)

    def as_dict(self) -> dict:
        return dict(self.items)

    def domain(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def __iter__(self) -> Iterator:
        return iter(self.items)


# ------------------------------------------------------------ generic access


def children(t) -> tuple:
    """Immediate subterms in positional order (used by traces)."""
    if isinstance(t, BINARY) or isinstance(t, (And, Or, Imp, Eq, Geq)):
        return (t.left, t.right)
    if isinstance(t, (Guard,)):
        return (t.cond, t.body)
    if isinstance(t, (Encap, Eval)):
        return (t.body,)
    if isinstance(t, Not):
        return (t.arg,)
    if isinstance(t, (Forall, Exists)):
        return (t.body,)
    if isinstance(t, (Act, Op)):
        return tuple(t.args)
    if isinstance(t, Assign):
        return (t.expr,)
    return ()


def with_child(t, i: int, c):
    """Return ``t`` with its ``i``-th child replaced by ``c``."""
    if isinstance(t, BINARY) or isinstance(t, (And, Or, Imp, Eq, Geq)):
        return type(t)(c, t.right) if i == 0 else type(t)(t.left, c)
    if isinstance(t, Guard):
        return Guard(c, t.body) if i == 0 else Guard(t.cond, c)
    if isinstance(t, Encap):
        return Encap(t.blocked, c)
    if isinstance(t, Eval):
        return Eval(t.sigma, c)
    if isinstance(t, Not):
        return Not(c)
    if isinstance(t, Forall):
        return Forall(t.var, c)
    if isinstance(t, Exists):
        return Exists(t.var, c)
    if isinstance(t, Act):
        args = list(t.args)
        args[i] = c
        return Act(t.name, tuple(args))
    if isinstance(t, Op):
        args = list(t.args)
        args[i] = c
        return Op(t.op, tuple(args))
    if isinstance(t, Assign):
        return Assign(t.var, c)
    raise IndexError(f"{type(t).__name__} has no child {i}")


def subterm(t, pos: tuple):
    for i in pos:
        t = children(t)[i]
    return t


def replace_at(t, pos: tuple, new):
    if not pos:
        return new
    i = pos[0]
    return with_child(t, i, replace_at(children(t)[i], pos[1:], new))


def size(t) -> int:
    return 1 + sum(size(c) for c in children(t))
