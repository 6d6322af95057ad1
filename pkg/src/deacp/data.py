"""Data signature, data algebras and the condition oracle.

Two algebras are provided:

* :class:`FiniteBackend` -- the integers modulo ``n`` (carrier ``0..n-1``);
  every query is decided by enumerating assignments, quantifiers included.
* :class:`IntegerBackend` -- the group of integers with ``>=``; quantifier-free
  linear queries are decided by :mod:`deacp.lia`, everything else is
  ``unknown``.

Conditions and data terms may mention flexible variables and logical data
variables; for oracle queries both are treated as free variables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from . import lia
from .terms import (
    BOT,
    TOP,
    And,
    Bot,
    CVar,
    Eq,
    EvaluationMap,
    Exists,
    Flex,
    Forall,
    Geq,
    Imp,
    LVar,
    Not,
    Num,
    Op,
    Or,
    Top,
    iff,
)


class SignatureError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """The data signature: numerals plus the listed operators and predicates."""

    sorts: tuple = ("Data", "Cond", "Proc")
    operators: tuple = (("+", 2), ("-", 2), ("neg", 1))
    predicates: tuple = ("==", ">=")

    def arity(self, op: str) -> int:
        for name, n in self.operators:
            if name == op:
                return n
        raise SignatureError(f"unknown data operator {op!r}")

    def check(self, e) -> None:
        if isinstance(e, Op):
            if self.arity(e.op) != len(e.args):
                raise SignatureError(f"operator {e.op!r} expects {self.arity(e.op)} arguments")
            for a in e.args:
                self.check(a)
        elif not isinstance(e, (Num, Flex, LVar)):
            raise SignatureError(f"not a data term: {e!r}")


SIGNATURE = Signature()


VALID, INVALID, UNKNOWN = "valid", "invalid", "unknown"


@dataclass(frozen=True)
class Verdict:
    """Outcome of an oracle query.

    For validity queries ``invalid`` carries a falsifying assignment.  For
    :meth:`Backend.satisfiable`, ``valid`` means satisfiable and carries a model.
    """

    status: str
    witness: dict | None = field(default=None, compare=False)

    @property
    def valid(self) -> bool:
        return self.status == VALID

    @property
    def invalid(self) -> bool:
        return self.status == INVALID

    @property
    def unknown(self) -> bool:
        return self.status == UNKNOWN


def free_vars_data(e) -> set:
    if isinstance(e, (Flex, LVar)):
        return {e.name}
    if isinstance(e, Op):
        out = set()
        for a in e.args:
            out |= free_vars_data(a)
        return out
    return set()


def free_vars_cond(phi, bound=frozenset()) -> set:
    """Names of free flexible and logical variables of a condition."""
    if isinstance(phi, (Eq, Geq)):
        return (free_vars_data(phi.left) | free_vars_data(phi.right)) - bound
    if isinstance(phi, Not):
        return free_vars_cond(phi.arg, bound)
    if isinstance(phi, (And, Or, Imp)):
        return free_vars_cond(phi.left, bound) | free_vars_cond(phi.right, bound)
    if isinstance(phi, (Forall, Exists)):
        return free_vars_cond(phi.body, bound | {phi.var})
    return set()


def is_closed_data(e) -> bool:
    return not free_vars_data(e)


class Backend:
    """A minimal algebra of the data signature plus its decision procedure."""

    name = "abstract"
    signature = SIGNATURE

    # --- interpretation -------------------------------------------------

    def canon(self, n: int) -> int:
        return n

    def apply(self, op: str, args: list) -> int:
        if op == "+":
            return self.canon(args[0] + args[1])
        if op == "-":
            return self.canon(args[0] - args[1])
        if op == "neg":
            return self.canon(-args[0])
        raise SignatureError(f"unknown data operator {op!r}")

    def geq(self, a: int, b: int) -> bool:
        return a >= b

    def value(self, e, env: dict | None = None) -> int:
        """Value of a data term under an assignment of its variables."""
        if isinstance(e, Num):
            return self.canon(e.value)
        if isinstance(e, (Flex, LVar)):
            if env is None or e.name not in env:
                raise EvaluationError(f"variable {e.name} has no value")
            return env[e.name]
        if isinstance(e, Op):
            return self.apply(e.op, [self.value(a, env) for a in e.args])
        raise SignatureError(f"not a data term: {e!r}")

    def holds(self, phi, env: dict) -> bool:
        """Truth of a condition under a total assignment of its free variables."""
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bot):
            return False
        if isinstance(phi, Eq):
            return self.value(phi.left, env) == self.value(phi.right, env)
        if isinstance(phi, Geq):
            return self.geq(self.value(phi.left, env), self.value(phi.right, env))
        if isinstance(phi, Not):
            return not self.holds(phi.arg, env)
        if isinstance(phi, And):
            return self.holds(phi.left, env) and self.holds(phi.right, env)
        if isinstance(phi, Or):
            return self.holds(phi.left, env) or self.holds(phi.right, env)
        if isinstance(phi, Imp):
            return (not self.holds(phi.left, env)) or self.holds(phi.right, env)
        if isinstance(phi, (Forall, Exists)):
            vals = (self.holds(phi.body, {**env, phi.var: d}) for d in self.carrier())
            return all(vals) if isinstance(phi, Forall) else any(vals)
        if isinstance(phi, CVar):
            raise EvaluationError(f"condition variable {phi.name} has no value")
        raise SignatureError(f"not a condition: {phi!r}")

    def carrier(self):
        raise EvaluationError(f"{self.name} backend has no enumerable carrier")

    # --- oracle ---------------------------------------------------------

    def satisfiable(self, phi) -> Verdict:
        raise NotImplementedError

    def valid(self, phi) -> Verdict:
        """Validity of ``phi``; ``invalid`` carries a falsifying assignment."""
        v = self.satisfiable(Not(phi))
        if v.valid:
            return Verdict(INVALID, v.witness)
        if v.invalid:
            return Verdict(VALID)
        return Verdict(UNKNOWN)

    def models_iff(self, phi, psi) -> Verdict:
        if phi == psi:
            return Verdict(VALID)
        if isinstance(psi, Top):
            return self.valid(phi)
        if isinstance(phi, Top):
            return self.valid(psi)
        return self.valid(iff(phi, psi))

    def models_eq(self, e1, e2) -> Verdict:
        if e1 == e2:
            return Verdict(VALID)
        return self.valid(Eq(e1, e2))


@dataclass(frozen=True, eq=True)
class FiniteBackend(Backend):
    """Integers modulo ``size``; ``>=`` compares the representatives ``0..size-1``."""

    size: int = 2

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("finite carrier must be non-empty")

    @property
    def name(self):
        return f"finite {self.size}"

    def canon(self, n: int) -> int:
        return n % self.size

    def carrier(self):
        return range(self.size)

    def satisfiable(self, phi) -> Verdict:
        return _finite_sat(self, phi)


@lru_cache(maxsize=200000)
def _finite_sat(backend, phi) -> Verdict:
    names = sorted(free_vars_cond(phi))
    for vals in itertools.product(range(backend.size), repeat=len(names)):
        env = dict(zip(names, vals))
        if backend.holds(phi, env):
            return Verdict(VALID, env)
    return Verdict(INVALID)


@dataclass(frozen=True, eq=True)
class IntegerBackend(Backend):
    """The integers; decisions restricted to quantifier-free linear conditions."""

    @property
    def name(self):
        return "integers"

    def satisfiable(self, phi) -> Verdict:
        return _int_sat(self, phi)


@lru_cache(maxsize=200000)
def _int_sat(backend, phi) -> Verdict:
    names = free_vars_cond(phi)
    if not names:
        try:
            return Verdict(VALID, {}) if backend.holds(phi, {}) else Verdict(INVALID)
        except EvaluationError:
            return Verdict(UNKNOWN)
    status, model = lia.check_sat(phi)
    if status == lia.SAT:
        model = {v: model.get(v, 0) for v in sorted(names)}
        return Verdict(VALID, model)
    if status == lia.UNSAT:
        return Verdict(INVALID)
    return Verdict(UNKNOWN)


def make_backend(spec: str) -> Backend:
    """Build a backend from its config spelling: ``integers`` or ``finite N``."""
    words = spec.split()
    if words == ["integers"]:
        return IntegerBackend()
    if len(words) == 2 and words[0] == "finite":
        return FiniteBackend(int(words[1]))
    raise ValueError(f"unknown backend {spec!r}")


# ---------------------------------------------------------- evaluation maps


def update(sigma: EvaluationMap, v: str, e) -> EvaluationMap:
    """``sigma[e/v]``; ``e`` must be a closed data term."""
    if isinstance(e, int):
        e = Num(e)
    if not is_closed_data(e):
        raise EvaluationError(f"cannot bind {v} to the open term {e!r}")
    d = sigma.as_dict()
    d[v] = e
    return EvaluationMap.of(d)


def is_v_evaluation(sigma: EvaluationMap, V) -> bool:
    """True iff exactly the variables in ``V`` are sent to values."""
    return sigma.domain() == frozenset(V)


def fold_data(backend: Backend, e):
    """Constant-fold closed subterms of ``e`` to canonical numerals."""
    if isinstance(e, Num):
        c = backend.canon(e.value)
        return e if c == e.value else Num(c)
    if isinstance(e, Op):
        args = tuple(fold_data(backend, a) for a in e.args)
        if all(isinstance(a, Num) for a in args):
            return Num(backend.apply(e.op, [a.value for a in args]))
        return Op(e.op, args)
    return e


def subst_data(e, sigma: EvaluationMap):
    """Homomorphic replacement of flexible variables (no folding)."""
    if isinstance(e, Flex):
        return sigma(e.name)
    if isinstance(e, Op):
        return Op(e.op, tuple(subst_data(a, sigma) for a in e.args))
    return e


def eval_data(sigma: EvaluationMap, e, backend: Backend):
    """``sigma(e)``: substitute flexible variables, then constant-fold."""
    backend.signature.check(e)
    return fold_data(backend, subst_data(e, sigma))


def subst_cond_sigma(phi, sigma: EvaluationMap):
    if isinstance(phi, (Eq, Geq)):
        return type(phi)(subst_data(phi.left, sigma), subst_data(phi.right, sigma))
    if isinstance(phi, Not):
        return Not(subst_cond_sigma(phi.arg, sigma))
    if isinstance(phi, (And, Or, Imp)):
        return type(phi)(subst_cond_sigma(phi.left, sigma), subst_cond_sigma(phi.right, sigma))
    if isinstance(phi, (Forall, Exists)):
        return type(phi)(phi.var, subst_cond_sigma(phi.body, sigma))
    return phi


def fold_cond(backend: Backend, phi):
    """Fold closed atoms to TOP/BOT and connectives whose arguments are constants."""
    if isinstance(phi, (Eq, Geq)):
        l, r = fold_data(backend, phi.left), fold_data(backend, phi.right)
        if isinstance(l, Num) and isinstance(r, Num):
            ok = l.value == r.value if isinstance(phi, Eq) else backend.geq(l.value, r.value)
            return TOP if ok else BOT
        return type(phi)(l, r)
    if isinstance(phi, Not):
        a = fold_cond(backend, phi.arg)
        if isinstance(a, Top):
            return BOT
        if isinstance(a, Bot):
            return TOP
        return Not(a)
    if isinstance(phi, (And, Or, Imp)):
        a, b = fold_cond(backend, phi.left), fold_cond(backend, phi.right)
        if isinstance(a, (Top, Bot)) and isinstance(b, (Top, Bot)):
            x, y = isinstance(a, Top), isinstance(b, Top)
            if isinstance(phi, And):
                r = x and y
            elif isinstance(phi, Or):
                r = x or y
            else:
                r = (not x) or y
            return TOP if r else BOT
        return type(phi)(a, b)
    if isinstance(phi, (Forall, Exists)):
        body = fold_cond(backend, phi.body)
        if isinstance(body, (Top, Bot)):
            return body
        return type(phi)(phi.var, body)
    return phi


def eval_cond(sigma: EvaluationMap, phi, backend: Backend):
    """``sigma(phi)`` with closed subformulas simplified to TOP/BOT."""
    return fold_cond(backend, subst_cond_sigma(phi, sigma))


def satisfiable(backend: Backend, phi) -> Verdict:
    return backend.satisfiable(phi)


def models_iff(backend: Backend, phi, psi) -> Verdict:
    return backend.models_iff(phi, psi)


def models_eq(backend: Backend, e1, e2) -> Verdict:
    return backend.models_eq(e1, e2)
