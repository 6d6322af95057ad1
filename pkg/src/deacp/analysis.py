"""Syntactic analyses: variables, auxiliary variables, substitution, term classes."""

from __future__ import annotations

from itertools import combinations

from .data import free_vars_data
from .terms import (
    EPS,
    Act,
    Alt,
    And,
    Assign,
    BINARY,
    CMerge,
    CVar,
    Delta,
    Encap,
    Eps,
    Eq,
    Eval,
    Exists,
    Flex,
    Forall,
    Geq,
    Guard,
    Hole,
    Imp,
    LMerge,
    LVar,
    Not,
    Op,
    Or,
    Seq,
    is_action,
)


def _flex_data(e) -> set:
    if isinstance(e, Flex):
        return {e.name}
    if isinstance(e, Op):
        out = set()
        for a in e.args:
            out |= _flex_data(a)
        return out
    return set()


def fvar_cond(phi) -> frozenset:
    """Flexible variables occurring in a condition (logical variables excluded)."""
    if isinstance(phi, (Eq, Geq)):
        return frozenset(_flex_data(phi.left) | _flex_data(phi.right))
    if isinstance(phi, Not):
        return fvar_cond(phi.arg)
    if isinstance(phi, (And, Or, Imp)):
        return fvar_cond(phi.left) | fvar_cond(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return fvar_cond(phi.body)
    return frozenset()


def fvar_proc(p) -> frozenset:
    """Flexible variables occurring in a process term."""
    if isinstance(p, Act):
        out = set()
        for a in p.args:
            out |= _flex_data(a)
        return frozenset(out)
    if isinstance(p, Assign):
        return frozenset({p.var} | _flex_data(p.expr))
    if isinstance(p, BINARY):
        return fvar_proc(p.left) | fvar_proc(p.right)
    if isinstance(p, Guard):
        return fvar_cond(p.cond) | fvar_proc(p.body)
    if isinstance(p, (Encap, Eval)):
        return fvar_proc(p.body)
    return frozenset()


def fass(p) -> frozenset:
    """Flexible variables that are the target of some assignment in ``p``."""
    if isinstance(p, Assign):
        return frozenset({p.var})
    if isinstance(p, BINARY):
        return fass(p.left) | fass(p.right)
    if isinstance(p, (Guard, Encap, Eval)):
        return fass(p.body)
    return frozenset()


class NotAuxiliary(ValueError):
    pass


def is_auxiliary(p, A) -> bool:
    """Strict auxiliary-variable test.

    Members of ``A`` may occur only inside assignments whose target is in
    ``A``, and the right-hand sides of those assignments may mention only
    members of ``A``.  Erasing them therefore removes exactly ``A`` from the
    variables of ``p``.
    """
    A = frozenset(A)
    if not A <= fvar_proc(p):
        return False

    def ok(t):
        if isinstance(t, Assign):
            if t.var in A:
                return _flex_data(t.expr) <= A
            return not (_flex_data(t.expr) & A)
        if isinstance(t, Act):
            return not any(_flex_data(a) & A for a in t.args)
        if isinstance(t, BINARY):
            return ok(t.left) and ok(t.right)
        if isinstance(t, Guard):
            return not (fvar_cond(t.cond) & A) and ok(t.body)
        if isinstance(t, (Encap, Eval)):
            return ok(t.body)
        return True

    return ok(p)


def avars(p) -> set:
    """All sets of auxiliary variables of ``p`` (as frozensets)."""
    cand = sorted(fass(p))
    out = set()
    for k in range(len(cand) + 1):
        for A in combinations(cand, k):
            if is_auxiliary(p, A):
                out.add(frozenset(A))
    return out


def erase_aux(p, A):
    """``p`` with every assignment to a member of ``A`` replaced by ``eps``."""
    A = frozenset(A)
    if not is_auxiliary(p, A):
        raise NotAuxiliary(f"{sorted(A)} is not a set of auxiliary variables")
    return _erase(p, A)


def _erase(t, A):
    if isinstance(t, Assign):
        return EPS if t.var in A else t
    if isinstance(t, BINARY):
        return type(t)(_erase(t.left, A), _erase(t.right, A))
    if isinstance(t, Guard):
        return Guard(t.cond, _erase(t.body, A))
    if isinstance(t, Encap):
        return Encap(t.blocked, _erase(t.body, A))
    if isinstance(t, Eval):
        return Eval(t.sigma, _erase(t.body, A))
    return t


# ---------------------------------------------------------------- substitution


def _replace_data(e, f):
    r = f(e)
    if r is not None:
        return r
    if isinstance(e, Op):
        return Op(e.op, tuple(_replace_data(a, f) for a in e.args))
    return e


def _lvars(e) -> set:
    if isinstance(e, LVar):
        return {e.name}
    if isinstance(e, Op):
        out = set()
        for a in e.args:
            out |= _lvars(a)
        return out
    return set()


def _cond_names(phi) -> set:
    if isinstance(phi, (Eq, Geq)):
        return free_vars_data(phi.left) | free_vars_data(phi.right)
    if isinstance(phi, Not):
        return _cond_names(phi.arg)
    if isinstance(phi, (And, Or, Imp)):
        return _cond_names(phi.left) | _cond_names(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return {phi.var} | _cond_names(phi.body)
    return set()


def _map_cond(phi, f, avoid: set):
    """Apply data replacement ``f`` to all atoms, renaming binders found in ``avoid``."""
    if isinstance(phi, (Eq, Geq)):
        return type(phi)(_replace_data(phi.left, f), _replace_data(phi.right, f))
    if isinstance(phi, Not):
        return Not(_map_cond(phi.arg, f, avoid))
    if isinstance(phi, (And, Or, Imp)):
        return type(phi)(_map_cond(phi.left, f, avoid), _map_cond(phi.right, f, avoid))
    if isinstance(phi, (Forall, Exists)):
        var, body = phi.var, phi.body
        if var in avoid:
            used = avoid | _cond_names(body)
            k = 0
            while f"{var}{k}" in used:
                k += 1
            new = f"{var}{k}"
            body = _map_cond(body, lambda e, v=var, n=new: LVar(n) if e == LVar(v) else None, set())
            var = new

        def inner(e, bound=var, g=f):
            if e == LVar(bound):
                return e
            return g(e)

        return type(phi)(var, _map_cond(body, inner, avoid))
    return phi


def subst_flex(phi, v: str, e):
    """``phi[e/v]``: replace the flexible variable ``v`` by ``e`` (capture-avoiding)."""
    target = Flex(v)
    return _map_cond(phi, lambda t: e if t == target else None, _lvars(e))


def subst_cond(phi, bindings: dict):
    """Replace free logical variables by data terms (capture-avoiding)."""
    avoid = set()
    for e in bindings.values():
        avoid |= _lvars(e)
    lookup = {LVar(k): e for k, e in bindings.items()}
    return _map_cond(phi, lambda t: lookup.get(t) if isinstance(t, LVar) else None, avoid)


def logical_vars_cond(phi, bound=frozenset()) -> frozenset:
    """Free logical variables of a condition."""
    if isinstance(phi, (Eq, Geq)):
        return frozenset((_lvars(phi.left) | _lvars(phi.right)) - bound)
    if isinstance(phi, Not):
        return logical_vars_cond(phi.arg, bound)
    if isinstance(phi, (And, Or, Imp)):
        return logical_vars_cond(phi.left, bound) | logical_vars_cond(phi.right, bound)
    if isinstance(phi, (Forall, Exists)):
        return logical_vars_cond(phi.body, bound | {phi.var})
    return frozenset()


# ---------------------------------------------------------------- term classes


def is_hnf(p) -> bool:
    if isinstance(p, Delta):
        return True
    if isinstance(p, Alt):
        return is_hnf(p.left) and is_hnf(p.right)
    if isinstance(p, Guard):
        b = p.body
        return isinstance(b, Eps) or (isinstance(b, Seq) and is_action(b.left))
    return False


def in_hcond(phi) -> bool:
    if isinstance(phi, CVar):
        return False
    if isinstance(phi, Not):
        return in_hcond(phi.arg)
    if isinstance(phi, (And, Or, Imp)):
        return in_hcond(phi.left) and in_hcond(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return in_hcond(phi.body)
    return True


def in_hproc(p) -> bool:
    if isinstance(p, (Eval, LMerge, CMerge, Hole)):
        return False
    if isinstance(p, BINARY):
        return in_hproc(p.left) and in_hproc(p.right)
    if isinstance(p, Guard):
        return in_hcond(p.cond) and in_hproc(p.body)
    if isinstance(p, Encap):
        return in_hproc(p.body)
    return True


def is_closed_cond(phi) -> bool:
    return in_hcond(phi) and not logical_vars_cond(phi)


def cleanup(p):
    """Remove neutral elements bottom-up: ``x + delta``, ``x . eps``, ``eps . x``."""
    if isinstance(p, Alt):
        l, r = cleanup(p.left), cleanup(p.right)
        if isinstance(r, Delta):
            return l
        if isinstance(l, Delta):
            return r
        return Alt(l, r)
    if isinstance(p, Seq):
        l, r = cleanup(p.left), cleanup(p.right)
        if isinstance(r, Eps):
            return l
        if isinstance(l, Eps):
            return r
        return Seq(l, r)
    if isinstance(p, BINARY):
        return type(p)(cleanup(p.left), cleanup(p.right))
    if isinstance(p, Guard):
        return Guard(p.cond, cleanup(p.body))
    if isinstance(p, Encap):
        return Encap(p.blocked, cleanup(p.body))
    if isinstance(p, Eval):
        return Eval(p.sigma, cleanup(p.body))
    return p
