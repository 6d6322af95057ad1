"""Random terms for property tests.

Every generator takes a ``random.Random`` so runs are reproducible from a
seed.  Terms use the actions ``a``, ``b``, ``c`` (``a | b = c``) and the flexible
variables in ``VARS``; see :func:`sample_env`.
"""

from __future__ import annotations

import random

from .env import finite_env
from .terms import (
    BOT,
    DELTA,
    EPS,
    TOP,
    Act,
    Alt,
    And,
    Assign,
    CMerge,
    Encap,
    Eq,
    Eval,
    EvaluationMap,
    Flex,
    Geq,
    Guard,
    Iter,
    LMerge,
    Not,
    Num,
    Op,
    Or,
    Par,
    Seq,
)

ACTIONS = ("a", "b", "c")
VARS = ("i", "j")


def sample_env(size=2):
    """Finite backend of the given carrier size with ``a | b = c``."""
    return finite_env(size, ACTIONS, {("a", "b"): "c"})


def gen_data(rng: random.Random, size=2, vars=VARS, depth=1):
    r = rng.random()
    if depth <= 0 or r < 0.6:
        if vars and rng.random() < 0.6:
            return Flex(rng.choice(vars))
        return Num(rng.randrange(size))
    return Op(rng.choice("+-"), (gen_data(rng, size, vars, depth - 1), gen_data(rng, size, vars, depth - 1)))


def gen_cond(rng: random.Random, size=2, vars=VARS, depth=1):
    r = rng.random()
    if depth <= 0 or r < 0.5:
        k = rng.random()
        if k < 0.1:
            return TOP
        if k < 0.15:
            return BOT
        left, right = gen_data(rng, size, vars, 0), gen_data(rng, size, vars, 0)
        return Eq(left, right) if k < 0.8 else Geq(left, right)
    k = rng.random()
    if k < 0.2:
        return Not(gen_cond(rng, size, vars, depth - 1))
    op = And if k < 0.6 else Or
    return op(gen_cond(rng, size, vars, depth - 1), gen_cond(rng, size, vars, depth - 1))


def gen_action(rng: random.Random, size=2, vars=VARS, assign=True, params=True):
    k = rng.random()
    if assign and vars and k < 0.3:
        return Assign(rng.choice(vars), gen_data(rng, size, vars, 1))
    if params and k < 0.45:
        return Act(rng.choice(ACTIONS), (gen_data(rng, size, vars, 0),))
    return Act(rng.choice(ACTIONS))


SEQUENTIAL = ("alt", "seq", "iter", "guard")
ALL_OPS = SEQUENTIAL + ("par", "lmerge", "cmerge", "encap")


def gen_term(rng: random.Random, depth=3, size=2, vars=VARS, ops=ALL_OPS, assign=True,
             params=True, consts=True):
    """A random process term of at most the given depth (no evaluation operator)."""
    if depth <= 0 or rng.random() < 0.25:
        if consts:
            k = rng.random()
            if k < 0.08:
                return DELTA
            if k < 0.16:
                return EPS
        return gen_action(rng, size, vars, assign, params)
    op = rng.choice(ops)

    def sub():
        return gen_term(rng, depth - 1, size, vars, ops, assign, params, consts)

    if op == "guard":
        return Guard(gen_cond(rng, size, vars, 1), sub())
    if op == "encap":
        return Encap(frozenset(rng.sample(ACTIONS, rng.randint(1, 2))), sub())
    cls = {"alt": Alt, "seq": Seq, "iter": Iter, "par": Par, "lmerge": LMerge, "cmerge": CMerge}[op]
    return cls(sub(), sub())


def gen_prefixed(rng: random.Random, depth=2, size=2, vars=VARS, ops=SEQUENTIAL, assign=True):
    """A term that cannot terminate without doing an action first."""
    a = gen_action(rng, size, vars, assign)
    if depth <= 0 or rng.random() < 0.3:
        return a
    return Seq(a, gen_term(rng, depth - 1, size, vars, ops, assign))


def gen_sigma(rng: random.Random, size=2, vars=VARS):
    """A total evaluation map on ``vars``."""
    return EvaluationMap.of({v: Num(rng.randrange(size)) for v in vars})


def gen_eval(rng: random.Random, depth=2, size=2, vars=VARS, ops=SEQUENTIAL):
    return Eval(gen_sigma(rng, size, vars), gen_term(rng, depth, size, vars, ops))


def gen_triple(rng: random.Random, size=2, vars=VARS, depth=2):
    """A random sequential asserted process ``(pre, proc, post)``.

    About half of the time the precondition is replaced by the weakest
    precondition of the postcondition, so that a good share is provable.
    """
    from .data import fold_cond
    from .hoare import ProofSearchFailed, _wp

    proc = gen_term(rng, depth, size, vars, SEQUENTIAL, params=False)
    post = gen_cond(rng, size, vars, 1)
    pre = gen_cond(rng, size, vars, 1)
    if rng.random() < 0.5:
        try:
            pre = fold_cond(finite_env(size).backend, _wp(proc, post, {}))
        except ProofSearchFailed:
            pass
    return pre, proc, post


# ---------------------------------------------------------------- axiom instances


def _inst(pat, th):
    import dataclasses

    from .axioms import M

    if isinstance(pat, M):
        return th[pat.name]
    if dataclasses.is_dataclass(pat) and not isinstance(pat, type):
        vals = {f.name: _inst(getattr(pat, f.name), th) for f in dataclasses.fields(pat) if f.compare}
        return type(pat)(**vals)
    if isinstance(pat, tuple):
        return tuple(_inst(x, th) for x in pat)
    return pat


def _const(rng, exclude=()):
    names = [a for a in ACTIONS if a not in exclude]
    if rng.random() < 0.15:
        return DELTA
    return Act(rng.choice(names))


def _pact(rng, size, name=None):
    return Act(name or rng.choice(ACTIONS), (gen_data(rng, size, VARS, 1),))


def axiom_instance(axiom, rng: random.Random, env, depth=2):
    """A closed instance ``(lhs, rhs)`` of an axiom, drawn at random.

    Subterms have depth at most ``depth``, so the instance has depth about
    ``depth + 1``.  Side conditions are met by construction.  For RSP* the
    pair is the conclusion, for a ``z`` built to satisfy the premise.
    """
    from .axioms import SCHEMAS, AxiomId, cm1e_rhs
    from .data import eval_cond, eval_data, fold_cond, fold_data, update
    from .rewrite import hnf

    ax = AxiomId(axiom)
    size = env.backend.size
    H = frozenset(rng.sample(ACTIONS, rng.randint(1, 2)))

    def term(assign=True):
        return gen_term(rng, rng.randint(0, depth), size, assign=assign)

    if ax is AxiomId.RSP:
        z, x, y = rsp_instance(rng, env, depth)
        return z, Iter(x, y)
    if ax is AxiomId.IMP1:
        e = gen_data(rng, size, VARS, 1)
        e2 = Op("-", (Op("+", (e, Num(1))), Num(1)))
        x = term()
        if rng.random() < 0.5:
            name = rng.choice(ACTIONS)
            return Seq(Act(name, (e,)), x), Seq(Act(name, (e2,)), x)
        v = rng.choice(VARS)
        return Seq(Assign(v, e), x), Seq(Assign(v, e2), x)
    if ax is AxiomId.IMP2:
        phi = gen_cond(rng, size, VARS, 1)
        phi2 = rng.choice([Not(Not(phi)), And(phi, TOP), Or(phi, phi), Or(phi, And(phi, gen_cond(rng, size, VARS, 0)))])
        x = term()
        return Guard(phi, x), Guard(phi2, x)
    if ax is AxiomId.ITER_SKIP:
        x, y = term(), term()
        guard = Guard(gen_cond(rng, size, VARS, 1), EPS)
        return Iter(Alt(guard, x), y), Iter(x, y)
    if ax is AxiomId.CM1E:
        x, _ = hnf(term(), env)
        y, _ = hnf(term(), env)
        return Par(x, y), cm1e_rhs(x, y)

    th = {}
    sch = SCHEMAS[ax]
    th.update(x=term(), y=term(), z=term(), H=H, phi=gen_cond(rng, size, VARS, 1),
              psi=gen_cond(rng, size, VARS, 1), sigma=gen_sigma(rng, size),
              a=_const(rng), b=_const(rng), pa=_pact(rng, size), pb=_pact(rng, size),
              asg=Assign(rng.choice(VARS), gen_data(rng, size, VARS, 1)))
    if ax is AxiomId.CM1T:
        th.update(x=term(False), y=term(False), H=env.actions)
    elif ax is AxiomId.CM7:
        g = env.gamma(th["a"].name, th["b"].name) if all(isinstance(t, Act) for t in (th["a"], th["b"])) else None
        th["c"] = DELTA if g is None else Act(g)
    elif ax in (AxiomId.D1, AxiomId.D2):
        inside = ax is AxiomId.D2
        names = [a for a in ACTIONS if (a in H) == inside]
        th["a"] = Act(rng.choice(names)) if names else DELTA
    elif ax in (AxiomId.D1D, AxiomId.D2D):
        inside = ax is AxiomId.D2D
        th["pa"] = _pact(rng, size, rng.choice([a for a in ACTIONS if (a in H) == inside]))
    elif ax is AxiomId.CM7Da:
        pa, pb = _pact(rng, size, "a"), _pact(rng, size, "b")
        if rng.random() < 0.5:
            pa, pb = Act("b", pa.args), Act("a", pb.args)
        th.update(pa=pa, pb=pb, pc=Act("c", pa.args), phi=Eq(pa.args[0], pb.args[0]))
    elif ax is AxiomId.CM7Db:
        th.update(pa=_pact(rng, size, rng.choice("ac")), pb=_pact(rng, size, rng.choice("ac")))
    elif ax is AxiomId.V2:
        pa = th["pa"]
        th["pb"] = Act(pa.name, tuple(fold_data(env.backend, eval_data(th["sigma"], e, env.backend)) for e in pa.args))
    elif ax is AxiomId.V3:
        asg, s = th["asg"], th["sigma"]
        val = fold_data(env.backend, eval_data(s, asg.expr, env.backend))
        th.update(asg2=Assign(asg.var, val), sigma2=update(s, asg.var, val))
    elif ax is AxiomId.V5:
        th["psi"] = fold_cond(env.backend, eval_cond(th["sigma"], th["phi"], env.backend))
    return _inst(sch.lhs, th), _inst(sch.rhs, th)


def rsp_instance(rng: random.Random, env, depth=2):
    """``(z, x, y)`` where ``z`` solves ``z = x . z + y`` up to bisimilarity.

    ``x`` must do an action before it can terminate: with ``x = eps`` the
    premise holds for every ``z`` of the form ``z + y`` while the conclusion
    fails.
    """
    size = env.backend.size
    x = gen_prefixed(rng, depth - 1, size)
    y = gen_term(rng, rng.randint(0, depth), size)
    z = rng.choice([
        Alt(Seq(x, Iter(x, y)), y),
        Iter(Alt(x, x), Alt(y, DELTA)),
        Iter(Seq(x, EPS), Seq(EPS, y)),
        Alt(Seq(x, Alt(Seq(x, Iter(x, y)), y)), y),
    ])
    return z, x, y
