"""Structural operational semantics: condition-labelled transitions and termination.

Side conditions of the form "phi is satisfiable" are decided by the backend.
A candidate whose condition the oracle cannot decide is kept apart as
*undetermined*; so is anything derived from such a candidate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .analysis import cleanup as _cleanup
from .data import EvaluationError, eval_cond, eval_data, update
from .terms import (
    TOP,
    Act,
    Alt,
    And,
    Assign,
    CMerge,
    Encap,
    Eps,
    Eq,
    Eval,
    Guard,
    Hole,
    Iter,
    LMerge,
    Num,
    Par,
    Seq,
    conj,
)


@dataclass(frozen=True)
class Transition:
    source: object
    cond: object
    action: object
    target: object


@dataclass(frozen=True)
class TerminationFact:
    term: object
    cond: object


class SosError(ValueError):
    pass


class _Sem:
    def __init__(self, env):
        self.env = env
        self.backend = env.backend
        self.cache_s = {}
        self.cache_t = {}

    def sat(self, phi):
        """True, False, or None when the oracle cannot tell."""
        v = self.backend.satisfiable(phi)
        if v.valid:
            return True
        if v.invalid:
            return False
        return None

    def filt(self, phi, det):
        ok = self.sat(phi)
        if ok is False:
            return None
        return det and ok is True

    # Each candidate: (cond, action, target, determined)

    def steps(self, p):
        hit = self.cache_s.get(p)
        if hit is None:
            hit = self.cache_s[p] = tuple(self._steps(p))
        return hit

    def terms(self, p):
        hit = self.cache_t.get(p)
        if hit is None:
            hit = self.cache_t[p] = tuple(self._terms(p))
        return hit

    def _terms(self, p):
        if isinstance(p, Eps):
            yield TOP, True
        elif isinstance(p, Alt):
            yield from self.terms(p.left)
            yield from self.terms(p.right)
        elif isinstance(p, (Seq, Par)):
            for f, d1 in self.terms(p.left):
                for g, d2 in self.terms(p.right):
                    c = And(f, g)
                    det = self.filt(c, d1 and d2)
                    if det is not None:
                        yield c, det
        elif isinstance(p, Iter):
            yield from self.terms(p.right)
        elif isinstance(p, Guard):
            for f, d in self.terms(p.body):
                c = And(f, p.cond)
                det = self.filt(c, d)
                if det is not None:
                    yield c, det
        elif isinstance(p, Encap):
            yield from self.terms(p.body)
        elif isinstance(p, Eval):
            for f, d in self.terms(p.body):
                c = eval_cond(p.sigma, f, self.backend)
                det = self.filt(c, d)
                if det is not None:
                    yield c, det
        elif isinstance(p, Hole):
            raise SosError("a context hole has no behaviour")

    def _sync(self, l, r):
        for f, a, x2, d1 in self.steps(l):
            if not isinstance(a, Act):
                continue
            for g, b, y2, d2 in self.steps(r):
                if not isinstance(b, Act) or bool(a.args) != bool(b.args):
                    continue
                c = self.env.gamma(a.name, b.name)
                if c is None:
                    continue
                if a.args:
                    if len(a.args) != len(b.args):
                        continue
                    cond = conj(f, g, *(Eq(e, e2) for e, e2 in zip(a.args, b.args)))
                    act = Act(c, a.args)
                else:
                    cond = And(f, g)
                    act = Act(c)
                det = self.filt(cond, d1 and d2)
                if det is not None:
                    yield cond, act, Par(x2, y2), det

    def _steps(self, p):
        if isinstance(p, (Act, Assign)):
            yield TOP, p, Eps(), True
        elif isinstance(p, Alt):
            yield from self.steps(p.left)
            yield from self.steps(p.right)
        elif isinstance(p, Seq):
            x, y = p.left, p.right
            for f, a, x2, d in self.steps(x):
                yield f, a, Seq(x2, y), d
            for f, d1 in self.terms(x):
                for g, a, y2, d2 in self.steps(y):
                    c = And(f, g)
                    det = self.filt(c, d1 and d2)
                    if det is not None:
                        yield c, a, y2, det
        elif isinstance(p, Iter):
            for f, a, y2, d in self.steps(p.right):
                yield f, a, y2, d
            for f, a, x2, d in self.steps(p.left):
                yield f, a, Seq(x2, p), d
        elif isinstance(p, Guard):
            for f, a, x2, d in self.steps(p.body):
                c = And(f, p.cond)
                det = self.filt(c, d)
                if det is not None:
                    yield c, a, x2, det
        elif isinstance(p, Par):
            x, y = p.left, p.right
            for f, a, x2, d in self.steps(x):
                yield f, a, Par(x2, y), d
            for f, a, y2, d in self.steps(y):
                yield f, a, Par(x, y2), d
            yield from self._sync(x, y)
        elif isinstance(p, LMerge):
            for f, a, x2, d in self.steps(p.left):
                yield f, a, Par(x2, p.right), d
        elif isinstance(p, CMerge):
            yield from self._sync(p.left, p.right)
        elif isinstance(p, Encap):
            for f, a, x2, d in self.steps(p.body):
                if isinstance(a, Act) and a.name in p.blocked:
                    continue
                yield f, a, Encap(p.blocked, x2), d
        elif isinstance(p, Eval):
            yield from self._eval_steps(p)
        elif isinstance(p, Hole):
            raise SosError("a context hole has no behaviour")

    def _eval_steps(self, p):
        s, be = p.sigma, self.backend
        for f, a, x2, d in self.steps(p.body):
            c = eval_cond(s, f, be)
            det = self.filt(c, d)
            if det is None:
                continue
            if isinstance(a, Assign):
                val = eval_data(s, a.expr, be)
                act = Assign(a.var, val)
                if isinstance(s(a.var), Num):
                    try:
                        s2 = update(s, a.var, val)
                    except EvaluationError:
                        raise EvaluationError(
                            f"assignment to {a.var} under evaluation leaves an unvalued variable"
                        ) from None
                    yield c, act, Eval(s2, x2), det
                else:
                    yield c, act, Eval(s, x2), det
            elif a.args:
                act = Act(a.name, tuple(eval_data(s, e, be) for e in a.args))
                yield c, act, Eval(s, x2), det
            else:
                yield c, a, Eval(s, x2), det


@dataclass(frozen=True)
class StepSet:
    transitions: frozenset
    undetermined: frozenset = frozenset()


def _sem(env, sem=None):
    return sem if sem is not None else _Sem(env)


def steps(p, env, sem=None) -> StepSet:
    """All transitions of ``p`` derivable by the rules."""
    s = _sem(env, sem)
    ok, und = set(), set()
    for f, a, q, det in s.steps(p):
        (ok if det else und).add(Transition(p, f, a, q))
    return StepSet(frozenset(ok), frozenset(und))


def terminations(p, env, sem=None) -> StepSet:
    s = _sem(env, sem)
    ok, und = set(), set()
    for f, det in s.terms(p):
        (ok if det else und).add(TerminationFact(p, f))
    return StepSet(frozenset(ok), frozenset(und))


# ---------------------------------------------------------------- exploration


@dataclass(frozen=True)
class Lts:
    """Explored transition system; state 0 is the initial term."""

    states: tuple
    transitions: tuple  # (src, cond, action, dst)
    terminations: tuple  # (state, cond)
    undetermined: tuple = ()  # ("step", src, cond, action, dst) or ("term", state, cond)
    truncated: bool = False
    index: dict = field(default=None, compare=False, repr=False)
    cleanup: bool = True  # targets were simplified during exploration

    def out(self, i):
        return [t for t in self.transitions if t[0] == i]

    def terms_of(self, i):
        return [c for s, c in self.terminations if s == i]

    @property
    def determined(self) -> bool:
        return not self.undetermined


def _sort_key(item):
    from .syntax import show

    return tuple(show(x) if not isinstance(x, int) else f"{x:08d}" for x in item)


def explore(p, env, max_states=2000, cleanup=True, sem=None) -> Lts:
    """Breadth-first closure of the step relation from ``p``.

    With ``cleanup`` the targets are simplified by ``x + delta = x``,
    ``x . eps = x`` and ``eps . x = x`` so that trivial duplicates merge.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    s = _sem(env, sem)
    index = {p: 0}
    states = [p]
    trans, terms, und = [], [], []
    truncated = False
    queue = deque([0])
    while queue:
        i = queue.popleft()
        t = states[i]
        for f, det in s.terms(t):
            if det:
                terms.append((i, f))
            else:
                und.append(("term", i, f))
        for f, a, q, det in s.steps(t):
            if cleanup:
                q = _cleanup(q)
            j = index.get(q)
            if j is None:
                if len(states) >= max_states:
                    truncated = True
                    continue
                j = index[q] = len(states)
                states.append(q)
                queue.append(j)
            if det:
                trans.append((i, f, a, j))
            else:
                und.append(("step", i, f, a, j))
    return Lts(
        tuple(states),
        tuple(sorted(set(trans), key=_sort_key)),
        tuple(sorted(set(terms), key=_sort_key)),
        tuple(sorted(set(und), key=_sort_key)),
        truncated,
        index,
        cleanup,
    )


def dump_lts(lts: Lts) -> str:
    """Stable line-oriented rendering of an explored system."""
    from .syntax import show

    lines = [f"states {len(lts.states)}"]
    for i, t in enumerate(lts.states):
        lines.append(f"state {i} : {show(t)}")
    for i, f, a, j in lts.transitions:
        lines.append(f"trans {i} -> {j} : [{show(f)}] {show(a)}")
    for i, f in lts.terminations:
        lines.append(f"term {i} : [{show(f)}]")
    for u in lts.undetermined:
        if u[0] == "step":
            _, i, f, a, j = u
            lines.append(f"undetermined trans {i} -> {j} : [{show(f)}] {show(a)}")
        else:
            _, i, f = u
            lines.append(f"undetermined term {i} : [{show(f)}]")
    lines.append(f"truncated {'yes' if lts.truncated else 'no'}")
    if not lts.cleanup:
        lines.append("cleanup no")
    return "\n".join(lines) + "\n"


def parse_lts(text: str, **kw) -> Lts:
    """Inverse of :func:`dump_lts`."""
    import re

    from .syntax import parse_cond, parse_proc

    logical = kw.get("logical", ())
    states, trans, terms, und = [], [], [], []
    truncated, clean = False, True
    rx_t = re.compile(r"(undetermined )?trans (\d+) -> (\d+) : \[(.*)\] (.*)$")
    rx_f = re.compile(r"(undetermined )?term (\d+) : \[(.*)\]$")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("states "):
            continue
        if line.startswith("state "):
            _, rest = line.split(" : ", 1)
            states.append(parse_proc(rest, **kw))
        elif line.startswith("truncated "):
            truncated = line.endswith("yes")
        elif line.startswith("cleanup "):
            clean = line.endswith("yes")
        elif m := rx_t.match(line):
            u, i, j, f, a = m.groups()
            item = (int(i), parse_cond(f, logical=logical), parse_proc(a, **kw), int(j))
            if u:
                und.append(("step",) + item)
            else:
                trans.append(item)
        elif m := rx_f.match(line):
            u, i, f = m.groups()
            item = (int(i), parse_cond(f, logical=logical))
            if u:
                und.append(("term",) + item)
            else:
                terms.append(item)
        else:
            raise ValueError(f"bad LTS line: {line}")
    return Lts(tuple(states), tuple(trans), tuple(terms), tuple(und), truncated,
               {t: i for i, t in enumerate(states)}, clean)
