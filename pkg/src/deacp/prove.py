"""Equation proving by head normal forms and coinduction, and evaluation elimination.

``prove_eq`` drives both sides to head normal form and pairs up summands.  A
pair of continuations that is already being proved further up is taken as
proved: the cycle is the fixed point that RSP* licenses.  ``eval_eliminate``
unfolds ``eval{s}(p)`` into its reachable (valuation, residue) states and folds
revisited states back into iteration.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .analysis import cleanup, is_hnf
from .axioms import RewriteTrace, check_trace
from .bisim import OracleUnknown, bisim, data_equiv
from .rewrite import hnf, hnf_summands
from .terms import (
    DELTA,
    EPS,
    Alt,
    Delta,
    Eps,
    Eval,
    Guard,
    Iter,
    Seq,
    Top,
    disj,
)

DEFAULT_BUDGET = 5000


def default_budget() -> int:
    try:
        return int(os.environ.get("DEACP_BUDGET", DEFAULT_BUDGET))
    except ValueError:
        return DEFAULT_BUDGET


class BudgetExhausted(RuntimeError):
    def __init__(self, message, frontier=()):
        super().__init__(message)
        self.frontier = tuple(frontier)


# ---------------------------------------------------------------- proof objects


@dataclass(frozen=True)
class Link:
    """Left summand ``left`` and right summand ``right`` continue as goal ``goal``."""

    left: int
    right: int
    goal: int


@dataclass(frozen=True)
class Group:
    """Summands shown equal together: their guards must agree as disjunctions."""

    left: tuple
    right: tuple
    links: tuple = ()
    terminal: bool = False


@dataclass(frozen=True)
class Goal:
    left: object
    right: object
    kind: str  # "refl" or "expand"
    left_trace: RewriteTrace | None = None
    right_trace: RewriteTrace | None = None
    groups: tuple = ()


@dataclass(frozen=True)
class EqProof:
    """Goal 0 is the equation proved; links may point back to any goal."""

    goals: tuple

    @property
    def left(self):
        return self.goals[0].left

    @property
    def right(self):
        return self.goals[0].right


@dataclass(frozen=True)
class EqResult:
    status: str  # proved | refuted | failed | unknown | budget
    proof: EqProof | None = None
    hint: object = field(default=None, repr=False)
    message: str = ""

    @property
    def proved(self) -> bool:
        return self.status == "proved"


class _Fail(Exception):
    def __init__(self, message, unknown=False):
        super().__init__(message)
        self.unknown = unknown


class _Prover:
    def __init__(self, env, budget):
        self.env = env
        self.budget = budget
        self.used = 0
        self.memo = {}
        self.goals = []
        self.stack = {}  # (p, q) -> goal index of a pending goal
        self.done = {}
        self.failed = set()
        self.unknown = False

    def equiv(self, a, b):
        try:
            return data_equiv(a, b, self.env)
        except OracleUnknown:
            self.unknown = True
            return False

    def same_guard(self, fs, gs):
        v = self.env.backend.models_iff(disj(*fs), disj(*gs))
        if v.unknown:
            self.unknown = True
        return v.valid

    def prove(self, p, q):
        """Goal index proving ``p = q`` and the lowest pending goal it relies on."""
        key = (p, q)
        if key in self.done:
            return self.done[key], None
        if key in self.stack:
            return self.stack[key], self.stack[key]
        if key in self.failed:
            raise _Fail("already refuted")
        idx = len(self.goals)
        if p == q:
            self.goals.append(Goal(p, q, "refl"))
            self.done[key] = idx
            return idx, None
        self.used += 1
        if self.used > self.budget:
            raise BudgetExhausted(f"more than {self.budget} goals", [key])
        self.goals.append(None)
        self.stack[key] = idx
        try:
            goal, low = self._expand(p, q, idx)
        except _Fail:
            del self.stack[key]
            self._rollback(idx)
            self.failed.add(key)
            raise
        del self.stack[key]
        self.goals[idx] = goal
        if low is None or low >= idx:
            self.done[key] = idx
            low = None
        return idx, low

    def _rollback(self, idx):
        del self.goals[idx:]
        self.done = {k: v for k, v in self.done.items() if v < idx}

    def _expand(self, p, q, idx):
        hp, tp = hnf(p, self.env, self.memo)
        hq, tq = hnf(q, self.env, self.memo)
        ls, rs = hnf_summands(hp), hnf_summands(hq)
        groups = []
        low = None
        # termination
        le = tuple(i for i, s in enumerate(ls) if s[1] is None)
        re_ = tuple(j for j, s in enumerate(rs) if s[1] is None)
        if le or re_:
            if not self.same_guard([ls[i][0] for i in le], [rs[j][0] for j in re_]):
                raise _Fail("termination conditions differ")
            groups.append(Group(le, re_, (), True))
        # action summands: connect data-equivalent heads with provable continuations
        li = [i for i, s in enumerate(ls) if s[1] is not None]
        rj = [j for j, s in enumerate(rs) if s[1] is not None]
        parent = {("l", i): ("l", i) for i in li}
        parent.update({("r", j): ("r", j) for j in rj})

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        links = []
        for i in li:
            for j in rj:
                if find(("l", i)) == find(("r", j)):
                    continue
                if not self.equiv(ls[i][1], rs[j][1]):
                    continue
                try:
                    g, dep = self.prove(ls[i][2], rs[j][2])
                except _Fail:
                    continue
                if dep is not None and dep < idx:
                    low = dep if low is None else min(low, dep)
                links.append(Link(i, j, g))
                parent[find(("l", i))] = find(("r", j))
        comps = {}
        for node in parent:
            comps.setdefault(find(node), []).append(node)
        for members in comps.values():
            gl = tuple(sorted(i for s, i in members if s == "l"))
            gr = tuple(sorted(j for s, j in members if s == "r"))
            if not self.same_guard([ls[i][0] for i in gl], [rs[j][0] for j in gr]):
                raise _Fail("guards of matched summands differ")
            mine = tuple(k for k in links if k.left in gl)
            groups.append(Group(gl, gr, mine, False))
        groups.sort(key=lambda g: (not g.terminal, g.left, g.right))
        return Goal(p, q, "expand", tp, tq, tuple(groups)), low


def prove_eq(p, q, env, budget=None, hint=True) -> EqResult:
    """Try to derive ``p = q``; on failure optionally consult bisimulation for a hint."""
    budget = default_budget() if budget is None else budget
    pr = _Prover(env, budget)
    try:
        pr.prove(p, q)
        return EqResult("proved", EqProof(tuple(pr.goals)))
    except BudgetExhausted as e:
        return EqResult("budget", message=str(e))
    except _Fail as e:
        msg = str(e)
    if not hint:
        return EqResult("unknown" if pr.unknown else "failed", message=msg)
    res = bisim(p, q, env)
    if res.status == "inequivalent":
        return EqResult("refuted", hint=res, message="the terms are not bisimilar")
    if pr.unknown or res.status == "unknown":
        return EqResult("unknown", hint=res, message=msg)
    return EqResult("failed", hint=res, message=msg)


def check_eq_proof(proof: EqProof, env) -> list:
    """Independent check of a proof object; returns complaints (empty when valid)."""
    errs = []
    n = len(proof.goals)
    be = env.backend
    for k, g in enumerate(proof.goals):
        if g is None:
            errs.append(f"goal {k}: missing")
            continue
        if g.kind == "refl":
            if g.left != g.right:
                errs.append(f"goal {k}: sides differ")
            continue
        sums = []
        for side, t, tr in (("left", g.left, g.left_trace), ("right", g.right, g.right_trace)):
            if tr is None or tr.start != t:
                errs.append(f"goal {k}: {side} trace does not start at the goal")
                sums.append([])
                continue
            bad = check_trace(tr, env)
            errs += [f"goal {k}: {side} trace: {e}" for e in bad]
            h = tr.result
            if not is_hnf(h):
                errs.append(f"goal {k}: {side} trace does not end in head normal form")
            sums.append(hnf_summands(h))
        ls, rs = sums
        seen_l, seen_r = set(), set()
        for grp in g.groups:
            seen_l |= set(grp.left)
            seen_r |= set(grp.right)
            if any(i >= len(ls) for i in grp.left) or any(j >= len(rs) for j in grp.right):
                errs.append(f"goal {k}: group refers to a missing summand")
                continue
            for i in grp.left:
                if (ls[i][1] is None) != grp.terminal:
                    errs.append(f"goal {k}: left summand {i} in the wrong kind of group")
            for j in grp.right:
                if (rs[j][1] is None) != grp.terminal:
                    errs.append(f"goal {k}: right summand {j} in the wrong kind of group")
            v = be.models_iff(disj(*(ls[i][0] for i in grp.left)), disj(*(rs[j][0] for j in grp.right)))
            if not v.valid:
                errs.append(f"goal {k}: group guards are not equivalent")
            if grp.terminal:
                continue
            nodes = {("l", i) for i in grp.left} | {("r", j) for j in grp.right}
            adj = {x: set() for x in nodes}
            for ln in grp.links:
                if ln.left not in grp.left or ln.right not in grp.right:
                    errs.append(f"goal {k}: link outside its group")
                    continue
                if not (0 <= ln.goal < n) or proof.goals[ln.goal] is None:
                    errs.append(f"goal {k}: link to missing goal {ln.goal}")
                    continue
                sub = proof.goals[ln.goal]
                if (sub.left, sub.right) != (ls[ln.left][2], rs[ln.right][2]):
                    errs.append(f"goal {k}: link goal {ln.goal} does not match the continuations")
                try:
                    if not data_equiv(ls[ln.left][1], rs[ln.right][1], env):
                        errs.append(f"goal {k}: linked actions are not data equivalent")
                except OracleUnknown:
                    errs.append(f"goal {k}: oracle cannot compare linked actions")
                adj[("l", ln.left)].add(("r", ln.right))
                adj[("r", ln.right)].add(("l", ln.left))
            if nodes:
                start = next(iter(sorted(nodes)))
                reach, todo = {start}, [start]
                while todo:
                    for y in adj[todo.pop()]:
                        if y not in reach:
                            reach.add(y)
                            todo.append(y)
                if reach != nodes:
                    errs.append(f"goal {k}: group is not connected by links")
        if seen_l != set(range(len(ls))) or seen_r != set(range(len(rs))):
            errs.append(f"goal {k}: groups do not cover all summands")
    return errs


def format_eq_proof(proof: EqProof) -> str:
    """Readable rendering: each goal with its normal forms and summand matching."""
    from .axioms import format_trace
    from .syntax import show

    out = []
    for k, g in enumerate(proof.goals):
        out.append(f"goal {k} : {show(g.left)} = {show(g.right)}")
        if g.kind == "refl":
            out.append("  by reflexivity")
            continue
        for side, tr in (("left", g.left_trace), ("right", g.right_trace)):
            out.append(f"  {side} normal form: {show(tr.result)}  ({len(tr)} steps)")
            for line in format_trace(tr).splitlines()[1:]:
                out.append(f"    {line}")
        for grp in g.groups:
            what = "termination" if grp.terminal else "actions"
            links = ", ".join(f"{ln.left}~{ln.right} by goal {ln.goal}" for ln in grp.links)
            out.append(f"  group {what} left {list(grp.left)} right {list(grp.right)}"
                       + (f" : {links}" if links else ""))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- evaluation elimination


class EliminationError(ValueError):
    pass


@dataclass(frozen=True)
class _Ref:
    """Back-reference to a pending state while its equation is being solved."""

    k: int


def _refs(t) -> set:
    if isinstance(t, _Ref):
        return {t.k}
    out = set()
    for name in ("left", "right", "body"):
        sub = getattr(t, name, None)
        if sub is not None and not isinstance(sub, (str, int)):
            out |= _refs(sub)
    return out


def _seq(x, y):
    if isinstance(x, Delta):
        return DELTA
    if isinstance(y, Eps):
        return x
    if isinstance(x, Eps):
        return y
    return Seq(x, y)


def _guard(phi, x):
    if isinstance(x, Delta):
        return DELTA
    if isinstance(phi, Top):
        return x
    return Guard(phi, x)


def _alt(x, y):
    if isinstance(x, Delta):
        return y
    if isinstance(y, Delta):
        return x
    return Alt(x, y)


def _factor(t, k):
    """Write ``t`` as ``L . ref(k) + E``; returns ``(L, E)`` using delta for absence."""
    if k not in _refs(t):
        return DELTA, t
    if t == _Ref(k):
        return EPS, DELTA
    if isinstance(t, Alt):
        l1, e1 = _factor(t.left, k)
        l2, e2 = _factor(t.right, k)
        return _alt(l1, l2), _alt(e1, e2)
    if isinstance(t, Seq):
        if k in _refs(t.left):
            raise EliminationError("a loop is re-entered in a non-tail position")
        l, e = _factor(t.right, k)
        if not isinstance(e, Delta):
            # x . (l . ref + e) does not split into x . l . ref + x . e
            raise EliminationError("a loop is re-entered after a choice that can also leave it")
        return _seq(t.left, l), DELTA
    if isinstance(t, Guard):
        l, e = _factor(t.body, k)
        return _guard(t.cond, l), _guard(t.cond, e)
    if isinstance(t, Iter):
        if k in _refs(t.left):
            raise EliminationError("a loop is re-entered inside an iteration body")
        l, e = _factor(t.right, k)
        if not isinstance(e, Delta):
            raise EliminationError("an iteration both exits and re-enters an enclosing loop")
        return Iter(t.left, l), DELTA
    raise EliminationError(f"cannot factor a loop through {type(t).__name__}")


class _Eliminator:
    def __init__(self, env, budget):
        self.env = env
        self.budget = budget
        self.memo = {}
        self.stack = {}
        self.done = {}
        self.count = 0

    def state(self, t):
        if isinstance(t, Eval):
            if isinstance(t.body, Eps):
                return EPS
            if isinstance(t.body, Delta):
                return DELTA
        if isinstance(t, (Eps, Delta)):
            return t
        if t in self.done:
            return self.done[t]
        if t in self.stack:
            return _Ref(self.stack[t])
        self.count += 1
        if self.count > self.budget:
            raise BudgetExhausted(
                f"more than {self.budget} evaluation states", list(self.stack)
            )
        k = len(self.stack)
        self.stack[t] = k
        h, _ = hnf(t, self.env, self.memo)
        body = DELTA
        for cond, act, cont in hnf_summands(h):
            if act is None:
                part = _guard(cond, EPS)
            else:
                part = _guard(cond, _seq(act, self.state(cleanup(cont))))
            body = _alt(body, part)
        del self.stack[t]
        if k in _refs(body):
            l, e = _factor(body, k)
            body = Iter(l, e)
        if not _refs(body):
            self.done[t] = body
        return body


def eval_eliminate(sigma, p, env, budget=10000):
    """An evaluation-free term equal to ``eval{sigma}(p)``.

    Guards that the valuation closes are decided by the oracle; ``x . eps``
    and ``[true] -> x`` are written ``x``.
    """
    el = _Eliminator(env, budget)
    return el.state(cleanup(Eval(sigma, p)))
