"""Semantic side of asserted processes: equivalence under evaluation, truth,
and the contexts through which that equivalence carries over.

Over a finite carrier every valuation is enumerated, so verdicts are exact.
Over the integers valuations are drawn from a box (``[-8, 8]`` per variable
by default) and a positive verdict only holds within that box.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .analysis import fass, fvar_cond, fvar_proc, in_hcond, in_hproc, logical_vars_cond, subst_cond
from .bisim import bisim
from .data import FiniteBackend, eval_cond
from .hoare import AssertedProcess
from .prove import prove_eq
from .terms import (
    BINARY,
    EPS,
    Alt,
    Bot,
    Encap,
    Eval,
    EvaluationMap,
    Guard,
    Hole,
    Iter,
    Num,
    Par,
    Seq,
)

DEFAULT_BOX = (-8, 8)


def _values(env, box):
    if isinstance(env.backend, FiniteBackend):
        return list(env.backend.carrier()), True
    lo, hi = box
    return list(range(lo, hi + 1)), False


def valuations(V, env, box=DEFAULT_BOX):
    """All ``V``-evaluation maps over the carrier (or the box), in a fixed order."""
    vals, _ = _values(env, box)
    names = sorted(V)
    for combo in itertools.product(vals, repeat=len(names)):
        yield EvaluationMap.of({v: Num(x) for v, x in zip(names, combo)})


@dataclass(frozen=True)
class EqvResult:
    status: str  # holds | holds-within-box | fails | unknown
    witness: EvaluationMap | None = None
    checked: int = 0
    method: str = ""

    @property
    def holds(self) -> bool:
        return self.status in ("holds", "holds-within-box")


def _instance(sigma, p, q, env, budget):
    """Decide ``eval{sigma}(p) = eval{sigma}(q)``: 'holds', 'fails' or 'unknown'."""
    a, b = Eval(sigma, p), Eval(sigma, q)
    r = prove_eq(a, b, env, budget, hint=False)
    if r.proved:
        return "holds", "prove"
    if r.status == "budget":
        return "unknown", "budget"
    res = bisim(a, b, env)
    if res.status == "equivalent":
        return "holds", "bisim"
    if res.status == "inequivalent":
        return "fails", "bisim"
    return "unknown", res.status


def evaleqv(p, q, V, env, budget=5000, box=DEFAULT_BOX) -> EqvResult:
    """``p`` and ``q`` agree under every ``V``-evaluation map."""
    V = frozenset(V)
    if not (fvar_proc(p) | fvar_proc(q)) <= V:
        raise ValueError("the processes mention variables outside V")
    _, exact = _values(env, box)
    n, methods = 0, set()
    for sigma in valuations(V, env, box):
        n += 1
        verdict, how = _instance(sigma, p, q, env, budget)
        methods.add(how)
        if verdict != "holds":
            return EqvResult("fails" if verdict == "fails" else "unknown", sigma, n, how)
    return EqvResult("holds" if exact else "holds-within-box", None, n, "+".join(sorted(methods)))


@dataclass(frozen=True)
class TruthResult:
    status: str  # true | true-within-box | false | unknown
    instance: dict | None = None  # logical variable -> value, for a failure
    sigma: EvaluationMap | None = None
    checked: int = 0
    box: tuple | None = None

    @property
    def true(self) -> bool:
        return self.status in ("true", "true-within-box")

    def describe(self) -> str:
        from .syntax import show_sigma

        if self.status == "true-within-box":
            lo, hi = self.box
            return f"true within box [{lo}, {hi}] ({self.checked} instances, bounded check)"
        if self.status == "true":
            return f"true ({self.checked} instances, exhaustive)"
        inst = ", ".join(f"{k}={v}" for k, v in sorted((self.instance or {}).items()))
        where = f" at {inst};" if inst else ""
        sig = f" sigma = {{{show_sigma(self.sigma)}}}" if self.sigma is not None else ""
        return f"{self.status}{where}{sig}"


def truth_check(ap: AssertedProcess, env, budget=5000, box=DEFAULT_BOX) -> TruthResult:
    """Check ``pre' -> p`` against ``(pre' -> p) . (post' -> eps)`` for every closed instance.

    Instances are checked in enumeration order and the first failure is
    reported.  A valuation that falsifies the instantiated precondition makes
    both sides ``delta`` and is counted without further work.
    """
    vals, exact = _values(env, box)
    logical = sorted(logical_vars_cond(ap.pre) | logical_vars_cond(ap.post))
    V = ap.fvar
    n = 0
    unknown = None
    sigmas = list(valuations(V, env, box))
    for combo in itertools.product(vals, repeat=len(logical)):
        inst = dict(zip(logical, combo))
        bind = {k: Num(x) for k, x in inst.items()}
        pre = subst_cond(ap.pre, bind)
        post = subst_cond(ap.post, bind)
        lhs = Guard(pre, ap.proc)
        rhs = Seq(Guard(pre, ap.proc), Guard(post, EPS))
        for sigma in sigmas:
            n += 1
            if isinstance(eval_cond(sigma, pre, env.backend), Bot):
                continue
            verdict, _ = _instance(sigma, lhs, rhs, env, budget)
            if verdict == "fails":
                return TruthResult("false", inst, sigma, n, None if exact else box)
            if verdict == "unknown" and unknown is None:
                unknown = (inst, sigma)
    if unknown is not None:
        return TruthResult("unknown", unknown[0], unknown[1], n, None if exact else box)
    return TruthResult("true" if exact else "true-within-box", None, None, n, None if exact else box)


# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class SeqContext:
    """A process term with exactly one hole ``[]``."""

    term: object

    def __post_init__(self):
        k = _holes(self.term)
        if k != 1:
            raise ValueError(f"a context has exactly one hole, found {k}")

    def apply(self, p):
        return apply_context(self, p)


def _holes(t) -> int:
    if isinstance(t, Hole):
        return 1
    if isinstance(t, BINARY):
        return _holes(t.left) + _holes(t.right)
    if isinstance(t, (Guard, Encap, Eval)):
        return _holes(t.body)
    return 0


def apply_context(C, p):
    t = C.term if isinstance(C, SeqContext) else C

    def fill(t):
        if isinstance(t, Hole):
            return p
        if isinstance(t, BINARY):
            return type(t)(fill(t.left), fill(t.right))
        if isinstance(t, Guard):
            return Guard(t.cond, fill(t.body))
        if isinstance(t, Encap):
            return Encap(t.blocked, fill(t.body))
        if isinstance(t, Eval):
            return Eval(t.sigma, fill(t.body))
        return t

    return fill(t)


@dataclass(frozen=True)
class ContextCheck:
    ok: bool
    V: frozenset = frozenset()  # index of the whole context
    W: frozenset = frozenset()
    base_W: frozenset = frozenset()  # W chosen at the hole
    violation: str = ""


def _path(t):
    """Layers from the hole outwards: (kind, side term or cond or H)."""
    if isinstance(t, Hole):
        return []
    if isinstance(t, BINARY):
        if _holes(t.left):
            inner, side = t.left, t.right
        else:
            inner, side = t.right, t.left
        kind = "par" if isinstance(t, Par) else "seq-like"
        if not isinstance(t, (Par, Seq, Iter, Alt)):
            raise ValueError(f"{type(t).__name__} may not enclose the hole of a context")
        return _path(inner) + [(kind, side)]
    if isinstance(t, Guard):
        return _path(t.body) + [("guard", t.cond)]
    if isinstance(t, Encap):
        return _path(t.body) + [("encap", t.blocked)]
    raise ValueError(f"{type(t).__name__} may not enclose the hole of a context")


def context_check(C, V) -> ContextCheck:
    """Is ``C`` a sequential-evaluation-supporting context for ``V``?

    The hole is indexed by ``(V, W)`` with the smallest ``W`` the side terms
    need; each layer is then checked outwards, parallel layers re-indexing.
    """
    t = C.term if isinstance(C, SeqContext) else C
    V = frozenset(V)
    try:
        layers = _path(t)
    except ValueError as e:
        return ContextCheck(False, violation=str(e))
    need, added = set(), set()
    for kind, x in layers:
        if kind == "seq-like":
            need |= fass(x) - added
        elif kind == "par":
            added |= fass(x)
    W0 = frozenset(need)
    if not W0 <= V:
        return ContextCheck(False, violation=f"side terms assign {sorted(W0 - V)} outside V")
    curV, curW = V, W0
    from .syntax import show

    for kind, x in layers:
        if kind == "seq-like":
            if not in_hproc(x):
                return ContextCheck(False, violation=f"side term {show(x)} is not a plain process")
            if not fvar_proc(x) <= curV:
                return ContextCheck(False, violation=f"seq rule: FVar({show(x)}) not within V, extra {sorted(fvar_proc(x) - curV)}")
            if not fass(x) <= curW:
                return ContextCheck(False, violation=f"seq rule: FAss({show(x)}) not within W, extra {sorted(fass(x) - curW)}")
        elif kind == "guard":
            if not in_hcond(x):
                return ContextCheck(False, violation="guard rule: condition variables are not allowed")
            if not fvar_cond(x) <= curV:
                return ContextCheck(False, violation=f"guard rule: FVar(guard) not within V, extra {sorted(fvar_cond(x) - curV)}")
        elif kind == "par":
            if not in_hproc(x):
                return ContextCheck(False, violation=f"side term {show(x)} is not a plain process")
            clash = fass(x) & curV
            if clash:
                return ContextCheck(False, violation=f"par rule: FAss(p) & V = {{{', '.join(sorted(clash))}}}")
            clash = fvar_proc(x) & curW
            if clash:
                return ContextCheck(False, violation=f"par rule: FVar(p) & W = {{{', '.join(sorted(clash))}}}")
            curV, curW = curV | fvar_proc(x), curW | fass(x)
    return ContextCheck(True, curV, curW, W0)


@dataclass(frozen=True)
class TransferResult:
    status: str  # holds | holds-within-box | fails | unknown | not-applicable
    premise: EqvResult | None = None
    conclusion: EqvResult | None = None
    context: ContextCheck | None = None


def corollary_transfer(p, p2, V, C, env, budget=5000, box=DEFAULT_BOX) -> TransferResult:
    """From ``p`` equivalent to ``p2`` under ``V`` conclude it for ``C[p]`` and ``C[p2]``, re-checking both."""
    V = frozenset(V)
    cc = context_check(C, V)
    if not cc.ok:
        return TransferResult("not-applicable", context=cc)
    if not (fvar_proc(p) | fvar_proc(p2)) <= V:
        return TransferResult("not-applicable", context=cc)
    pre = evaleqv(p, p2, V, env, budget, box)
    if not pre.holds:
        return TransferResult(pre.status, pre, None, cc)
    a, b = apply_context(C, p), apply_context(C, p2)
    W = cc.V | fvar_proc(a) | fvar_proc(b)
    post = evaleqv(a, b, W, env, budget, box)
    return TransferResult(post.status, pre, post, cc)
