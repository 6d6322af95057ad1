"""Head normal forms with derivation traces.

:func:`hnf` drives a closed process term to a head normal form, recording
every axiom application as a :class:`~deacp.axioms.Step` at an absolute
position.  The recursion follows the structure of the term; prefixes
``phi -> alpha . p`` are never entered, which is what makes it terminate.
"""

from __future__ import annotations

from .analysis import is_hnf
from .axioms import AxiomId as Ax
from .axioms import RewriteTrace, Step, cm1e_rhs
from .data import EvaluationError, eval_cond, eval_data, update
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
    Delta,
    Encap,
    Eps,
    Eq,
    Eval,
    Guard,
    Hole,
    Iter,
    LMerge,
    Par,
    Seq,
    Top,
    alt,
    children,
    conj,
    is_action,
    replace_at,
    subterm,
    summands,
)


class RewriteError(ValueError):
    pass


class Deriver:
    """A term under rewriting plus the steps applied so far."""

    def __init__(self, term, env, memo=None):
        self.start = term
        self.term = term
        self.env = env
        self.steps = []
        self.memo = {} if memo is None else memo

    # -- primitives ------------------------------------------------------

    def at(self, pos):
        return subterm(self.term, pos)

    def step(self, pos, axiom, after):
        before = self.at(pos)
        self.steps.append(Step(tuple(pos), axiom, before, after))
        self.term = replace_at(self.term, pos, after)
        return after

    def trace(self) -> RewriteTrace:
        return RewriteTrace(self.start, tuple(self.steps))

    # -- guards ----------------------------------------------------------

    def simplify_guard(self, pos):
        """Rewrite the guard of ``phi -> x`` at ``pos`` to true/false when the oracle can."""
        t = self.at(pos)
        phi = t.cond
        if isinstance(phi, Top):
            return t
        trimmed = _trim(phi)
        if trimmed != phi:
            self.step(pos + (0,), Ax.IMP2, trimmed)
            phi = trimmed
            if isinstance(phi, Top):
                return self.at(pos)
        be = self.env.backend
        if be.satisfiable(phi).invalid:
            self.step(pos + (0,), Ax.IMP2, BOT)
            return self.step(pos, Ax.GC2, DELTA)
        if be.valid(phi).valid:
            self.step(pos + (0,), Ax.IMP2, TOP)
        return self.at(pos)

    def prune(self, pos):
        """Drop deadlock summands of a sum at ``pos`` whose parts are already pruned."""
        t = self.at(pos)
        if not isinstance(t, Alt):
            return t
        if isinstance(t.right, Delta):
            return self.step(pos, Ax.A6, t.left)
        if isinstance(t.left, Delta):
            self.step(pos, Ax.A1, Alt(t.right, t.left))
            return self.step(pos, Ax.A6, t.right)
        return t

    # -- main entry ------------------------------------------------------

    def norm(self, pos=()):
        t = self.at(pos)
        hit = self.memo.get(t)
        if hit is not None:
            result, rel = hit
            for st in rel:
                self.steps.append(Step(tuple(pos) + st.pos, st.axiom, st.before, st.after))
            self.term = replace_at(self.term, pos, result)
            return result
        mark = len(self.steps)
        result = self._norm(pos, t)
        n = len(pos)
        self.memo[t] = (
            result,
            tuple(Step(s.pos[n:], s.axiom, s.before, s.after) for s in self.steps[mark:]),
        )
        return result

    def _norm(self, pos, t):
        pos = tuple(pos)
        if is_hnf(t):
            return self.tidy(pos)
        if isinstance(t, Eps):
            return self.step(pos, Ax.GC1, Guard(TOP, EPS))
        if is_action(t):
            self.step(pos, Ax.A8, Seq(t, EPS))
            return self.step(pos, Ax.GC1, Guard(TOP, Seq(t, EPS)))
        if isinstance(t, Alt):
            self.norm(pos + (0,))
            self.norm(pos + (1,))
            return self.prune(pos)
        if isinstance(t, Guard):
            self.norm(pos + (1,))
            return self.push(pos)
        if isinstance(t, Seq):
            if is_action(t.left):
                return self.step(pos, Ax.GC1, Guard(TOP, t))
            self.norm(pos + (0,))
            return self.distribute(pos)
        if isinstance(t, Iter):
            return self.iterate(pos)
        if isinstance(t, Par):
            if has_assignment(t):
                self.norm(pos + (0,))
                self.norm(pos + (1,))
                t = self.at(pos)
                self.step(pos, Ax.CM1E, cm1e_rhs(t.left, t.right))
                for sub in ((0,), (1, 0), (1, 1, 0)):
                    self.norm(pos + sub)
                self.prune(pos + (1, 1))
                self.prune(pos + (1,))
                return self.prune(pos)
            x, y = t.left, t.right
            acts = self.env.actions
            self.step(
                pos,
                Ax.CM1T,
                Alt(LMerge(x, y), Alt(LMerge(y, x), Alt(CMerge(x, y), Seq(Encap(acts, x), Encap(acts, y))))),
            )
            for sub in ((0,), (1, 0), (1, 1, 0), (1, 1, 1)):
                self.norm(pos + sub)
            self.prune(pos + (1, 1))
            self.prune(pos + (1,))
            return self.prune(pos)
        if isinstance(t, LMerge):
            self.norm(pos + (0,))
            return self.lmerge(pos)
        if isinstance(t, CMerge):
            self.norm(pos + (0,))
            self.norm(pos + (1,))
            return self.cmerge(pos)
        if isinstance(t, Encap):
            self.norm(pos + (0,))
            return self.encap(pos)
        if isinstance(t, Eval):
            self.norm(pos + (0,))
            return self.evaluate(pos)
        if isinstance(t, Hole):
            raise RewriteError("a context hole has no head normal form")
        raise RewriteError(f"cannot normalise {t!r}")

    def tidy(self, pos):
        """Simplify guards of an existing head normal form and drop dead summands."""
        t = self.at(pos)
        if isinstance(t, Alt):
            self.tidy(pos + (0,))
            self.tidy(pos + (1,))
            return self.prune(pos)
        if isinstance(t, Guard):
            return self.simplify_guard(pos)
        return t

    # -- operators over head normal forms --------------------------------

    def push(self, pos):
        """``phi -> h`` with ``h`` in head normal form."""
        t = self.at(pos)
        phi, h = t.cond, t.body
        if isinstance(h, Delta):
            return self.step(pos, Ax.GC3, DELTA)
        if isinstance(h, Alt):
            self.step(pos, Ax.GC4, Alt(Guard(phi, h.left), Guard(phi, h.right)))
            self.push(pos + (0,))
            self.push(pos + (1,))
            return self.prune(pos)
        if isinstance(h, Guard):
            self.step(pos, Ax.GC6, Guard(And(phi, h.cond), h.body))
            return self.simplify_guard(pos)
        return self.simplify_guard(pos)

    def distribute(self, pos):
        """``h . y`` with ``h`` in head normal form."""
        t = self.at(pos)
        h, y = t.left, t.right
        if isinstance(h, Delta):
            return self.step(pos, Ax.A7, DELTA)
        if isinstance(h, Alt):
            self.step(pos, Ax.A4, Alt(Seq(h.left, y), Seq(h.right, y)))
            self.distribute(pos + (0,))
            self.distribute(pos + (1,))
            return self.prune(pos)
        # h = phi -> body
        phi, body = h.cond, h.body
        self.step(pos, Ax.GC5, Guard(phi, Seq(body, y)))
        if isinstance(body, Eps):
            self.step(pos + (1,), Ax.A9, y)
            self.norm(pos + (1,))
            return self.push(pos)
        self.step(pos + (1,), Ax.A5, Seq(body.left, Seq(body.right, y)))
        return self.at(pos)

    def iterate(self, pos):
        self.norm(pos + (0,))
        t = self.at(pos)
        body = t.left
        parts = summands(body)
        kept = [s for s in parts if not (isinstance(s, Guard) and isinstance(s.body, Eps))]
        if len(kept) != len(parts):
            self.step(pos, Ax.ITER_SKIP, Iter(alt(*kept), t.right))
            t = self.at(pos)
        self.step(pos, Ax.BKS1, Alt(Seq(t.left, t), t.right))
        self.distribute(pos + (0,))
        self.norm(pos + (1,))
        return self.prune(pos)

    def lmerge(self, pos):
        t = self.at(pos)
        h, y = t.left, t.right
        if isinstance(h, Delta):
            self.step(pos + (0,), Ax.A8, Seq(DELTA, EPS))
            self.step(pos, Ax.CM3, Seq(DELTA, Par(EPS, y)))
            return self.step(pos, Ax.A7, DELTA)
        if isinstance(h, Alt):
            self.step(pos, Ax.CM4, Alt(LMerge(h.left, y), LMerge(h.right, y)))
            self.lmerge(pos + (0,))
            self.lmerge(pos + (1,))
            return self.prune(pos)
        phi, body = h.cond, h.body
        self.step(pos, Ax.GC8, Guard(phi, LMerge(body, y)))
        inner = pos + (1,)
        if isinstance(body, Eps):
            self.step(inner, Ax.CM2T, DELTA)
            return self.step(pos, Ax.GC3, DELTA)
        a, rest = body.left, body.right
        ax = Ax.CM3A if isinstance(a, Assign) else (Ax.CM3D if a.args else Ax.CM3)
        self.step(inner, ax, Seq(a, Par(rest, y)))
        return self.at(pos)

    def cmerge(self, pos):
        t = self.at(pos)
        h, k = t.left, t.right
        if isinstance(h, Alt):
            self.step(pos, Ax.CM8, Alt(CMerge(h.left, k), CMerge(h.right, k)))
            self.cmerge(pos + (0,))
            self.cmerge(pos + (1,))
            return self.prune(pos)
        if isinstance(k, Alt):
            self.step(pos, Ax.CM9, Alt(CMerge(h, k.left), CMerge(h, k.right)))
            self.cmerge(pos + (0,))
            self.cmerge(pos + (1,))
            return self.prune(pos)
        if isinstance(h, Guard):
            self.step(pos, Ax.GC9, Guard(h.cond, CMerge(h.body, k)))
            self.cmerge(pos + (1,))
            return self.push(pos)
        if isinstance(k, Guard):
            self.step(pos, Ax.GC10, Guard(k.cond, CMerge(h, k.body)))
            self.cmerge(pos + (1,))
            return self.push(pos)
        return self.cmerge_atoms(pos)

    def cmerge_atoms(self, pos):
        """``l | r`` where each side is ``delta``, ``eps`` or ``alpha . p``."""
        t = self.at(pos)
        l, r = t.left, t.right
        if isinstance(l, Eps):
            return self.step(pos, Ax.CM5T, DELTA)
        if isinstance(r, Eps):
            return self.step(pos, Ax.CM6T, DELTA)
        if isinstance(l, Seq) and isinstance(l.left, Assign):
            return self.step(pos, Ax.CM5A, DELTA)
        if isinstance(r, Seq) and isinstance(r.left, Assign):
            return self.step(pos, Ax.CM6A, DELTA)
        if isinstance(l, Delta):
            self.step(pos + (0,), Ax.A8, Seq(DELTA, EPS))
            l = self.at(pos + (0,))
        if isinstance(r, Delta):
            self.step(pos + (1,), Ax.A8, Seq(DELTA, EPS))
            r = self.at(pos + (1,))
        a, x, b, y = l.left, l.right, r.left, r.right
        pa = isinstance(a, Act) and bool(a.args)
        pb = isinstance(b, Act) and bool(b.args)
        if pa and pb:
            g = self.env.gamma(a.name, b.name)
            if g is None or len(a.args) != len(b.args):
                return self.step(pos, Ax.CM7Db, DELTA)
            eqs = conj(*(Eq(e, f) for e, f in zip(a.args, b.args)))
            self.step(pos, Ax.CM7Da, Guard(eqs, Seq(Act(g, a.args), Par(x, y))))
            return self.simplify_guard(pos)
        if pa:
            return self.step(pos, Ax.CM7Dc, DELTA)
        if pb:
            return self.step(pos, Ax.CM7Dd, DELTA)
        g = None
        if isinstance(a, Act) and isinstance(b, Act):
            g = self.env.gamma(a.name, b.name)
        c = DELTA if g is None else Act(g)
        self.step(pos, Ax.CM7, Seq(c, Par(x, y)))
        if g is None:
            return self.step(pos, Ax.A7, DELTA)
        return self.step(pos, Ax.GC1, Guard(TOP, Seq(c, Par(x, y))))

    def encap(self, pos):
        t = self.at(pos)
        hs, h = t.blocked, t.body
        if isinstance(h, Delta):
            return self.step(pos, Ax.D1, DELTA)
        if isinstance(h, Alt):
            self.step(pos, Ax.D3, Alt(Encap(hs, h.left), Encap(hs, h.right)))
            self.encap(pos + (0,))
            self.encap(pos + (1,))
            return self.prune(pos)
        phi, body = h.cond, h.body
        self.step(pos, Ax.GC11, Guard(phi, Encap(hs, body)))
        inner = pos + (1,)
        if isinstance(body, Eps):
            self.step(inner, Ax.D0, EPS)
            return self.at(pos)
        a, rest = body.left, body.right
        self.step(inner, Ax.D4, Seq(Encap(hs, a), Encap(hs, rest)))
        apos = inner + (0,)
        if isinstance(a, Assign):
            self.step(apos, Ax.D1A, a)
        elif a.name in hs:
            self.step(apos, Ax.D2D if a.args else Ax.D2, DELTA)
            self.step(inner, Ax.A7, DELTA)
            return self.step(pos, Ax.GC3, DELTA)
        else:
            self.step(apos, Ax.D1D if a.args else Ax.D1, a)
        return self.at(pos)

    def evaluate(self, pos):
        t = self.at(pos)
        sigma, h = t.sigma, t.body
        be = self.env.backend
        if isinstance(h, Delta):
            self.step(pos + (0,), Ax.A8, Seq(DELTA, EPS))
            self.step(pos, Ax.V1, Seq(DELTA, Eval(sigma, EPS)))
            return self.step(pos, Ax.A7, DELTA)
        if isinstance(h, Alt):
            self.step(pos, Ax.V4, Alt(Eval(sigma, h.left), Eval(sigma, h.right)))
            self.evaluate(pos + (0,))
            self.evaluate(pos + (1,))
            return self.prune(pos)
        phi, body = h.cond, h.body
        self.step(pos, Ax.V5, Guard(eval_cond(sigma, phi, be), Eval(sigma, body)))
        inner = pos + (1,)
        if isinstance(body, Eps):
            self.step(inner, Ax.V0, EPS)
        else:
            a, rest = body.left, body.right
            if isinstance(a, Assign):
                val = eval_data(sigma, a.expr, be)
                try:
                    s2 = update(sigma, a.var, val)
                except EvaluationError:
                    raise EvaluationError(
                        f"evaluation of {a.var} := ... leaves an unvalued variable"
                    ) from None
                self.step(inner, Ax.V3, Seq(Assign(a.var, val), Eval(s2, rest)))
            elif a.args:
                args = tuple(eval_data(sigma, e, be) for e in a.args)
                self.step(inner, Ax.V2, Seq(Act(a.name, args), Eval(sigma, rest)))
            else:
                self.step(inner, Ax.V1, Seq(a, Eval(sigma, rest)))
        return self.simplify_guard(pos)


def has_assignment(p) -> bool:
    if isinstance(p, Assign):
        return True
    return any(has_assignment(c) for c in children(p) if not _is_cond_or_data(c))


def _is_cond_or_data(t) -> bool:
    return not isinstance(
        t, (Delta, Eps, Act, Assign, Alt, Seq, Iter, Par, LMerge, CMerge, Encap, Guard, Eval, Hole)
    )


def _trim(phi):
    """Drop ``true`` conjuncts (a syntactic instance of IMP2)."""
    if isinstance(phi, And):
        l, r = _trim(phi.left), _trim(phi.right)
        if isinstance(l, Top):
            return r
        if isinstance(r, Top):
            return l
        return And(l, r)
    return phi


def hnf(p, env, memo=None):
    """Head normal form of ``p`` and the trace deriving it."""
    d = Deriver(p, env, memo)
    d.norm(())
    return d.term, d.trace()


def hnf_summands(h):
    """Split a head normal form into ``(cond, action_or_None, continuation)`` triples."""
    out = []
    for s in summands(h):
        if isinstance(s, Delta):
            continue
        if isinstance(s.body, Eps):
            out.append((s.cond, None, None))
        else:
            out.append((s.cond, s.body.left, s.body.right))
    return out
