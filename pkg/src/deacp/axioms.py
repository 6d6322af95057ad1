"""Axiom schemas, single-step validation and rewrite traces.

Every schema is an equation between patterns built from ordinary term nodes
and metavariables.  A step ``before ==> after`` is valid for an axiom when
both sides match the schema (in either orientation) under one binding and
the side condition holds.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from enum import Enum

from .data import eval_cond, eval_data, fold_data, update
from .terms import (
    DELTA,
    EPS,
    TOP,
    BOT,
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
    Iter,
    LMerge,
    Num,
    Or,
    Par,
    Seq,
    conj,
    alt,
    replace_at,
    subterm,
    summands,
)


class AxiomId(str, Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"
    A6 = "A6"
    A7 = "A7"
    A8 = "A8"
    A9 = "A9"
    BKS1 = "BKS1"
    RSP = "RSP*"
    CM1T = "CM1T"
    CM2T = "CM2T"
    CM3 = "CM3"
    CM4 = "CM4"
    CM5T = "CM5T"
    CM6T = "CM6T"
    CM7 = "CM7"
    CM8 = "CM8"
    CM9 = "CM9"
    D0 = "D0"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    IMP1 = "IMP1"
    IMP2 = "IMP2"
    GC1 = "GC1"
    GC2 = "GC2"
    GC3 = "GC3"
    GC4 = "GC4"
    GC5 = "GC5"
    GC6 = "GC6"
    GC7 = "GC7"
    GC8 = "GC8"
    GC9 = "GC9"
    GC10 = "GC10"
    GC11 = "GC11"
    V0 = "V0"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"
    V5 = "V5"
    CM3D = "CM3D"
    CM7Da = "CM7Da"
    CM7Db = "CM7Db"
    CM7Dc = "CM7Dc"
    CM7Dd = "CM7Dd"
    D1D = "D1D"
    D2D = "D2D"
    CM3A = "CM3A"
    CM5A = "CM5A"
    CM6A = "CM6A"
    D1A = "D1A"
    BKS2 = "BKS2"
    BKS3 = "BKS3"
    BKS4 = "BKS4"
    BKS5 = "BKS5"
    # Derived: drop the guarded-eps summands of an iteration body.
    # Follows from BKS1, RSP*, GC7, IMP2 and A3.
    ITER_SKIP = "ITER-SKIP"
    # Expansion of a merge of two head normal forms whose last summand keeps
    # only the joint termination conditions.  Used instead of CM1T when an
    # assignment occurs, since encapsulation lets assignments through.
    CM1E = "CM1E"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class M:
    """Metavariable.  ``kind`` restricts what it may stand for."""

    name: str
    kind: str = "any"


def _kind_ok(kind, t) -> bool:
    if kind == "any":
        return True
    if kind == "const":  # a constant other than eps: delta or a basic action
        return isinstance(t, Delta) or (isinstance(t, Act) and not t.args)
    if kind == "basic":
        return isinstance(t, Act) and not t.args
    if kind == "pact":
        return isinstance(t, Act) and bool(t.args)
    if kind == "assign":
        return isinstance(t, Assign)
    raise ValueError(kind)


def match(pat, t, theta: dict) -> bool:
    if isinstance(pat, M):
        if not _kind_ok(pat.kind, t):
            return False
        if pat.name in theta:
            return theta[pat.name] == t
        theta[pat.name] = t
        return True
    if type(pat) is not type(t):
        return False
    if dataclasses.is_dataclass(pat):
        for f in dataclasses.fields(pat):
            if not f.compare:
                continue
            if not match(getattr(pat, f.name), getattr(t, f.name), theta):
                return False
        return True
    if isinstance(pat, tuple):
        return len(pat) == len(t) and all(match(a, b, theta) for a, b in zip(pat, t))
    return pat == t


X, Y, Z = M("x"), M("y"), M("z")
PHI, PSI = M("phi"), M("psi")
H = M("H")
S = M("sigma")
A, B, C = M("a", "const"), M("b", "const"), M("c", "const")
PA, PB, PC = M("pa", "pact"), M("pb", "pact"), M("pc", "pact")
ASG = M("asg", "assign")


@dataclass(frozen=True)
class Schema:
    lhs: object
    rhs: object
    side: object = None  # callable(theta, env) -> bool


def _gamma(env, a, b):
    if isinstance(a, Delta) or isinstance(b, Delta):
        return None
    return env.gamma(a.name, b.name)


def _cm7(th, env):
    g = _gamma(env, th["a"], th["b"])
    return th["c"] == (DELTA if g is None else Act(g))


def _cm7da(th, env):
    pa, pb, pc = th["pa"], th["pb"], th["pc"]
    g = env.gamma(pa.name, pb.name)
    if g is None or len(pa.args) != len(pb.args):
        return False
    eqs = conj(*(Eq(e, f) for e, f in zip(pa.args, pb.args)))
    return pc == Act(g, pa.args) and th["phi"] == eqs


def _cm7db(th, env):
    pa, pb = th["pa"], th["pb"]
    return env.gamma(pa.name, pb.name) is None or len(pa.args) != len(pb.args)


def _not_in_h(th, env):
    a = th["a"]
    return isinstance(a, Delta) or a.name not in th["H"]


def _in_h(th, env):
    a = th["a"]
    return isinstance(a, Act) and a.name in th["H"]


def _cm1t(th, env):
    return th["H"] == env.actions


def _data_eq(env, e, f):
    return env.backend.models_eq(e, f).valid


def _v2(th, env):
    s, pa, pb = th["sigma"], th["pa"], th["pb"]
    return pa.name == pb.name and len(pa.args) == len(pb.args) and all(
        _data_eq(env, eval_data(s, e, env.backend), f) for e, f in zip(pa.args, pb.args)
    )


def _v3(th, env):
    s, a1, a2, s2 = th["sigma"], th["asg"], th["asg2"], th["sigma2"]
    if a1.var != a2.var:
        return False
    val = eval_data(s, a1.expr, env.backend)
    if not _data_eq(env, val, a2.expr):
        return False
    try:
        return s2 == update(s, a1.var, fold_data(env.backend, a2.expr))
    except ValueError:
        return False


def _v5(th, env):
    return env.backend.models_iff(eval_cond(th["sigma"], th["phi"], env.backend), th["psi"]).valid


ASG2 = M("asg2", "assign")
PB2 = M("pb", "pact")
S2 = M("sigma2")

SCHEMAS = {
    AxiomId.A1: Schema(Alt(X, Y), Alt(Y, X)),
    AxiomId.A2: Schema(Alt(Alt(X, Y), Z), Alt(X, Alt(Y, Z))),
    AxiomId.A3: Schema(Alt(X, X), X),
    AxiomId.A4: Schema(Seq(Alt(X, Y), Z), Alt(Seq(X, Z), Seq(Y, Z))),
    AxiomId.A5: Schema(Seq(Seq(X, Y), Z), Seq(X, Seq(Y, Z))),
    AxiomId.A6: Schema(Alt(X, DELTA), X),
    AxiomId.A7: Schema(Seq(DELTA, X), DELTA),
    AxiomId.A8: Schema(Seq(X, EPS), X),
    AxiomId.A9: Schema(Seq(EPS, X), X),
    AxiomId.BKS1: Schema(Iter(X, Y), Alt(Seq(X, Iter(X, Y)), Y)),
    AxiomId.CM1T: Schema(
        Par(X, Y),
        Alt(LMerge(X, Y), Alt(LMerge(Y, X), Alt(CMerge(X, Y), Seq(Encap(H, X), Encap(H, Y))))),
        _cm1t,
    ),
    AxiomId.CM2T: Schema(LMerge(EPS, X), DELTA),
    AxiomId.CM3: Schema(LMerge(Seq(A, X), Y), Seq(A, Par(X, Y))),
    AxiomId.CM4: Schema(LMerge(Alt(X, Y), Z), Alt(LMerge(X, Z), LMerge(Y, Z))),
    AxiomId.CM5T: Schema(CMerge(EPS, X), DELTA),
    AxiomId.CM6T: Schema(CMerge(X, EPS), DELTA),
    AxiomId.CM7: Schema(CMerge(Seq(A, X), Seq(B, Y)), Seq(M("c"), Par(X, Y)), _cm7),
    AxiomId.CM8: Schema(CMerge(Alt(X, Y), Z), Alt(CMerge(X, Z), CMerge(Y, Z))),
    AxiomId.CM9: Schema(CMerge(X, Alt(Y, Z)), Alt(CMerge(X, Y), CMerge(X, Z))),
    AxiomId.D0: Schema(Encap(H, EPS), EPS),
    AxiomId.D1: Schema(Encap(H, A), A, _not_in_h),
    AxiomId.D2: Schema(Encap(H, A), DELTA, _in_h),
    AxiomId.D3: Schema(Encap(H, Alt(X, Y)), Alt(Encap(H, X), Encap(H, Y))),
    AxiomId.D4: Schema(Encap(H, Seq(X, Y)), Seq(Encap(H, X), Encap(H, Y))),
    AxiomId.GC1: Schema(Guard(TOP, X), X),
    AxiomId.GC2: Schema(Guard(BOT, X), DELTA),
    AxiomId.GC3: Schema(Guard(PHI, DELTA), DELTA),
    AxiomId.GC4: Schema(Guard(PHI, Alt(X, Y)), Alt(Guard(PHI, X), Guard(PHI, Y))),
    AxiomId.GC5: Schema(Guard(PHI, Seq(X, Y)), Seq(Guard(PHI, X), Y)),
    AxiomId.GC6: Schema(Guard(PHI, Guard(PSI, X)), Guard(And(PHI, PSI), X)),
    AxiomId.GC7: Schema(Guard(Or(PHI, PSI), X), Alt(Guard(PHI, X), Guard(PSI, X))),
    AxiomId.GC8: Schema(LMerge(Guard(PHI, X), Y), Guard(PHI, LMerge(X, Y))),
    AxiomId.GC9: Schema(CMerge(Guard(PHI, X), Y), Guard(PHI, CMerge(X, Y))),
    AxiomId.GC10: Schema(CMerge(X, Guard(PHI, Y)), Guard(PHI, CMerge(X, Y))),
    AxiomId.GC11: Schema(Encap(H, Guard(PHI, X)), Guard(PHI, Encap(H, X))),
    AxiomId.V0: Schema(Eval(S, EPS), EPS),
    AxiomId.V1: Schema(Eval(S, Seq(A, X)), Seq(A, Eval(S, X))),
    AxiomId.V2: Schema(Eval(S, Seq(PA, X)), Seq(PB2, Eval(S, X)), _v2),
    AxiomId.V3: Schema(Eval(S, Seq(ASG, X)), Seq(ASG2, Eval(S2, X)), _v3),
    AxiomId.V4: Schema(Eval(S, Alt(X, Y)), Alt(Eval(S, X), Eval(S, Y))),
    AxiomId.V5: Schema(Eval(S, Guard(PHI, X)), Guard(PSI, Eval(S, X)), _v5),
    AxiomId.CM3D: Schema(LMerge(Seq(PA, X), Y), Seq(PA, Par(X, Y))),
    AxiomId.CM7Da: Schema(
        CMerge(Seq(PA, X), Seq(PB, Y)), Guard(PHI, Seq(PC, Par(X, Y))), _cm7da
    ),
    AxiomId.CM7Db: Schema(CMerge(Seq(PA, X), Seq(PB, Y)), DELTA, _cm7db),
    AxiomId.CM7Dc: Schema(CMerge(Seq(PA, X), Seq(B, Y)), DELTA),
    AxiomId.CM7Dd: Schema(CMerge(Seq(A, X), Seq(PB, Y)), DELTA),
    AxiomId.D1D: Schema(Encap(H, PA), PA, lambda th, env: th["pa"].name not in th["H"]),
    AxiomId.D2D: Schema(Encap(H, PA), DELTA, lambda th, env: th["pa"].name in th["H"]),
    AxiomId.CM3A: Schema(LMerge(Seq(ASG, X), Y), Seq(ASG, Par(X, Y))),
    AxiomId.CM5A: Schema(CMerge(Seq(ASG, X), Y), DELTA),
    AxiomId.CM6A: Schema(CMerge(X, Seq(ASG, Y)), DELTA),
    AxiomId.D1A: Schema(Encap(H, ASG), ASG),
    AxiomId.BKS2: Schema(Iter(X, Seq(Y, Z)), Seq(Iter(X, Y), Z)),
    AxiomId.BKS3: Schema(Iter(X, Alt(Seq(Y, Iter(Alt(X, Y), Z)), Z)), Iter(Alt(X, Y), Z)),
    AxiomId.BKS4: Schema(Encap(H, Iter(X, Y)), Iter(Encap(H, X), Encap(H, Y))),
    AxiomId.BKS5: Schema(Iter(EPS, X), X),
}


def _is_guarded_eps(t) -> bool:
    return isinstance(t, Guard) and isinstance(t.body, Eps)


def _iter_skip(before, after) -> bool:
    if not (isinstance(before, Iter) and isinstance(after, Iter)):
        return False
    if before.right != after.right:
        return False
    kept = [s for s in summands(before.left) if not _is_guarded_eps(s)]
    return after.left == alt(*kept)


def eps_guards(h) -> list:
    return [s.cond for s in summands(h) if isinstance(s, Guard) and isinstance(s.body, Eps)]


def cm1e_rhs(x, y):
    from .analysis import is_hnf

    if not (is_hnf(x) and is_hnf(y)):
        return None
    term = alt(*(Guard(And(f, g), EPS) for f in eps_guards(x) for g in eps_guards(y)))
    return Alt(LMerge(x, y), Alt(LMerge(y, x), Alt(CMerge(x, y), term)))


def _cm1e(before, after) -> bool:
    return isinstance(before, Par) and cm1e_rhs(before.left, before.right) == after


def _is_data(t) -> bool:
    from .terms import Flex, LVar, Op

    return isinstance(t, (Num, Flex, LVar, Op))


def _is_cond(t) -> bool:
    from .terms import Bot, CVar, Exists, Forall, Geq, Imp, Not, Top

    return isinstance(t, (Top, Bot, Eq, Geq, Not, And, Or, Imp, Forall, Exists, CVar))


def check_step(axiom, before, after, env) -> bool:
    """True iff ``before = after`` is an instance of ``axiom`` (either direction)."""
    ax = AxiomId(axiom)
    if ax is AxiomId.IMP1:
        return _is_data(before) and _is_data(after) and env.backend.models_eq(before, after).valid
    if ax is AxiomId.IMP2:
        return _is_cond(before) and _is_cond(after) and env.backend.models_iff(before, after).valid
    if ax is AxiomId.CM1E:
        return _cm1e(before, after) or _cm1e(after, before)
    if ax is AxiomId.ITER_SKIP:
        return _iter_skip(before, after) or _iter_skip(after, before)
    if ax is AxiomId.RSP:
        return False  # a conditional rule, never a rewrite step
    sch = SCHEMAS[ax]
    for l, r in ((before, after), (after, before)):
        th = {}
        if match(sch.lhs, l, th) and match(sch.rhs, r, th):
            if sch.side is None or sch.side(th, env):
                return True
    return False


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class Step:
    pos: tuple
    axiom: AxiomId
    before: object
    after: object


@dataclass(frozen=True)
class RewriteTrace:
    start: object
    steps: tuple = ()

    @property
    def result(self):
        return replay(self.start, self.steps)

    def __len__(self):
        return len(self.steps)


class TraceError(ValueError):
    def __init__(self, index, message):
        super().__init__(f"step {index}: {message}")
        self.index = index


def replay(start, steps):
    t = start
    for n, st in enumerate(steps, 1):
        try:
            cur = subterm(t, st.pos)
        except (IndexError, TypeError):
            raise TraceError(n, f"no subterm at position {show_pos(st.pos)}") from None
        if cur != st.before:
            raise TraceError(n, "recorded left-hand side does not match the term")
        t = replace_at(t, st.pos, st.after)
    return t


def check_trace(trace: RewriteTrace, env, result=None):
    """Replay the trace and validate each step.  Returns the list of errors."""
    errors = []
    try:
        end = trace.result
    except TraceError as e:
        return [str(e)]
    for n, st in enumerate(trace.steps, 1):
        if not check_step(st.axiom, st.before, st.after, env):
            errors.append(f"step {n}: not an instance of {st.axiom}")
    if result is not None and end != result:
        errors.append("replay does not reproduce the claimed result")
    return errors


def show_pos(pos) -> str:
    return ".".join(map(str, pos)) if pos else "e"


def parse_pos(s: str) -> tuple:
    return () if s == "e" else tuple(int(x) for x in s.split("."))


def format_trace(trace: RewriteTrace) -> str:
    from .syntax import show

    lines = [f"start {show(trace.start)}"]
    for n, st in enumerate(trace.steps, 1):
        lines.append(f"step {n} {st.axiom} @{show_pos(st.pos)} : {show(st.before)} ==> {show(st.after)}")
    return "\n".join(lines) + "\n"


_STEP = re.compile(r"step (\d+) (\S+) @(\S+) : (.*) ==> (.*)$")


def parse_trace(text: str, **kw) -> RewriteTrace:
    """Inverse of :func:`format_trace`.  Keyword arguments go to the parser."""
    from .syntax import parse_cond, parse_data, parse_proc

    def parse_side(ax, s):
        if ax is AxiomId.IMP1:
            return parse_data(s, logical=kw.get("logical", ()))
        if ax is AxiomId.IMP2:
            return parse_cond(s, logical=kw.get("logical", ()))
        return parse_proc(s, **kw)

    start, steps = None, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("start "):
            start = parse_proc(line[6:], **kw)
            continue
        m = _STEP.match(line)
        if not m:
            raise ValueError(f"bad trace line: {line}")
        _, ax, pos, before, after = m.groups()
        ax = AxiomId(ax)
        steps.append(Step(parse_pos(pos), ax, parse_side(ax, before), parse_side(ax, after)))
    if start is None:
        raise ValueError("trace has no start line")
    return RewriteTrace(start, tuple(steps))
