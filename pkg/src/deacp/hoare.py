"""Asserted processes and their proof system.

A proof is a tree of :class:`ProofNode`; :func:`check_proof` re-verifies every
node and reports problems by node address (``root``, ``root.0``, ...).
:func:`auto_prove_seq` searches backwards for proofs of sequential processes.
Proof scripts are an indented text rendering of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import erase_aux, fass, fvar_cond, fvar_proc, in_hcond, in_hproc, is_auxiliary, subst_flex
from .data import fold_cond
from .terms import (
    TOP,
    Act,
    Alt,
    And,
    Assign,
    Delta,
    Encap,
    Eps,
    Guard,
    Imp,
    Iter,
    Par,
    Seq,
    Top,
)

RULES = (
    "inaction",
    "empty",
    "basic-action",
    "data-parameterized",
    "assignment",
    "alt",
    "seq",
    "iter",
    "gc",
    "par",
    "encap",
    "aux-vars",
    "consequence",
)

SCHEMA_MISMATCH = "schema-mismatch"
MIDPOINT_MISMATCH = "midpoint-mismatch"
NOT_DISJOINT = "not-disjoint"
NOT_AUXILIARY = "not-auxiliary"
ORACLE_FAILED = "oracle-failed"
ORACLE_UNKNOWN = "oracle-unknown"


class HoareError(ValueError):
    pass


@dataclass(frozen=True)
class AssertedProcess:
    pre: object
    proc: object
    post: object

    def __post_init__(self):
        if not in_hproc(self.proc):
            raise HoareError("the process of an asserted process may not use eval, _| or |")
        if not (in_hcond(self.pre) and in_hcond(self.post)):
            raise HoareError("assertions may not contain condition variables")

    @property
    def fvar(self) -> frozenset:
        return fvar_cond(self.pre) | fvar_proc(self.proc) | fvar_cond(self.post)

    def __str__(self):
        from .syntax import show

        return f"{{{show(self.pre)}}} {show(self.proc)} {{{show(self.post)}}}"


@dataclass(frozen=True)
class ProofNode:
    rule: str
    concl: AssertedProcess
    premises: tuple = ()
    aux: frozenset | None = None
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.rule not in RULES:
            raise HoareError(f"unknown rule {self.rule!r}")

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


@dataclass(frozen=True)
class ProofError:
    node: str
    kind: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f" (line {self.line})" if self.line else ""
        return f"{self.node}{where}: {self.kind}: {self.message}"


def _norm(phi, backend):
    return fold_cond(backend, phi)


def check_proof(node: ProofNode, env, addr="root") -> list:
    """All rule violations in the tree; the empty list means the proof is valid."""
    errs = []
    _check(node, env, addr, errs)
    return errs


def _check(n, env, addr, errs):
    def err(kind, msg):
        errs.append(ProofError(addr, kind, msg, n.line))

    c, prem = n.concl, n.premises
    p = c.proc
    arity = {"inaction": 0, "empty": 0, "basic-action": 0, "data-parameterized": 0,
             "assignment": 0, "alt": 2, "seq": 2, "iter": 2, "gc": 1, "par": 2,
             "encap": 1, "aux-vars": 1, "consequence": 1}[n.rule]
    if len(prem) != arity:
        err(SCHEMA_MISMATCH, f"{n.rule} takes {arity} premises, got {len(prem)}")
        return
    for k, sub in enumerate(prem):
        _check(sub, env, f"{addr}.{k}", errs)
    P = [s.concl for s in prem]
    r = n.rule
    if r == "inaction":
        if not isinstance(p, Delta):
            err(SCHEMA_MISMATCH, "inaction axiom needs the process delta")
    elif r == "empty":
        if not isinstance(p, Eps):
            err(SCHEMA_MISMATCH, "empty process axiom needs the process eps")
        elif c.pre != c.post:
            err(SCHEMA_MISMATCH, "empty process axiom needs equal pre- and postcondition")
    elif r in ("basic-action", "data-parameterized"):
        if not isinstance(p, Act) or bool(p.args) != (r == "data-parameterized"):
            kind = "a parameterized" if r == "data-parameterized" else "a basic"
            err(SCHEMA_MISMATCH, f"{r} axiom needs {kind} action")
        elif c.pre != c.post:
            err(SCHEMA_MISMATCH, f"{r} axiom needs equal pre- and postcondition")
    elif r == "assignment":
        if not isinstance(p, Assign):
            err(SCHEMA_MISMATCH, "assignment axiom needs an assignment")
        else:
            want = subst_flex(c.post, p.var, p.expr)
            if _norm(want, env.backend) != _norm(c.pre, env.backend):
                from .syntax import show

                err(SCHEMA_MISMATCH, f"precondition should be {show(want)}")
    elif r in ("alt", "seq", "iter", "par"):
        cls = {"alt": Alt, "seq": Seq, "iter": Iter, "par": Par}[r]
        if not isinstance(p, cls):
            err(SCHEMA_MISMATCH, f"{r} rule needs a {cls.__name__} process")
            return
        if P[0].proc != p.left or P[1].proc != p.right:
            err(SCHEMA_MISMATCH, "premise processes do not match the operands")
        if r == "alt":
            if not (P[0].pre == P[1].pre == c.pre and P[0].post == P[1].post == c.post):
                err(SCHEMA_MISMATCH, "alt rule needs both premises with the conclusion's conditions")
        elif r == "seq":
            if P[0].pre != c.pre or P[1].post != c.post:
                err(SCHEMA_MISMATCH, "seq rule premises do not match the conclusion")
            if P[0].post != P[1].pre:
                err(MIDPOINT_MISMATCH, "postcondition of the first premise differs from the precondition of the second")
        elif r == "iter":
            if not (P[0].pre == P[0].post == c.pre == P[1].pre):
                err(SCHEMA_MISMATCH, "iter rule needs an invariant shared by the body and the conclusion's precondition")
            if P[1].post != c.post:
                err(SCHEMA_MISMATCH, "iter rule: the exit premise must end in the conclusion's postcondition")
        else:
            if c.pre != And(P[0].pre, P[1].pre) or c.post != And(P[0].post, P[1].post):
                err(SCHEMA_MISMATCH, "par rule conjoins the premises' conditions")
            bad = _disjointness(P[0], P[1])
            if bad:
                err(NOT_DISJOINT, "; ".join(bad))
    elif r == "gc":
        if not isinstance(p, Guard):
            err(SCHEMA_MISMATCH, "gc rule needs a guarded command")
        elif P[0].proc != p.body or P[0].pre != And(c.pre, p.cond) or P[0].post != c.post:
            err(SCHEMA_MISMATCH, "gc rule moves the guard into the precondition")
    elif r == "encap":
        if not isinstance(p, Encap):
            err(SCHEMA_MISMATCH, "encap rule needs an encapsulation")
        elif P[0].proc != p.body or P[0].pre != c.pre or P[0].post != c.post:
            err(SCHEMA_MISMATCH, "encap rule passes conditions through")
    elif r == "aux-vars":
        A = frozenset(n.aux or ())
        q = P[0].proc
        if not is_auxiliary(q, A):
            err(NOT_AUXILIARY, f"{sorted(A)} is not a set of auxiliary variables of the premise")
        elif fvar_cond(c.post) & A:
            err(NOT_AUXILIARY, f"postcondition mentions {sorted(fvar_cond(c.post) & A)}")
        elif erase_aux(q, A) != p:
            err(SCHEMA_MISMATCH, "conclusion is not the premise with the auxiliary assignments erased")
        if P[0].pre != c.pre or P[0].post != c.post:
            err(SCHEMA_MISMATCH, "aux-vars rule keeps the conditions")
    elif r == "consequence":
        if P[0].proc != p:
            err(SCHEMA_MISMATCH, "consequence rule keeps the process")
        for a, b, what in ((c.pre, P[0].pre, "precondition"), (P[0].post, c.post, "postcondition")):
            v = env.backend.models_iff(Imp(a, b), TOP)
            if v.unknown:
                err(ORACLE_UNKNOWN, f"cannot decide the {what} implication")
            elif not v.valid:
                err(ORACLE_FAILED, f"{what} implication fails, e.g. at {v.witness}")


def _disjointness(a: AssertedProcess, b: AssertedProcess) -> list:
    out = []
    fa, fb = fass(a.proc), fass(b.proc)
    checks = (
        ("FAss(p) & FVar(q)", fa & fvar_proc(b.proc)),
        ("FAss(p) & FVar(pre')", fa & fvar_cond(b.pre)),
        ("FAss(p) & FVar(post')", fa & fvar_cond(b.post)),
        ("FAss(q) & FVar(p)", fb & fvar_proc(a.proc)),
        ("FAss(q) & FVar(pre)", fb & fvar_cond(a.pre)),
        ("FAss(q) & FVar(post)", fb & fvar_cond(a.post)),
    )
    for name, s in checks:
        if s:
            out.append(f"{name} = {{{', '.join(sorted(s))}}}")
    return out


# ---------------------------------------------------------------- proof search


class ProofSearchFailed(RuntimeError):
    def __init__(self, goal, message):
        super().__init__(f"{message}: {goal}")
        self.goal = goal


def _wp(p, post, inv):
    """Weakest liberal precondition for the loop-free fragment; loops use ``inv``."""
    if isinstance(p, Delta):
        return TOP
    if isinstance(p, (Eps, Act)):
        return post
    if isinstance(p, Assign):
        return subst_flex(post, p.var, p.expr)
    if isinstance(p, Alt):
        return And(_wp(p.left, post, inv), _wp(p.right, post, inv))
    if isinstance(p, Seq):
        return _wp(p.left, _wp(p.right, post, inv), inv)
    if isinstance(p, Guard):
        return Imp(p.cond, _wp(p.body, post, inv))
    if isinstance(p, Encap):
        return _wp(p.body, post, inv)
    if isinstance(p, Iter):
        if p in inv:
            return inv[p]
        return _wp(p.right, post, inv)
    raise ProofSearchFailed(AssertedProcess(TOP, p, post), "no weakest precondition for this operator")


class _Search:
    def __init__(self, env, budget, inv):
        self.env = env
        self.budget = budget
        self.used = 0
        self.inv = dict(inv or {})

    def implies(self, a, b):
        if a == b or isinstance(b, Top):
            return True
        v = self.env.backend.models_iff(Imp(a, b), TOP)
        return v.valid

    def weaken(self, pre, node, post=None):
        """Wrap ``node`` in a consequence step so it concludes ``{pre} _ {post}``."""
        c = node.concl
        post = c.post if post is None else post
        if c.pre == pre and c.post == post:
            return node
        if not self.implies(pre, c.pre) or not self.implies(c.post, post):
            raise ProofSearchFailed(AssertedProcess(pre, c.proc, post), "precondition too weak")
        return ProofNode("consequence", AssertedProcess(pre, c.proc, post), (node,))

    def prove(self, pre, p, post):
        self.used += 1
        if self.used > self.budget:
            raise ProofSearchFailed(AssertedProcess(pre, p, post), "budget exhausted")
        goal = AssertedProcess(pre, p, post)
        if isinstance(p, Delta):
            return ProofNode("inaction", goal)
        if isinstance(p, Eps):
            return self.weaken(pre, ProofNode("empty", AssertedProcess(post, p, post)))
        if isinstance(p, Act):
            rule = "data-parameterized" if p.args else "basic-action"
            return self.weaken(pre, ProofNode(rule, AssertedProcess(post, p, post)))
        if isinstance(p, Assign):
            w = fold_cond(self.env.backend, subst_flex(post, p.var, p.expr))
            return self.weaken(pre, ProofNode("assignment", AssertedProcess(w, p, post)))
        if isinstance(p, Alt):
            return ProofNode("alt", goal, (self.prove(pre, p.left, post), self.prove(pre, p.right, post)))
        if isinstance(p, Seq):
            mid = fold_cond(self.env.backend, _wp(p.right, post, self.inv))
            return ProofNode("seq", goal, (self.prove(pre, p.left, mid), self.prove(mid, p.right, post)))
        if isinstance(p, Guard):
            return ProofNode("gc", goal, (self.prove(And(pre, p.cond), p.body, post),))
        if isinstance(p, Encap):
            return ProofNode("encap", goal, (self.prove(pre, p.body, post),))
        if isinstance(p, Iter):
            return self.iterate(pre, p, post)
        raise ProofSearchFailed(goal, "only sequential processes are searched")

    def iterate(self, pre, p, post):
        cands = []
        if p in self.inv:
            cands.append(self.inv[p])
        cands += [pre, fold_cond(self.env.backend, _wp(p.right, post, self.inv))]
        last = None
        for inv in dict.fromkeys(cands):
            try:
                body = self.prove(inv, p.left, inv)
                out = self.prove(inv, p.right, post)
            except ProofSearchFailed as e:
                last = e
                continue
            node = ProofNode("iter", AssertedProcess(inv, p, post), (body, out))
            try:
                return self.weaken(pre, node)
            except ProofSearchFailed as e:
                last = e
        raise last or ProofSearchFailed(AssertedProcess(pre, p, post), "no invariant found")


def auto_prove_seq(ap: AssertedProcess, env, budget=10000, invariants=None) -> ProofNode:
    """Backward proof search; ``invariants`` maps iteration subterms to loop invariants.

    Raises :class:`ProofSearchFailed` carrying the goal it got stuck on.
    """
    s = _Search(env, budget, invariants)
    node = s.prove(ap.pre, ap.proc, ap.post)
    errs = check_proof(node, env)
    if errs:
        raise ProofSearchFailed(ap, f"search produced an invalid proof ({errs[0]})")
    return node


# ---------------------------------------------------------------- proof scripts


def format_proof(node: ProofNode, header: str = "") -> str:
    """Indented script: one node per line, premises indented below their conclusion."""
    from .syntax import show

    lines = [header.rstrip("\n")] if header else []

    def walk(n, depth):
        c = n.concl
        aux = f" [{', '.join(sorted(n.aux))}]" if n.aux else ""
        lines.append(f"{'  ' * depth}{n.rule}{aux} {{{show(c.pre)}}} {show(c.proc)} {{{show(c.post)}}}")
        for s in n.premises:
            walk(s, depth + 1)

    walk(node, 0)
    return "\n".join(lines) + "\n"


def parse_proof(text: str, actions=None, logical=()) -> ProofNode:
    """Read a proof script.

    Lines starting with ``#`` are comments; ``logical n, m`` declares logical
    data variables and ``actions a, b`` the action alphabet.  Every other
    non-blank line is ``<rule> [aux set] {pre} process {post}``.
    """
    from .syntax import ParseError, parse_cond, parse_proc

    logical = list(logical)
    acts = set(actions) if actions is not None else None
    rows = []
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        words = body.split(None, 1)
        if words[0] == "logical":
            logical += [w.strip() for w in words[1].replace(",", " ").split()]
            continue
        if words[0] == "actions":
            acts = (acts or set()) | {w.strip() for w in words[1].replace(",", " ").split()}
            continue
        indent = len(body) - len(body.lstrip())
        rule, rest = words[0], words[1] if len(words) > 1 else ""
        aux = None
        rest = rest.strip()
        if rest.startswith("["):
            close = rest.index("]")
            aux = frozenset(w.strip() for w in rest[1:close].split(",") if w.strip())
            rest = rest[close + 1 :].strip()
        try:
            if not rest.startswith("{"):
                raise ParseError("expected '{' before the precondition", rest, 0)
            e1 = rest.index("}")
            s2 = rest.rindex("{")
            if not rest.endswith("}") or s2 <= e1:
                raise ParseError("expected {pre} process {post}", rest, 0)
            pre = parse_cond(rest[1:e1], logical=logical)
            proc = parse_proc(rest[e1 + 1 : s2], actions=acts, logical=logical)
            post = parse_cond(rest[s2 + 1 : -1], logical=logical)
            node = (rule, AssertedProcess(pre, proc, post), aux, no)
        except (ParseError, ValueError) as e:
            raise HoareError(f"line {no}: {e}") from None
        rows.append((indent, node))
    if not rows:
        raise HoareError("empty proof script")

    def build(i, depth):
        indent, (rule, ap, aux, no) = rows[i]
        kids = []
        j = i + 1
        while j < len(rows) and rows[j][0] > indent:
            child, j = build(j, rows[j][0])
            kids.append(child)
        try:
            return ProofNode(rule, ap, tuple(kids), aux, no), j
        except HoareError as e:
            raise HoareError(f"line {no}: {e}") from None

    root, end = build(0, rows[0][0])
    if end != len(rows):
        raise HoareError(f"line {rows[end][1][3]}: a proof script has exactly one root")
    return root
