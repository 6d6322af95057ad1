"""Concrete ASCII syntax: tokenizer, recursive-descent parser and printer.

Process operators, weakest first::

    p + q                 alternative composition
    p || q, p _| q, p | q parallel, left merge, communication merge
    p * q                 binary iteration
    p . q                 sequential composition
    [phi] -> p            guarded command (body is a sequential term)

Primaries: ``delta``, ``eps``, actions ``a`` and ``a(e1, ..., en)``,
assignments ``v := e``, ``encap{a, b}(p)``, ``eval{s}(p)`` /
``eval{i=11, j=3}(p)``, the context hole ``[]`` and parenthesised terms.
All binary process operators associate to the right.

Conditions, weakest first: ``<=>`` (sugar), ``=>``, ``||``, ``&&``,
``!``/``forall d.``/``exists d.``; atoms ``true``, ``false``, ``e == e``,
``e >= e``; ``e <= e``, ``e != e``, ``e < e`` and ``e > e`` are sugar
over ``==``, ``>=`` and ``!``.

Data: numerals, variables, ``+``, ``-`` (binary and unary).  An assignment's
right-hand side extends as far as a data expression can, so ``(v := e) + p``
needs its parentheses.
"""

from __future__ import annotations

import re

from .terms import (
    BOT,
    DELTA,
    EPS,
    HOLE,
    TOP,
    Act,
    Alt,
    And,
    Assign,
    Bot,
    CMerge,
    CVar,
    Delta,
    Encap,
    Eps,
    Eq,
    Eval,
    EvaluationMap,
    Exists,
    Flex,
    Forall,
    Geq,
    Guard,
    Hole,
    Imp,
    Iter,
    LMerge,
    LVar,
    Not,
    Num,
    Op,
    Or,
    Par,
    Seq,
    Top,
    iff,
)


class ParseError(ValueError):
    def __init__(self, message, text="", pos=0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col = line, col


KEYWORDS = {"delta", "eps", "encap", "eval", "true", "false", "forall", "exists"}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_']*)|(?P<sym><=>|=>|->|:=|==|>=|<=|!=|&&|\|\||_\||\$|[-+.*|()\[\]{},!=:;<>]))"
)


def tokenize(text: str) -> list:
    toks = []
    i = 0
    n = len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", text, i)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind, val, start))
        i = m.end()
    toks.append(("eof", "", n))
    return toks


class Parser:
    """Recursive-descent parser over one input string.

    ``actions`` -- declared action names (``None`` accepts any name);
    ``logical`` -- names of logical data variables; ``sigmas`` -- named
    evaluation maps usable in ``eval{name}(...)``.
    """

    def __init__(self, text, actions=None, logical=(), sigmas=None, allow_hole=False):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.actions = None if actions is None else frozenset(actions)
        self.logical = frozenset(logical)
        self.bound = []
        self.sigmas = dict(sigmas or {})
        self.allow_hole = allow_hole

    # --- token helpers --------------------------------------------------

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, val, k=0):
        kind, v, _ = self.peek(k)
        return v == val and kind in ("sym", "ident")

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        if not self.at(val):
            self.fail(f"expected {val!r}")
        return self.take()

    def fail(self, msg):
        kind, v, pos = self.peek()
        got = "end of input" if kind == "eof" else repr(v)
        raise ParseError(f"{msg}, got {got}", self.text, pos)

    def ident(self):
        kind, v, _ = self.peek()
        if kind != "ident" or v in KEYWORDS:
            self.fail("expected an identifier")
        self.take()
        return v

    def done(self):
        if self.peek()[0] != "eof":
            self.fail("unexpected trailing input")

    # --- data -------------------------------------------------------------

    def data(self):
        e = self.data_unary()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            e = Op(op, (e, self.data_unary()))
        return e

    def data_unary(self):
        if self.at("-"):
            self.take()
            kind, v, _ = self.peek()
            if kind == "num":
                self.take()
                return Num(-int(v))
            return Op("neg", (self.data_unary(),))
        return self.data_atom()

    def data_atom(self):
        kind, v, _ = self.peek()
        if kind == "num":
            self.take()
            return Num(int(v))
        if self.at("("):
            self.take()
            e = self.data()
            self.expect(")")
            return e
        name = self.ident()
        if name in self.bound or name in self.logical:
            return LVar(name)
        return Flex(name)

    # --- conditions -------------------------------------------------------

    def cond(self):
        c = self.cond_imp()
        if self.at("<=>"):
            self.take()
            c = iff(c, self.cond_imp())
        return c

    def cond_imp(self):
        c = self.cond_or()
        if self.at("=>"):
            self.take()
            return Imp(c, self.cond_imp())
        return c

    def cond_or(self):
        c = self.cond_and()
        while self.at("||"):
            self.take()
            c = Or(c, self.cond_and())
        return c

    def cond_and(self):
        c = self.cond_unary()
        while self.at("&&"):
            self.take()
            c = And(c, self.cond_unary())
        return c

    def cond_unary(self):
        if self.at("!"):
            self.take()
            return Not(self.cond_unary())
        if self.at("forall") or self.at("exists"):
            q = Forall if self.take()[1] == "forall" else Exists
            var = self.ident()
            self.expect(".")
            self.bound.append(var)
            try:
                body = self.cond()
            finally:
                self.bound.pop()
            return q(var, body)
        return self.cond_atom()

    def cond_atom(self):
        if self.at("true"):
            self.take()
            return TOP
        if self.at("false"):
            self.take()
            return BOT
        if self.at("$"):
            self.take()
            return CVar(self.ident())
        if self.at("("):
            save = self.i
            try:
                self.take()
                c = self.cond()
                self.expect(")")
                if not any(self.at(op) for op in ("==", ">=", "!=", "<=", "<", ">")):
                    return c
            except ParseError:
                pass
            self.i = save
        left = self.data()
        kind, v, _ = self.peek()
        if v == "==":
            self.take()
            return Eq(left, self.data())
        if v == ">=":
            self.take()
            return Geq(left, self.data())
        if v == "<=":
            self.take()
            return Geq(self.data(), left)
        if v == "!=":
            self.take()
            return Not(Eq(left, self.data()))
        if v == "<":
            self.take()
            return Not(Geq(left, self.data()))
        if v == ">":
            self.take()
            return Not(Geq(self.data(), left))
        self.fail("expected a comparison")

    # --- processes --------------------------------------------------------

    def proc(self):
        p = self.proc_par()
        if self.at("+"):
            self.take()
            return Alt(p, self.proc())
        return p

    def proc_par(self):
        p = self.proc_iter()
        for sym, cls in (("||", Par), ("_|", LMerge), ("|", CMerge)):
            if self.at(sym):
                self.take()
                return cls(p, self.proc_par())
        return p

    def proc_iter(self):
        p = self.proc_seq()
        if self.at("*"):
            self.take()
            return Iter(p, self.proc_iter())
        return p

    def proc_seq(self):
        p = self.proc_unary()
        if self.at("."):
            self.take()
            return Seq(p, self.proc_seq())
        return p

    def proc_unary(self):
        if self.at("[") and not self.at("]", 1):
            self.take()
            c = self.cond()
            self.expect("]")
            self.expect("->")
            return Guard(c, self.proc_seq())
        return self.proc_primary()

    def proc_primary(self):
        if self.at("delta"):
            self.take()
            return DELTA
        if self.at("eps"):
            self.take()
            return EPS
        if self.at("["):
            self.take()
            self.expect("]")
            if not self.allow_hole:
                self.fail("context hole not allowed here")
            return HOLE
        if self.at("("):
            self.take()
            p = self.proc()
            self.expect(")")
            return p
        if self.at("encap"):
            self.take()
            self.expect("{")
            names = []
            while not self.at("}"):
                names.append(self.action_name())
                if not self.at("}"):
                    self.expect(",")
            self.take()
            self.expect("(")
            p = self.proc()
            self.expect(")")
            return Encap(frozenset(names), p)
        if self.at("eval"):
            self.take()
            sigma = self.sigma_spec()
            self.expect("(")
            p = self.proc()
            self.expect(")")
            return Eval(sigma, p)
        kind, name, _ = self.peek()
        if kind != "ident" or name in KEYWORDS:
            self.fail("expected a process term")
        if self.at(":=", 1):
            self.take()
            self.take()
            if name in self.logical:
                self.fail(f"cannot assign to logical variable {name}")
            return Assign(name, self.data())
        name = self.action_name()
        if self.at("("):
            self.take()
            args = [self.data()]
            while self.at(","):
                self.take()
                args.append(self.data())
            self.expect(")")
            return Act(name, tuple(args))
        return Act(name)

    def action_name(self):
        kind, name, pos = self.peek()
        name = self.ident()
        if self.actions is not None and name not in self.actions:
            raise ParseError(f"undeclared action {name!r}", self.text, pos)
        return name

    def sigma_spec(self):
        self.expect("{")
        if self.peek()[0] == "ident" and self.at("}", 1):
            kind, name, pos = self.peek()
            self.take()
            self.take()
            if name not in self.sigmas:
                raise ParseError(f"unknown evaluation map {name!r}", self.text, pos)
            return self.sigmas[name]
        binds = {}
        while not self.at("}"):
            v = self.ident()
            self.expect("=")
            binds[v] = self.data()
            if not self.at("}"):
                self.expect(",")
        self.take()
        return EvaluationMap.of(binds)


def parse_proc(text, actions=None, logical=(), sigmas=None, allow_hole=False):
    p = Parser(text, actions, logical, sigmas, allow_hole)
    t = p.proc()
    p.done()
    return t


def parse_cond(text, logical=()):
    p = Parser(text, logical=logical)
    t = p.cond()
    p.done()
    return t


def parse_data(text, logical=()):
    p = Parser(text, logical=logical)
    t = p.data()
    p.done()
    return t


def parse(text, sort="proc", **kw):
    """Parse ``text`` as a term of the given sort (``proc``, ``cond`` or ``data``)."""
    if sort == "proc":
        return parse_proc(text, **kw)
    if sort == "cond":
        return parse_cond(text, **kw)
    if sort == "data":
        return parse_data(text, **kw)
    raise ValueError(f"unknown sort {sort!r}")


# ------------------------------------------------------------------ printing


def show_data(e) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, (Flex, LVar)):
        return e.name
    if isinstance(e, Op):
        if e.op == "neg":
            a = e.args[0]
            inner = show_data(a)
            if isinstance(a, (Flex, LVar)) or (isinstance(a, Op) and a.op == "neg"):
                return "-" + inner
            return f"-({inner})"
        l, r = e.args
        ls = show_data(l)
        rs = show_data(r)
        if isinstance(r, Op) and r.op in ("+", "-"):
            rs = f"({rs})"
        if isinstance(r, Num) and r.value < 0:
            rs = f"({rs})"
        return f"{ls} {e.op} {rs}"
    raise TypeError(f"not a data term: {e!r}")


_COND_LEVEL = {Imp: 1, Or: 2, And: 3}


def _cond_level(c):
    if isinstance(c, (Forall, Exists)):
        return 0
    return _COND_LEVEL.get(type(c), 4 if isinstance(c, Not) else 5)


def show_cond(c) -> str:
    if isinstance(c, Top):
        return "true"
    if isinstance(c, Bot):
        return "false"
    if isinstance(c, CVar):
        return "$" + c.name
    if isinstance(c, Eq):
        return f"{show_data(c.left)} == {show_data(c.right)}"
    if isinstance(c, Geq):
        return f"{show_data(c.left)} >= {show_data(c.right)}"
    if isinstance(c, Not) and isinstance(c.arg, Geq):
        return f"{show_data(c.arg.left)} < {show_data(c.arg.right)}"
    if isinstance(c, Not) and isinstance(c.arg, Eq):
        return f"{show_data(c.arg.left)} != {show_data(c.arg.right)}"
    if isinstance(c, Not):
        s = show_cond(c.arg)
        return "!" + (f"({s})" if _cond_level(c.arg) < 4 else s)
    if isinstance(c, (Forall, Exists)):
        q = "forall" if isinstance(c, Forall) else "exists"
        return f"{q} {c.var}. {show_cond(c.body)}"
    sym = {Imp: "=>", Or: "||", And: "&&"}[type(c)]
    lvl = _cond_level(c)
    ls, rs = show_cond(c.left), show_cond(c.right)
    if isinstance(c, Imp):
        lpar = _cond_level(c.left) <= lvl
        rpar = _cond_level(c.right) < lvl
    else:
        lpar = _cond_level(c.left) < lvl
        rpar = _cond_level(c.right) <= lvl
    if lpar:
        ls = f"({ls})"
    if rpar:
        rs = f"({rs})"
    return f"{ls} {sym} {rs}"


_PROC_LEVEL = {Alt: 1, Par: 2, LMerge: 2, CMerge: 2, Iter: 3, Seq: 4, Guard: 4}
_PROC_SYM = {Alt: "+", Par: "||", LMerge: "_|", CMerge: "|", Iter: "*", Seq: "."}


def _proc_level(p):
    return _PROC_LEVEL.get(type(p), 5)


def show_sigma(sigma: EvaluationMap) -> str:
    return ", ".join(f"{v}={show_data(e)}" for v, e in sigma.items)


def show_proc(p, plus_follows=False) -> str:
    if isinstance(p, Delta):
        return "delta"
    if isinstance(p, Eps):
        return "eps"
    if isinstance(p, Hole):
        return "[]"
    if isinstance(p, Act):
        if not p.args:
            return p.name
        return f"{p.name}({', '.join(show_data(a) for a in p.args)})"
    if isinstance(p, Assign):
        s = f"{p.var} := {show_data(p.expr)}"
        return f"({s})" if plus_follows else s
    if isinstance(p, Encap):
        return f"encap{{{', '.join(sorted(p.blocked))}}}({show_proc(p.body)})"
    if isinstance(p, Eval):
        return f"eval{{{show_sigma(p.sigma)}}}({show_proc(p.body)})"
    if isinstance(p, Guard):
        if _proc_level(p.body) < 4:
            body = f"({show_proc(p.body)})"
        else:
            body = show_proc(p.body, plus_follows)
        return f"[{show_cond(p.cond)}] -> {body}"
    lvl = _proc_level(p)
    left, right = p.left, p.right
    if _proc_level(left) <= lvl:
        ls = f"({show_proc(left)})"
    else:
        ls = show_proc(left, isinstance(p, Alt))
    if _proc_level(right) < lvl:
        rs = f"({show_proc(right)})"
    else:
        rs = show_proc(right, plus_follows)
    return f"{ls} {_PROC_SYM[type(p)]} {rs}"


def show(t) -> str:
    """Render any term with minimal parentheses."""
    if isinstance(t, (Num, Flex, LVar, Op)):
        return show_data(t)
    if isinstance(t, (Top, Bot, Eq, Geq, Not, And, Or, Imp, Forall, Exists, CVar)):
        return show_cond(t)
    return show_proc(t)
