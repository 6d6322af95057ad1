"""Quantifier-free linear integer arithmetic.

Satisfiability of boolean combinations of ``e == e'`` and ``e >= e'`` where the
data terms are built from numerals, variables, ``+``, ``-`` and unary minus.

Each formula is put in disjunctive normal form; every cube is decided by

1. exact elimination of equalities (unit-coefficient substitution, falling back
   to the Euclid-style reduction for non-unit coefficients), then
2. a search over integer values for the remaining variables, one at a time,
   using Fourier-Motzkin projections to derive bounds.

A cube is declared unsatisfiable only when the rational shadow is empty or the
search was exhaustive over finite bounds.  Anything else that yields no model
is reported as unknown.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import count

from .terms import And, Bot, Eq, Exists, Flex, Forall, Geq, Imp, LVar, Not, Num, Op, Or, Top

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"

MAX_CUBES = 20000
WINDOW = 40
MAX_NODES = 200000


class NonLinear(Exception):
    pass


def var_key(t):
    if isinstance(t, Flex):
        return t.name
    return t.name


def linearize(e) -> tuple[dict, int]:
    """Return ``(coeffs, const)`` with ``e == sum(coeffs[v] * v) + const``."""
    if isinstance(e, Num):
        return {}, e.value
    if isinstance(e, (Flex, LVar)):
        return {var_key(e): 1}, 0
    if isinstance(e, Op):
        if e.op == "neg":
            c, k = linearize(e.args[0])
            return {v: -a for v, a in c.items()}, -k
        if e.op in ("+", "-"):
            c1, k1 = linearize(e.args[0])
            c2, k2 = linearize(e.args[1])
            sgn = 1 if e.op == "+" else -1
            out = dict(c1)
            for v, a in c2.items():
                out[v] = out.get(v, 0) + sgn * a
            return {v: a for v, a in out.items() if a}, k1 + sgn * k2
    raise NonLinear(repr(e))


def _diff(l, r):
    c1, k1 = linearize(l)
    c2, k2 = linearize(r)
    out = dict(c1)
    for v, a in c2.items():
        out[v] = out.get(v, 0) - a
    return {v: a for v, a in out.items() if a}, k1 - k2


# A literal is ("eq" | "ge", coeffs, const) meaning sum + const (== | >=) 0.


def _neg_lin(c, k):
    return {v: -a for v, a in c.items()}, -k


def _lits(phi, positive: bool):
    """DNF of ``phi`` (or of its negation) as a list of cubes (lists of literals)."""
    if isinstance(phi, Top):
        return [[]] if positive else []
    if isinstance(phi, Bot):
        return [] if positive else [[]]
    if isinstance(phi, Eq):
        c, k = _diff(phi.left, phi.right)
        if positive:
            return [[("eq", c, k)]]
        nc, nk = _neg_lin(c, k)
        return [[("ge", c, k - 1)], [("ge", nc, nk - 1)]]
    if isinstance(phi, Geq):
        c, k = _diff(phi.left, phi.right)
        if positive:
            return [[("ge", c, k)]]
        nc, nk = _neg_lin(c, k)
        return [[("ge", nc, nk - 1)]]
    if isinstance(phi, Not):
        return _lits(phi.arg, not positive)
    if isinstance(phi, (And, Or, Imp)):
        if isinstance(phi, Imp):
            a, apos = phi.left, not positive
            b, bpos = phi.right, positive
            is_and = not positive
        else:
            a, apos = phi.left, positive
            b, bpos = phi.right, positive
            is_and = isinstance(phi, And) == positive
        la = _lits(a, apos)
        lb = _lits(b, bpos)
        if not is_and:
            return la + lb
        if len(la) * len(lb) > MAX_CUBES:
            raise NonLinear("formula too large")
        return [x + y for x in la for y in lb]
    if isinstance(phi, (Forall, Exists)):
        raise NonLinear("quantifier")
    raise NonLinear(repr(phi))


def _subst(lit, var, expr):
    """Substitute ``var := expr`` (expr = (coeffs, const)) into a literal."""
    kind, c, k = lit
    a = c.get(var, 0)
    if not a:
        return lit
    ec, ek = expr
    out = {v: b for v, b in c.items() if v != var}
    for v, b in ec.items():
        out[v] = out.get(v, 0) + a * b
    return kind, {v: b for v, b in out.items() if b}, k + a * ek


class _Fresh:
    def __init__(self):
        self.n = count()

    def __call__(self):
        return f"#t{next(self.n)}"


def _solve_equalities(lits, fresh):
    """Eliminate equalities.  Returns (remaining inequalities, substitutions) or None."""
    eqs = [l for l in lits if l[0] == "eq"]
    ges = [l for l in lits if l[0] == "ge"]
    subs = []  # list of (var, (coeffs, const)), applied in reverse for models
    while eqs:
        kind, c, k = eqs.pop()
        if not c:
            if k != 0:
                return None
            continue
        g = 0
        for a in c.values():
            g = math.gcd(g, a)
        if k % g:
            return None
        c = {v: a // g for v, a in c.items()}
        k //= g
        unit = next((v for v, a in c.items() if abs(a) == 1), None)
        if unit is not None:
            a = c[unit]
            # unit = -(rest + k) / a
            expr = ({v: -b * a for v, b in c.items() if v != unit}, -k * a)
        else:
            # Euclid step: introduce t with unit := t - sum(q_i v_i) - q_k
            v0 = min(c, key=lambda v: abs(c[v]))
            m = c[v0]
            t = fresh()
            ec = {t: 1}
            for v, a in c.items():
                if v != v0:
                    q = a // m
                    if q:
                        ec[v] = -q
            expr = (ec, -(k // m))
            unit = v0
            # keep the (now reduced) equation for further reduction
            eqs.append(_subst(("eq", c, k), unit, expr))
        subs.append((unit, expr))
        eqs = [_subst(l, unit, expr) for l in eqs]
        ges = [_subst(l, unit, expr) for l in ges]
    return ges, subs


def _normalize_ge(lit):
    _, c, k = lit
    if not c:
        return lit
    g = 0
    for a in c.values():
        g = math.gcd(g, a)
    if g > 1:
        return "ge", {v: a // g for v, a in c.items()}, k // g  # floor tightening
    return lit


def _project_bounds(ges, x):
    """Rational bounds on ``x`` implied by the system, or None if infeasible."""
    rows = [(dict(c), Fraction(k)) for _, c, k in ges]
    others = sorted({v for c, _ in rows for v in c if v != x})
    for y in others:
        pos = [r for r in rows if r[0].get(y, 0) > 0]
        neg = [r for r in rows if r[0].get(y, 0) < 0]
        keep = [r for r in rows if not r[0].get(y, 0)]
        for cp, kp in pos:
            for cn, kn in neg:
                ap, an = cp[y], -cn[y]
                c = {}
                for v in set(cp) | set(cn):
                    val = an * cp.get(v, 0) + ap * cn.get(v, 0)
                    if val and v != y:
                        c[v] = val
                keep.append((c, an * kp + ap * kn))
        rows = keep
        if len(rows) > 5000:
            raise NonLinear("projection too large")
    lo, hi = None, None
    for c, k in rows:
        a = c.get(x, 0)
        if not a:
            if k < 0:
                return None
            continue
        b = -k / a
        if a > 0:
            lo = b if lo is None else max(lo, b)
        else:
            hi = b if hi is None else min(hi, b)
    return lo, hi


class _Budget:
    def __init__(self):
        self.nodes = 0
        self.exhaustive = True


def _search(ges, budget):
    ges = [_normalize_ge(l) for l in ges]
    for _, c, k in ges:
        if not c and k < 0:
            return None
    ges = [l for l in ges if l[1]]
    if not ges:
        return {}
    budget.nodes += 1
    if budget.nodes > MAX_NODES:
        budget.exhaustive = False
        return None
    x = min({v for _, c, _ in ges for v in c})
    bounds = _project_bounds(ges, x)
    if bounds is None:
        return None
    lo, hi = bounds
    lo = None if lo is None else math.ceil(lo)
    hi = None if hi is None else math.floor(hi)
    if lo is not None and hi is not None:
        if lo > hi:
            return None
        if hi - lo > 4 * WINDOW:
            budget.exhaustive = False
            mid = 0 if lo <= 0 <= hi else lo
            cands = _around(mid, lo, hi)
        else:
            cands = range(lo, hi + 1)
    else:
        budget.exhaustive = False
        start = lo if lo is not None else (hi if hi is not None else 0)
        if lo is None and hi is None:
            start = 0
        elif lo is None and hi >= 0:
            start = 0
        elif hi is None and lo <= 0:
            start = 0
        cands = _around(start, lo, hi)
    for val in cands:
        sub = [_subst(l, x, ({}, val)) for l in ges]
        m = _search(sub, budget)
        if m is not None:
            m[x] = val
            return m
    return None


def _around(start, lo, hi):
    out = []
    for d in range(0, WINDOW + 1):
        for v in ((start + d, start - d) if d else (start,)):
            if (lo is None or v >= lo) and (hi is None or v <= hi):
                out.append(v)
    return out


def _eval_lin(expr, model):
    c, k = expr
    return sum(a * model.get(v, 0) for v, a in c.items()) + k


def _cube_sat(cube):
    fresh = _Fresh()
    solved = _solve_equalities(cube, fresh)
    if solved is None:
        return UNSAT, None
    ges, subs = solved
    budget = _Budget()
    model = _search(ges, budget)
    if model is None:
        return (UNSAT if budget.exhaustive else UNKNOWN), None
    for var, expr in reversed(subs):
        model[var] = _eval_lin(expr, model)
    return SAT, {v: val for v, val in model.items() if not v.startswith("#")}


def check_sat(phi) -> tuple[str, dict | None]:
    """Decide satisfiability of ``phi`` over the integers.

    Returns ``(status, model)`` where ``model`` maps variable names to ints
    when ``status == "sat"``.
    """
    try:
        cubes = _lits(phi, True)
    except NonLinear:
        return UNKNOWN, None
    unknown = False
    for cube in cubes:
        try:
            status, model = _cube_sat(cube)
        except NonLinear:
            unknown = True
            continue
        if status == SAT:
            return SAT, model
        if status == UNKNOWN:
            unknown = True
    return (UNKNOWN if unknown else UNSAT), None
