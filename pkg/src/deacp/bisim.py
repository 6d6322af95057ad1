"""Splitting bisimulation on explored transition systems.

One transition may be answered by a finite set of transitions of the other
side, all with data-equivalent actions and related targets, whose conditions
together cover its own condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .sos import Lts, _Sem, explore
from .terms import Act, Assign, Imp, disj


class OracleUnknown(RuntimeError):
    pass


def data_equiv(a, b, env) -> bool:
    """``a`` and ``b`` are the same action up to the values of their data."""
    if isinstance(a, Act) and isinstance(b, Act):
        if a.name != b.name or len(a.args) != len(b.args):
            return False
        for x, y in zip(a.args, b.args):
            v = env.backend.models_eq(x, y)
            if v.unknown:
                raise OracleUnknown(f"cannot compare {x} and {y}")
            if v.invalid:
                return False
        return True
    if isinstance(a, Assign) and isinstance(b, Assign):
        if a.var != b.var:
            return False
        v = env.backend.models_eq(a.expr, b.expr)
        if v.unknown:
            raise OracleUnknown(f"cannot compare {a.expr} and {b.expr}")
        return v.valid
    return False


# Obligations are named by (kind, side, index): kind "step" indexes into the
# owner's outgoing transitions, "term" into its termination conditions.


@dataclass(frozen=True)
class CoverRecord:
    pair: tuple  # (left state, right state)
    side: str  # whose move is being answered: "left" or "right"
    kind: str  # "step" or "term"
    obligation: tuple  # (cond, action, target) or (cond,)
    moves: tuple  # answering (cond, action, target) or (cond,) of the other side


@dataclass(frozen=True)
class BisimRelation:
    left: Lts
    right: Lts
    pairs: frozenset
    covers: tuple = ()


@dataclass(frozen=True)
class Counterexample:
    pair: tuple
    side: str
    kind: str
    obligation: tuple
    reason: str


@dataclass(frozen=True)
class BisimResult:
    status: str  # equivalent | inequivalent | truncated | unknown
    relation: BisimRelation | None = None
    counterexample: Counterexample | None = None
    notes: tuple = ()
    left: Lts | None = field(default=None, repr=False)
    right: Lts | None = field(default=None, repr=False)

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"


class _Checker:
    def __init__(self, L, R, env, max_cover):
        self.L, self.R, self.env = L, R, env
        self.backend = env.backend
        self.max_cover = max_cover
        self.unknown = False
        self.out = {"left": self._out(L), "right": self._out(R)}
        self.term = {"left": self._terms(L), "right": self._terms(R)}
        self._eq = {}
        self._valid = {}

    @staticmethod
    def _out(lts):
        d = {i: [] for i in range(len(lts.states))}
        for i, f, a, j in lts.transitions:
            d[i].append((f, a, j))
        return d

    @staticmethod
    def _terms(lts):
        d = {i: [] for i in range(len(lts.states))}
        for i, f in lts.terminations:
            d[i].append(f)
        return d

    def equiv(self, a, b):
        key = (a, b)
        if key not in self._eq:
            try:
                self._eq[key] = data_equiv(a, b, self.env)
            except OracleUnknown:
                self.unknown = True
                self._eq[key] = False
        return self._eq[key]

    def implies(self, phi, conds):
        key = (phi, conds)
        if key not in self._valid:
            v = self.backend.valid(Imp(phi, disj(*conds)))
            if v.unknown:
                self.unknown = True
            self._valid[key] = v.valid
        return self._valid[key]

    def search(self, phi, cands, limit):
        """Smallest answering subset of ``cands`` (pairs (cond, move)), or None."""
        if not cands:
            return None
        conds = tuple(c for c, _ in cands)
        if not self.implies(phi, conds):
            return None
        n = len(cands)
        sizes = [1, 2] if n > 2 else list(range(1, n))
        if limit is not None:
            sizes = [k for k in range(1, min(limit, n) + 1)]
        for k in sizes:
            for sub in combinations(cands, k):
                if self.implies(phi, tuple(c for c, _ in sub)):
                    return sub
        if limit is not None and n > limit:
            return None
        return tuple(cands)

    def obligations(self, i, j, rel, limit, want):
        """Yield (side, kind, obligation, answer-or-None) for the pair (i, j)."""
        for side, me, other in (("left", i, j), ("right", j, i)):
            for f, a, t in self.out[side][me]:
                cands = []
                for g, b, u in self.out[_flip(side)][other]:
                    if ((t, u) if side == "left" else (u, t)) in rel and self.equiv(a, b):
                        cands.append((g, (g, b, u)))
                ans = self.search(f, cands, limit) if want else self._fast(f, cands, limit)
                yield side, "step", (f, a, t), ans
            for f in self.term[side][me]:
                cands = [(g, (g,)) for g in self.term[_flip(side)][other]]
                ans = self.search(f, cands, limit) if want else self._fast(f, cands, limit)
                yield side, "term", (f,), ans

    def _fast(self, phi, cands, limit):
        if limit is None:
            if cands and self.implies(phi, tuple(c for c, _ in cands)):
                return tuple(cands)
            return None
        return self.search(phi, cands, limit)


def _flip(side):
    return "right" if side == "left" else "left"


def _strip(ans):
    return tuple(m for _, m in ans)


def bisim_lts(L: Lts, R: Lts, env, max_cover_size=None) -> BisimResult:
    """Greatest splitting bisimulation between two explored systems."""
    notes = []
    if L.truncated or R.truncated:
        return BisimResult("truncated", notes=("state bound reached",), left=L, right=R)
    if L.undetermined or R.undetermined:
        notes.append("some transitions could not be decided by the oracle")
    ck = _Checker(L, R, env, max_cover_size)
    rel = {(i, j) for i in range(len(L.states)) for j in range(len(R.states))}
    reason = {}
    changed = True
    while changed:
        changed = False
        for pair in sorted(rel):
            for side, kind, ob, ans in ck.obligations(*pair, rel, max_cover_size, False):
                if ans is None:
                    rel.discard(pair)
                    reason[pair] = (side, kind, ob)
                    changed = True
                    break
    if ck.unknown:
        notes.append("the oracle could not decide some queries")
    if (0, 0) not in rel:
        side, kind, ob = reason[(0, 0)]
        why = "no set of matching moves covers its condition"
        if max_cover_size is not None:
            why += f" with at most {max_cover_size} conditions"
        cex = Counterexample((0, 0), side, kind, ob, why)
        status = "unknown" if ck.unknown or L.undetermined or R.undetermined else "inequivalent"
        return BisimResult(status, None, cex, tuple(notes), L, R)
    keep = _reachable(rel, ck)
    covers = []
    for pair in sorted(keep):
        for side, kind, ob, ans in ck.obligations(*pair, keep, max_cover_size, True):
            covers.append(CoverRecord(pair, side, kind, ob, _strip(ans)))
    relation = BisimRelation(L, R, frozenset(keep), tuple(covers))
    status = "unknown" if L.undetermined or R.undetermined else "equivalent"
    return BisimResult(status, relation, None, tuple(notes), L, R)


def _reachable(rel, ck):
    """Pairs of ``rel`` reachable from (0, 0) along matched moves."""
    seen, todo = {(0, 0)}, [(0, 0)]
    while todo:
        i, j = todo.pop()
        for f, a, t in ck.out["left"][i]:
            for g, b, u in ck.out["right"][j]:
                if (t, u) in rel and (t, u) not in seen and ck.equiv(a, b):
                    seen.add((t, u))
                    todo.append((t, u))
    return seen


def bisim(p, q, env, max_states=2000, max_cover_size=None, cleanup=True) -> BisimResult:
    """Explore both terms and decide splitting bisimilarity of their initial states."""
    sem = _Sem(env)
    L = explore(p, env, max_states, cleanup, sem)
    R = explore(q, env, max_states, cleanup, sem)
    return bisim_lts(L, R, env, max_cover_size)


# ---------------------------------------------------------------- validation


def validate(rel: BisimRelation, env) -> list:
    """Re-check a witness from scratch; returns a list of complaints (empty when sound).

    Transitions are recomputed from the states' terms, not read from the
    stored systems.
    """
    errors = []
    if (0, 0) not in rel.pairs:
        errors.append("initial states are not related")
    from .analysis import cleanup as _cleanup

    sem = _Sem(env)
    sides = {"left": rel.left, "right": rel.right}

    def moves(side, i):
        lts = sides[side]
        t = lts.states[i]
        out = []
        for f, a, q, det in sem.steps(t):
            if not det:
                errors.append(f"{side} state {i} has an undecided transition")
            if lts.cleanup:
                q = _cleanup(q)
            out.append((f, a, lts.index.get(q) if lts.index else _find(lts, q)))
        return out

    def terms(side, i):
        return [f for f, det in sem.terms(sides[side].states[i]) if det]

    recorded = {}
    for c in rel.covers:
        recorded.setdefault((c.pair, c.side, c.kind, c.obligation), c.moves)
    for pair in sorted(rel.pairs):
        for side in ("left", "right"):
            me = pair[0] if side == "left" else pair[1]
            other = pair[1] if side == "left" else pair[0]
            mine = moves(side, me)
            theirs = moves(_flip(side), other)
            for f, a, t in mine:
                ans = recorded.get((pair, side, "step", (f, a, t)))
                if ans is None:
                    errors.append(f"pair {pair}: {side} move {f}/{a} has no recorded cover")
                    continue
                for g, b, u in ans:
                    if (g, b, u) not in theirs:
                        errors.append(f"pair {pair}: cover move {g}/{b} does not exist")
                    elif not data_equiv(a, b, env):
                        errors.append(f"pair {pair}: actions {a} and {b} are not data equivalent")
                    elif ((t, u) if side == "left" else (u, t)) not in rel.pairs:
                        errors.append(f"pair {pair}: targets of {a} are not related")
                if not ans or not env.backend.valid(Imp(f, disj(*(g for g, _, _ in ans)))).valid:
                    errors.append(f"pair {pair}: cover of {side} move {a} does not imply its condition")
            mine_t, theirs_t = terms(side, me), terms(_flip(side), other)
            for f in mine_t:
                ans = recorded.get((pair, side, "term", (f,)))
                if ans is None:
                    errors.append(f"pair {pair}: {side} termination has no recorded cover")
                    continue
                if any(g not in theirs_t for (g,) in ans):
                    errors.append(f"pair {pair}: cover uses a termination that does not exist")
                if not ans or not env.backend.valid(Imp(f, disj(*(g for (g,) in ans)))).valid:
                    errors.append(f"pair {pair}: termination cover does not imply its condition")
    return errors


def _find(lts, q):
    for i, t in enumerate(lts.states):
        if t == q:
            return i
    return None


# ---------------------------------------------------------------- serialization


def result_to_json(res: BisimResult) -> dict:
    from .syntax import show

    def item(ob):
        out = {"cond": show(ob[0])}
        if len(ob) == 3:
            out["action"] = show(ob[1])
            out["target"] = ob[2]
        return out

    d = {"status": res.status, "notes": list(res.notes)}
    if res.left is not None:
        d["left_states"] = [show(t) for t in res.left.states]
        d["right_states"] = [show(t) for t in res.right.states]
        d["cleanup"] = res.left.cleanup
    if res.relation is not None:
        d["pairs"] = sorted(list(p) for p in res.relation.pairs)
        d["covers"] = [
            {
                "pair": list(c.pair),
                "side": c.side,
                "kind": c.kind,
                "obligation": item(c.obligation),
                "cover": [item(m) for m in c.moves],
            }
            for c in res.relation.covers
        ]
    if res.counterexample is not None:
        c = res.counterexample
        d["counterexample"] = {
            "pair": list(c.pair),
            "side": c.side,
            "kind": c.kind,
            "obligation": item(c.obligation),
            "reason": c.reason,
        }
    return d


def result_from_json(d: dict, env, **kw) -> BisimResult:
    """Rebuild a result from :func:`result_to_json` output (states are re-indexed)."""
    from .syntax import parse_cond, parse_proc

    logical = kw.get("logical", ())

    def lts(key):
        if key not in d:
            return None
        states = tuple(parse_proc(s, **kw) for s in d[key])
        sem = _Sem(env)
        from .analysis import cleanup as _cleanup

        clean = d.get("cleanup", True)
        index = {t: i for i, t in enumerate(states)}
        trans, terms = [], []
        for i, t in enumerate(states):
            for f, a, q, det in sem.steps(t):
                j = index.get(_cleanup(q) if clean else q)
                if det and j is not None:
                    trans.append((i, f, a, j))
            for f, det in sem.terms(t):
                if det:
                    terms.append((i, f))
        return Lts(states, tuple(trans), tuple(terms), (), False, index, clean)

    def item(o):
        f = parse_cond(o["cond"], logical=logical)
        if "action" in o:
            return (f, parse_proc(o["action"], **kw), o["target"])
        return (f,)

    L, R = lts("left_states"), lts("right_states")
    relation = None
    if "pairs" in d:
        covers = tuple(
            CoverRecord(tuple(c["pair"]), c["side"], c["kind"], item(c["obligation"]),
                        tuple(item(m) for m in c["cover"]))
            for c in d["covers"]
        )
        relation = BisimRelation(L, R, frozenset(tuple(p) for p in d["pairs"]), covers)
    cex = None
    if "counterexample" in d:
        c = d["counterexample"]
        cex = Counterexample(tuple(c["pair"]), c["side"], c["kind"], item(c["obligation"]), c["reason"])
    return BisimResult(d["status"], relation, cex, tuple(d.get("notes", ())), L, R)


def render(res: BisimResult) -> str:
    """Human-readable verdict with witness or counterexample."""
    from .syntax import show

    lines = [f"verdict: {res.status}"]
    for n in res.notes:
        lines.append(f"note: {n}")
    if res.relation is not None:
        L, R = res.relation.left, res.relation.right
        lines.append(f"relation: {len(res.relation.pairs)} pairs")
        for i, j in sorted(res.relation.pairs):
            lines.append(f"  ({i}, {j}) : {show(L.states[i])}  ~  {show(R.states[j])}")
        for c in res.relation.covers:
            if len(c.moves) > 1:
                conds = ", ".join(show(m[0]) for m in c.moves)
                what = show(c.obligation[1]) if c.kind == "step" else "termination"
                lines.append(f"  split at {c.pair}: {c.side} {what} [{show(c.obligation[0])}] covered by {{{conds}}}")
    if res.counterexample is not None:
        c = res.counterexample
        what = show(c.obligation[1]) if c.kind == "step" else "termination"
        lines.append(f"counterexample at {c.pair}: {c.side} {what} [{show(c.obligation[0])}]: {c.reason}")
    return "\n".join(lines) + "\n"
