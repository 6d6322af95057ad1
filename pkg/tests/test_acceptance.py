"""End-to-end acceptance checks, one test per criterion.

Each test records PASS/FAIL and its wall time; the summary is printed at the
end of the pytest run under "acceptance criteria".
"""

import random
import time

import pytest

from conftest import DEMOS
from deacp import cli
from deacp.analysis import fass, fvar_proc
from deacp.axioms import AxiomId
from deacp.bisim import bisim, validate
from deacp.files import load_session
from deacp.generate import (
    ACTIONS,
    SEQUENTIAL,
    axiom_instance,
    gen_cond,
    gen_sigma,
    gen_term,
    gen_triple,
    sample_env,
)
from deacp.hoare import (
    NOT_DISJOINT,
    AssertedProcess,
    ProofNode,
    ProofSearchFailed,
    auto_prove_seq,
    check_proof,
    parse_proof,
)
from deacp.prove import EliminationError, check_eq_proof, eval_eliminate, prove_eq
from deacp.syntax import parse_cond, parse_proc, show
from deacp.terms import (
    Alt,
    And,
    CMerge,
    Encap,
    Eq,
    Eval,
    Flex,
    Guard,
    Iter,
    LMerge,
    Num,
    Par,
    Seq,
    Assign,
)
from deacp.truth import evaleqv, truth_check

SESSION = DEMOS / "examples.dacp"

# The base axioms; the iteration laws BKS2-BKS5 and the two derived steps
# are covered elsewhere.
CORE_AXIOMS = [ax for ax in AxiomId if ax not in (
    AxiomId.BKS2, AxiomId.BKS3, AxiomId.BKS4, AxiomId.BKS5, AxiomId.ITER_SKIP, AxiomId.CM1E)]


@pytest.fixture(scope="module")
def session():
    return load_session(SESSION)


def test_c01_division_chain(criterion, capsys):
    with criterion(1, "division example evaluates to the assignment chain"):
        t0 = time.perf_counter()
        code = cli.main(["-f", str(SESSION), "eval", "--sigma", "s0", "--term", "division"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.strip() == "q := 0 . r := 11 . q := 1 . r := 8 . q := 2 . r := 5 . q := 3 . r := 2"
        assert time.perf_counter() - t0 < 1


def test_c02_iteration_identity(criterion, session):
    with criterion(2, "a*delta = (a.a)*delta by proof and by bisimulation"):
        t0 = time.perf_counter()
        p, q = session.terms["loop1"], session.terms["loop2"]
        r = prove_eq(p, q, session.env)
        assert r.proved
        assert check_eq_proof(r.proof, session.env) == []
        res = bisim(p, q, session.env)
        assert res.status == "equivalent"
        assert validate(res.relation, session.env) == []
        assert time.perf_counter() - t0 < 1


@pytest.mark.parametrize("name,lhs,rhs", [
    ("BKS2", "a * (b . c)", "(a * b) . c"),
    ("BKS3", "a * (b . ((a + b) * c) + c)", "(a + b) * c"),
    ("BKS4", "encap{c}(a * b)", "encap{c}(a) * encap{c}(b)"),
    ("BKS4-blocked", "encap{a}(a * b)", "encap{a}(a) * encap{a}(b)"),
    ("BKS5", "eps * a", "a"),
])
def test_c03_iteration_laws(criterion, name, lhs, rhs):
    with criterion(3, "closed instances of BKS2-BKS5 proved"):
        env = sample_env(2)
        p, q = parse_proc(lhs, actions=env.actions), parse_proc(rhs, actions=env.actions)
        t0 = time.perf_counter()
        r = prove_eq(p, q, env)
        assert r.proved, r.message
        assert check_eq_proof(r.proof, env) == []
        assert time.perf_counter() - t0 < 1


def test_c04_axiom_soundness(criterion):
    with criterion(4, "every axiom instance is bisimilar") as info:
        t0 = time.perf_counter()
        failures, n = [], 0
        for size in (2, 3):
            env = sample_env(size)
            rng = random.Random(100 + size)
            for ax in CORE_AXIOMS:
                for _ in range(3):
                    lhs, rhs = axiom_instance(ax, rng, env, depth=2)
                    res = bisim(lhs, rhs, env)
                    n += 1
                    if res.status != "equivalent" or validate(res.relation, env):
                        failures.append((ax, show(lhs), show(rhs), res.status))
        info["detail"] = f"{len(CORE_AXIOMS)} axioms, {n} instances"
        assert failures == []
        assert time.perf_counter() - t0 < 60


def test_c05_splitting(criterion, session):
    with criterion(5, "splitting needs a cover of size 2"):
        p, q = session.terms["split1"], session.terms["split2"]
        res = bisim(p, q, session.env)
        assert res.status == "equivalent"
        assert validate(res.relation, session.env) == []
        sizes = [len(c.moves) for c in res.relation.covers if c.pair == (0, 0) and c.side == "left"]
        assert 2 in sizes
        single = bisim(p, q, session.env, max_cover_size=1)
        assert single.status == "inequivalent"


def test_c06_swap(criterion, session):
    with criterion(6, "swap proof checks and the triple is true within the box"):
        t0 = time.perf_counter()
        node = parse_proof((DEMOS / "swap.proof").read_text(), actions=session.env.actions,
                           logical=session.logical)
        assert check_proof(node, session.env) == []
        assert node.concl.proc == session.terms["swap"]
        r = truth_check(session.triples["swap"], session.env)
        assert r.status == "true-within-box"
        assert r.box == (-8, 8)
        assert time.perf_counter() - t0 < 10


def _par_attempts(env):
    """Par-rule trees for the parallel increment built from provable premises."""
    left = parse_proc("i := i + 1 . i := i + 1")
    right = parse_proc("i := 0")
    pres = ["i == 0", "true", "i >= 0"]
    posts = ["i == 0 || i == 1 || i == 2", "true", "i >= 0", "i == 2", "i == 0"]
    for pre in pres:
        for post in posts:
            for pre2 in pres:
                for post2 in posts:
                    a = AssertedProcess(parse_cond(pre), left, parse_cond(post))
                    b = AssertedProcess(parse_cond(pre2), right, parse_cond(post2))
                    try:
                        pa, pb = auto_prove_seq(a, env), auto_prove_seq(b, env)
                    except ProofSearchFailed:
                        continue
                    concl = AssertedProcess(And(a.pre, b.pre), Par(left, right), And(a.post, b.post))
                    yield ProofNode("par", concl, (pa, pb))


def test_c07_parallel_increment(criterion, session):
    with criterion(7, "parallel increment: par rule rejected, expansion route succeeds"):
        env = session.env
        attempts = list(_par_attempts(env))
        assert len(attempts) >= 10
        for node in attempts:
            errs = check_proof(node, env)
            assert any(e.kind == NOT_DISJOINT and e.node == "root" and "{i}" in e.message for e in errs)
        r = prove_eq(session.terms["inc"], session.terms["inc_expanded"], env)
        assert r.proved
        assert check_eq_proof(r.proof, env) == []
        node = auto_prove_seq(session.triples["inc_expanded"], env)
        assert check_proof(node, env) == []
        t = truth_check(session.triples["inc"], env)
        assert t.status == "true-within-box"


def test_c08_hoare_soundness(criterion):
    with criterion(8, "auto-proved triples are true (finite carrier 2)") as info:
        env = sample_env(2)
        rng = random.Random(8)
        proved, tried, bad = 0, 0, []
        while proved < 120 and tried < 5000:
            tried += 1
            pre, proc, post = gen_triple(rng, size=2, depth=3)
            ap = AssertedProcess(pre, proc, post)
            try:
                node = auto_prove_seq(ap, env, 2000)
            except ProofSearchFailed:
                continue
            assert check_proof(node, env) == []
            proved += 1
            r = truth_check(ap, env)
            if r.status != "true":
                bad.append((str(ap), r.describe()))
        info["detail"] = f"{proved} proved of {tried} generated"
        assert proved >= 100
        assert bad == []


# ---------------------------------------------------------------- congruence


def _wrap(op, p, r, rng, env):
    """Put ``p`` into a one-operator context with side term ``r``."""
    left = rng.random() < 0.5
    if op in ("alt", "seq", "iter", "par", "lmerge", "cmerge"):
        cls = {"alt": Alt, "seq": Seq, "iter": Iter, "par": Par, "lmerge": LMerge, "cmerge": CMerge}[op]
        return cls(p, r) if left else cls(r, p)
    if op == "guard":
        return Guard(gen_cond(rng, env.backend.size), p)
    if op == "encap":
        return Encap(frozenset(rng.sample(ACTIONS, 1)), p)
    if op == "eval":
        return Eval(gen_sigma(rng, env.backend.size), p)
    raise ValueError(op)


def _bisim_trials(rng, env, n):
    ops = ("alt", "seq", "iter", "guard", "par", "lmerge", "cmerge", "encap", "eval")
    bad = []
    for k in range(n):
        ax = rng.choice(CORE_AXIOMS)
        p, q = axiom_instance(ax, rng, env, depth=1)
        op = ops[k % len(ops)]
        r = gen_term(rng, 1, env.backend.size)
        seed = rng.random()
        a = _wrap(op, p, r, random.Random(seed), env)
        b = _wrap(op, q, r, random.Random(seed), env)
        res = bisim(a, b, env)
        if res.status != "equivalent":
            bad.append((op, show(a), show(b), res.status))
    return bad


def _evaleqv_pair(rng, env):
    """Two processes equivalent under evaluation but not bisimilar."""
    v = rng.choice(("i", "j"))
    k = Num(rng.randrange(env.backend.size))
    x = gen_term(rng, 1, env.backend.size, vars=(v,), ops=SEQUENTIAL)
    return Seq(Assign(v, k), Guard(Eq(Flex(v), k), x)), Seq(Assign(v, k), x)


def _evaleqv_trials(rng, env, n):
    ops = ("alt", "seq", "iter", "guard", "encap", "par")
    bad = []
    for k in range(n):
        op = ops[k % len(ops)]
        p, q = _evaleqv_pair(rng, env)
        if op == "par":
            # the side term keeps to the other variable: the disjointness hypotheses
            mine = fvar_proc(p) | fvar_proc(q)
            other = tuple(sorted({"i", "j"} - mine))
            r = gen_term(rng, 1, env.backend.size, vars=other, ops=SEQUENTIAL)
            assert not (fass(p) & fvar_proc(r)) and not (fass(r) & fvar_proc(p))
        else:
            r = gen_term(rng, 1, env.backend.size, ops=SEQUENTIAL)
        V = {"i", "j"}
        assert evaleqv(p, q, V, env).holds
        seed = rng.random()
        a = _wrap(op, p, r, random.Random(seed), env)
        b = _wrap(op, q, r, random.Random(seed), env)
        res = evaleqv(a, b, V, env)
        if not res.holds:
            bad.append((op, show(a), show(b), res.status))
    return bad


def test_c09_congruence(criterion):
    with criterion(9, "operators preserve bisimilarity and evaluation equivalence") as info:
        t0 = time.perf_counter()
        env = sample_env(2)
        rng = random.Random(9)
        bad = _bisim_trials(rng, env, 180)
        bad += _evaleqv_trials(rng, env, 60)
        info["detail"] = "240 trials"
        assert bad == []
        assert time.perf_counter() - t0 < 120


def test_c10_elimination_matches_semantics(criterion):
    with criterion(10, "eliminated evaluation is bisimilar to the evaluated term") as info:
        env = sample_env(2)
        rng = random.Random(10)
        checked, skipped, bad = 0, 0, []
        while checked < 60:
            p = gen_term(rng, 3, 2)
            sigma = gen_sigma(rng, 2)
            try:
                q = eval_eliminate(sigma, p, env)
            except EliminationError:
                skipped += 1
                continue
            checked += 1
            res = bisim(q, Eval(sigma, p), env)
            if res.status != "equivalent" or validate(res.relation, env):
                bad.append((show(p), show(sigma), show(q), res.status))
        info["detail"] = f"{checked} checked, {skipped} not expressible without evaluation"
        assert bad == []
