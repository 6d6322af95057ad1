import random

import pytest

from conftest import DEMOS
from deacp.env import integer_env
from deacp.files import load_session
from deacp.generate import SEQUENTIAL, gen_term, sample_env
from deacp.hoare import AssertedProcess
from deacp.syntax import parse_cond, parse_proc
from deacp.terms import EvaluationMap, Num, Par
from deacp.truth import (
    SeqContext,
    apply_context,
    context_check,
    corollary_transfer,
    evaleqv,
    truth_check,
    valuations,
)

IENV = integer_env(("a", "b", "c"))
FENV = sample_env(2)


def P(text):
    return parse_proc(text)


def C(text):
    return SeqContext(parse_proc(text, allow_hole=True))


def test_valuations_cover_the_carrier():
    vs = list(valuations({"i", "j"}, sample_env(3)))
    assert len(vs) == 9 and len(set(vs)) == 9
    assert len(list(valuations({"i"}, IENV, (-2, 2)))) == 5


def test_evaleqv_examples():
    assert evaleqv(P("[true] -> i := 0"), P("([true] -> i := 0) . ([true] -> eps)"), {"i"}, IENV,
                   box=(-2, 2)).status == "holds-within-box"
    r = evaleqv(P("i := 1"), P("i := 2"), {"i"}, FENV)
    assert r.status == "fails" and r.witness is not None
    assert evaleqv(P("i := 1 . [i == 1] -> a"), P("i := 1 . a"), {"i"}, FENV).status == "holds"


def test_evaleqv_rejects_small_index():
    with pytest.raises(ValueError):
        evaleqv(P("i := 1"), P("j := 1"), {"i"}, FENV)


def test_evaleqv_is_an_equivalence_and_monotone():
    rng = random.Random(51)
    terms = [gen_term(rng, 2, vars=("i",), ops=SEQUENTIAL) for _ in range(8)]
    terms += [P("i := 0 . [i == 0] -> a"), P("i := 0 . a"), P("i := 0 . a + i := 0 . a")]
    V = {"i"}
    rel = {(p, q): evaleqv(p, q, V, FENV).holds for p in terms for q in terms}
    for p in terms:
        assert rel[p, p]
        for q in terms:
            assert rel[p, q] == rel[q, p]
            for r in terms:
                if rel[p, q] and rel[q, r]:
                    assert rel[p, r]
            if rel[p, q]:
                assert evaleqv(p, q, {"i", "j"}, FENV).holds


def test_truth_examples():
    s = load_session(DEMOS / "examples.dacp")
    assert truth_check(s.triples["inc"], s.env).status == "true-within-box"
    t = AssertedProcess(parse_cond("true"), P("delta"), parse_cond("false"))
    assert truth_check(t, FENV).status == "true"
    bad = AssertedProcess(parse_cond("i == 0"), P("i := 1"), parse_cond("i == 0"))
    r = truth_check(bad, IENV)
    assert r.status == "false"
    assert r.sigma == EvaluationMap.of({"i": Num(0)})


def test_truth_detects_false_swap_variant():
    s = load_session(DEMOS / "examples.dacp")
    ap = s.triples["swap"]
    wrong = AssertedProcess(ap.pre, parse_proc("i := i + j . j := i - j"), ap.post)
    assert truth_check(wrong, s.env, box=(-2, 2)).status == "false"


def test_context_examples():
    assert context_check(C("[] . b"), {"i"}).ok
    r = context_check(C("(j := 0) || []"), {"i"})
    assert r.ok and r.V == {"i", "j"}
    r = context_check(C("(i := 0) || []"), {"i"})
    assert not r.ok and "FAss(p) & V = {i}" in r.violation
    r = context_check(C("[] . j := 1"), {"i"})
    assert not r.ok


def test_context_needs_one_hole():
    with pytest.raises(ValueError):
        C("[] . []")
    with pytest.raises(ValueError):
        C("a . b")


def test_apply_context():
    assert apply_context(C("a . ([] + b)"), P("c")) == P("a . (c + b)")


def test_transfer_examples():
    r = corollary_transfer(P("[true] -> a"), P("a"), set(), C("[] . b"), FENV)
    assert r.status == "holds"
    s = load_session(DEMOS / "examples.dacp")
    p = parse_proc("[i == 1 && j == 2] -> (i := i + j . j := i - j . i := i - j)")
    q = parse_proc("([i == 1 && j == 2] -> (i := i + j . j := i - j . i := i - j)) . ([i == 2 && j == 1] -> eps)")
    r = corollary_transfer(p, q, {"i", "j"}, C("[] . a"), s.env, box=(-2, 2))
    assert r.status == "holds-within-box"
    r = corollary_transfer(P("i := 1 . [i == 1] -> a"), P("i := 1 . a"), {"i"}, C("[]"), FENV)
    assert r.status == "holds"


def test_transfer_refuses_bad_context():
    r = corollary_transfer(P("i := 1 . [i == 1] -> a"), P("i := 1 . a"), {"i"}, C("(i := 0) || []"), FENV)
    assert r.status == "not-applicable"


def test_parallel_congruence_needs_disjointness():
    # without the disjointness hypotheses the parallel composition can tell them apart
    p, q = P("i := 1 . [i == 1] -> a"), P("i := 1 . a")
    assert evaleqv(p, q, {"i"}, FENV).holds
    r = P("i := 0")
    assert not evaleqv(Par(p, r), Par(q, r), {"i"}, FENV).holds
    # with a side term on another variable it holds
    r = P("j := 0 . b(j)")
    assert evaleqv(Par(p, r), Par(q, r), {"i", "j"}, FENV).holds
