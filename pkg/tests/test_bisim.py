import dataclasses
import json
import random

import pytest

from deacp.bisim import bisim, render, result_from_json, result_to_json, validate
from deacp.generate import ALL_OPS, SEQUENTIAL, axiom_instance, gen_term, sample_env
from deacp.axioms import AxiomId
from deacp.syntax import parse_proc

ENV = sample_env(2)


def P(text):
    return parse_proc(text, actions=ENV.actions)


@pytest.mark.parametrize("p,q", [
    ("a * delta", "(a . a) * delta"),
    ("a + a", "a"),
    ("[i == 0] -> a + [!(i == 0)] -> a", "a"),
    ("a || b", "a . b + b . a + c"),
    ("eval{i = 1}(i := i + 1 . a(i))", "i := 0 . a(0)"),
])
def test_equivalent_examples(p, q):
    res = bisim(P(p), P(q), ENV)
    assert res.status == "equivalent"
    assert validate(res.relation, ENV) == []


@pytest.mark.parametrize("p,q", [
    ("a", "b"),
    ("a . (b + c)", "a . b + a . c"),
    ("a", "a + eps"),
    ("[i == 0] -> a", "a"),
    ("a(i)", "a(0)"),
])
def test_inequivalent_examples(p, q):
    res = bisim(P(p), P(q), ENV)
    assert res.status == "inequivalent"
    assert res.counterexample is not None
    assert res.counterexample.pair == (0, 0)


def test_splitting_cover_is_needed():
    p, q = P("[i == 0 || i == 1] -> a . b"), P("[i == 0] -> a . b + [i == 1] -> a . b")
    assert bisim(p, q, ENV).equivalent
    assert bisim(p, q, ENV, max_cover_size=1).status == "inequivalent"
    assert bisim(p, q, ENV, max_cover_size=2).equivalent


def test_data_equivalent_actions_match():
    # over Z_2, i + 2 and i denote the same value
    assert bisim(P("a(i + 2)"), P("a(i)"), ENV).equivalent


def test_validator_rejects_tampering():
    res = bisim(P("a . b"), P("a . b"), ENV)
    rel = res.relation
    assert validate(rel, ENV) == []
    assert validate(dataclasses.replace(rel, covers=rel.covers[1:]), ENV)
    assert validate(dataclasses.replace(rel, pairs=rel.pairs - {(1, 1)}), ENV)


def test_equivalence_properties():
    rng = random.Random(21)
    terms = [gen_term(rng, 2, ops=SEQUENTIAL) for _ in range(14)]
    terms += [axiom_instance(AxiomId.A4, rng, ENV, 1)[1] for _ in range(4)]
    verdict = {}
    for p in terms:
        assert bisim(p, p, ENV).equivalent
        for q in terms:
            verdict[p, q] = bisim(p, q, ENV).equivalent
    for p in terms:
        for q in terms:
            assert verdict[p, q] == verdict[q, p]
            for r in terms:
                if verdict[p, q] and verdict[q, r]:
                    assert verdict[p, r]


def test_restricted_covers_agree_with_subset_search():
    # the maximal-cover shortcut and explicit subset search decide the same pairs
    rng = random.Random(22)
    for _ in range(80):
        ax = rng.choice([AxiomId.GC7, AxiomId.GC4, AxiomId.A3, AxiomId.V5])
        p, q = axiom_instance(ax, rng, ENV, 1)
        r = gen_term(rng, 2, ops=SEQUENTIAL)
        for a, b in ((p, q), (p, r)):
            fast = bisim(a, b, ENV)
            slow = bisim(a, b, ENV, max_cover_size=64)
            assert fast.status == slow.status


def test_truncated():
    res = bisim(P("a * b || a * b"), P("a * b || a * b"), ENV, max_states=2)
    assert res.status == "truncated"


def test_json_round_trip_reproduces_rendering():
    rng = random.Random(23)
    for _ in range(30):
        p = gen_term(rng, 2, ops=ALL_OPS)
        for q in (p, gen_term(rng, 2, ops=ALL_OPS)):
            res = bisim(p, q, ENV)
            d = json.loads(json.dumps(result_to_json(res)))
            back = result_from_json(d, ENV)
            assert render(back) == render(res)
            if back.relation is not None:
                assert validate(back.relation, ENV) == []
