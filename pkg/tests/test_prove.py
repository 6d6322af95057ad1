import dataclasses
import random

import pytest

from deacp.axioms import AxiomId
from deacp.bisim import bisim
from deacp.generate import ALL_OPS, axiom_instance, gen_sigma, gen_term, sample_env
from deacp.prove import (
    EliminationError,
    check_eq_proof,
    default_budget,
    eval_eliminate,
    format_eq_proof,
    prove_eq,
)
from deacp.syntax import parse_proc, show
from deacp.terms import Eval, EvaluationMap

ENV = sample_env(2)


def P(text):
    return parse_proc(text, actions=ENV.actions)


@pytest.mark.parametrize("p,q", [
    ("a * delta", "(a . a) * delta"),
    ("a . eps", "a"),
    ("eps * a", "a"),
    ("(a * b) . c", "a * (b . c)"),
    ("a || b", "a . b + b . a + c"),
    ("i := i + 1 . i := i + 1 || i := 0",
     "i := i + 1 . (i := i + 1 . (i := 0) + i := 0 . i := i + 1) + i := 0 . i := i + 1 . i := i + 1"),
    ("[i == 0 || i == 1] -> a . b", "[i == 0] -> a . b + [i == 1] -> a . b"),
])
def test_proved_and_checked(p, q):
    r = prove_eq(P(p), P(q), ENV)
    assert r.proved, r.message
    assert check_eq_proof(r.proof, ENV) == []
    assert format_eq_proof(r.proof).startswith("goal 0")


@pytest.mark.parametrize("p,q", [("a", "b"), ("a . (b + c)", "a . b + a . c"), ("a", "a + eps")])
def test_refuted_with_counterexample(p, q):
    r = prove_eq(P(p), P(q), ENV)
    assert r.status == "refuted"
    assert r.hint.counterexample is not None


def test_tampered_proof_rejected():
    r = prove_eq(P("a . b + c"), P("c + a . b"), ENV)
    goals = list(r.proof.goals)
    goals[0] = dataclasses.replace(goals[0], right=P("c + a . c"))
    assert check_eq_proof(dataclasses.replace(r.proof, goals=tuple(goals)), ENV)


def test_budget():
    r = prove_eq(P("(a + b) * delta"), P("(b + a) * delta"), ENV, budget=1)
    assert r.status == "budget"


def test_default_budget(monkeypatch):
    monkeypatch.setenv("DEACP_BUDGET", "77")
    assert default_budget() == 77
    monkeypatch.delenv("DEACP_BUDGET")
    assert default_budget() == 5000


def test_proofs_are_sound():
    # every equation proved at small size is confirmed by bisimulation
    rng = random.Random(31)
    proved = 0
    for k in range(150):
        if k % 2:
            p, q = axiom_instance(rng.choice(list(AxiomId)), rng, ENV, 1)
        else:
            p, q = gen_term(rng, 2, ops=ALL_OPS), gen_term(rng, 2, ops=ALL_OPS)
        r = prove_eq(p, q, ENV, hint=False)
        if r.proved:
            proved += 1
            assert check_eq_proof(r.proof, ENV) == []
            assert bisim(p, q, ENV).equivalent, (show(p), show(q))
    assert proved >= 60


def test_axiom_instances_are_provable():
    rng = random.Random(32)
    misses = []
    for ax in AxiomId:
        for _ in range(2):
            p, q = axiom_instance(ax, rng, ENV, 1)
            if not prove_eq(p, q, ENV, hint=False).proved:
                misses.append(ax)
    # the prover is incomplete; the bulk of the instances must still go through
    assert len(misses) <= 6, misses


def test_division_elimination():
    from conftest import DEMOS
    from deacp.files import load_session

    s = load_session(DEMOS / "examples.dacp")
    q = eval_eliminate(s.sigmas["s0"], s.terms["division"], s.env)
    assert show(q) == "q := 0 . r := 11 . q := 1 . r := 8 . q := 2 . r := 5 . q := 3 . r := 2"


def test_elimination_examples():
    s = EvaluationMap.of({"i": 2})
    assert eval_eliminate(s, P("a(i + 1) . eps"), sample_env(5)) == P("a(3)")
    assert show(eval_eliminate(s, P("a * delta"), ENV)) == "a . (a * delta)"


def test_elimination_refuses_star_inexpressible_loops():
    with pytest.raises(EliminationError):
        eval_eliminate(EvaluationMap.of({"i": 0}),
                       P("([i == 0] -> (i := 1) + [i == 1] -> i := 0) * b"), ENV)


def test_elimination_agrees_with_semantics():
    rng = random.Random(33)
    done = 0
    for _ in range(80):
        p, sigma = gen_term(rng, 3, ops=ALL_OPS), gen_sigma(rng)
        try:
            q = eval_eliminate(sigma, p, ENV)
        except EliminationError:
            continue
        done += 1
        assert bisim(q, Eval(sigma, p), ENV).equivalent
        r = prove_eq(q, Eval(sigma, p), ENV, hint=False)
        assert r.proved and check_eq_proof(r.proof, ENV) == []
    assert done >= 50
