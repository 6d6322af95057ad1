import random

from deacp.data import satisfiable
from deacp.generate import ALL_OPS, gen_eval, gen_term, sample_env
from deacp.sos import dump_lts, explore, parse_lts, steps, terminations
from deacp.syntax import parse_cond, parse_proc
from deacp.terms import TOP, And, EvaluationMap

ENV = sample_env(2)


def P(text):
    return parse_proc(text, actions=ENV.actions)


def labels(p):
    return {(t.cond, t.action, t.target) for t in steps(p, ENV).transitions}


def test_action_prefix():
    assert labels(P("a . b")) == {(TOP, P("a"), P("eps . b"))}
    assert {f.cond for f in terminations(P("eps"), ENV).transitions} == {TOP}
    assert not terminations(P("a"), ENV).transitions


def test_guard_conjoins_condition():
    (t,) = steps(P("[i == 0] -> a"), ENV).transitions
    assert t.cond == And(TOP, parse_cond("i == 0"))


def test_unsatisfiable_guards_are_dropped():
    assert not steps(P("[i == 0 && i == 1] -> a"), ENV).transitions
    assert not terminations(P("[false] -> eps"), ENV).transitions


def test_communication():
    acts = {a for _, a, _ in labels(P("a || b"))}
    assert acts == {P("a"), P("b"), P("c")}
    # parameterized communication carries the argument equality
    conds = [f for f, a, _ in labels(P("a(i) | b(1)")) if a == P("c(i)")]
    assert conds and satisfiable(ENV.backend, conds[0]).valid


def test_encapsulation_blocks():
    assert {a for _, a, _ in labels(P("encap{a, b}(a || b)"))} == {P("c")}


def test_eval_updates_the_map():
    p = P("eval{i = 0}(i := i + 1 . a(i))")
    ((f, a, q),) = labels(p)
    assert a == P("i := 1")
    assert q.sigma == EvaluationMap.of({"i": 1})


def test_iteration_loop_collapses():
    lts = explore(P("a * delta"), ENV)
    assert len(lts.states) == 1
    raw = explore(P("a * delta"), ENV, cleanup=False)
    assert len(raw.states) == 2


def test_division_chain_under_integers():
    from deacp.files import load_session
    from conftest import DEMOS

    s = load_session(DEMOS / "examples.dacp")
    from deacp.terms import Eval

    lts = explore(Eval(s.sigmas["s0"], s.terms["division"]), s.env)
    assert not lts.truncated
    assert len(lts.transitions) == 8
    assert [c for _, c in lts.terminations] == [TOP]


def test_all_conditions_satisfiable_and_deterministic():
    rng = random.Random(5)
    for _ in range(150):
        p = gen_term(rng, 3, ops=ALL_OPS) if rng.random() < 0.6 else gen_eval(rng)
        lts = explore(p, ENV)
        for _, f, _, _ in lts.transitions:
            assert satisfiable(ENV.backend, f).valid
        for _, f in lts.terminations:
            assert satisfiable(ENV.backend, f).valid
        assert explore(p, ENV) == lts


def test_truncation_flag():
    lts = explore(P("a * b || a * b"), ENV, max_states=2)
    assert lts.truncated


def test_dump_round_trip():
    rng = random.Random(6)
    for _ in range(60):
        lts = explore(gen_term(rng, 3), ENV)
        assert parse_lts(dump_lts(lts)) == lts
    raw = explore(P("a . (b * c)"), ENV, cleanup=False)
    assert parse_lts(dump_lts(raw)).cleanup is False
