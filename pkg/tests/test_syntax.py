import random

import pytest

from deacp.analysis import avars, erase_aux, fass, fvar_proc, in_hproc, NotAuxiliary
from deacp.generate import ALL_OPS, gen_cond, gen_eval, gen_term
from deacp.syntax import ParseError, parse_cond, parse_proc, show
from deacp.terms import (
    EPS,
    Act,
    Alt,
    Assign,
    Eval,
    Guard,
    Iter,
    Num,
    Op,
    Par,
    Seq,
    Flex,
    EvaluationMap,
)


def test_precedence():
    assert parse_proc("a . b + c") == Alt(Seq(Act("a"), Act("b")), Act("c"))
    assert parse_proc("a . b * c") == Iter(Seq(Act("a"), Act("b")), Act("c"))
    assert parse_proc("a * b || c") == Par(Iter(Act("a"), Act("b")), Act("c"))
    assert parse_proc("a . b . c") == Seq(Act("a"), Seq(Act("b"), Act("c")))


def test_assignment_extends_over_plus():
    assert parse_proc("i := i + 1") == Assign("i", Op("+", (Flex("i"), Num(1))))
    assert parse_proc("(i := 0) + a") == Alt(Assign("i", Num(0)), Act("a"))


def test_guard_body_is_sequential():
    p = parse_proc("[i == 0] -> a . b + c")
    assert isinstance(p, Alt) and isinstance(p.left, Guard)


def test_eval_with_inline_sigma():
    p = parse_proc("eval{i = 11, j = 3}(a(i))")
    assert p == Eval(EvaluationMap.of({"i": 11, "j": 3}), Act("a", (Flex("i"),)))


def test_undeclared_action_rejected():
    with pytest.raises(ParseError) as e:
        parse_proc("a . x", actions={"a"})
    assert "x" in str(e.value)


@pytest.mark.parametrize("bad", ["a +", "(a", "a . . b", "i :=", "[i == ] -> a"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_proc(bad)


def test_round_trip_generated_terms():
    rng = random.Random(1)
    for _ in range(500):
        t = gen_term(rng, 4, 3, ops=ALL_OPS)
        assert parse_proc(show(t)) == t
        e = gen_eval(rng)
        assert parse_proc(show(e)) == e


def test_round_trip_conditions():
    rng = random.Random(2)
    for _ in range(300):
        c = gen_cond(rng, 3, ("i", "j"), 3)
        assert parse_cond(show(c)) == c


def test_fass_within_fvar():
    rng = random.Random(3)
    for _ in range(300):
        t = gen_term(rng, 3)
        assert fass(t) <= fvar_proc(t)


def test_aux_erasure_removes_exactly_A():
    p = parse_proc("k := k + 1 . a(i) . k := 0 . i := i + 1")
    assert frozenset({"k"}) in avars(p)
    q = erase_aux(p, {"k"})
    assert q == parse_proc("eps . a(i) . eps . i := i + 1")
    assert fvar_proc(q) == fvar_proc(p) - {"k"}


def test_aux_strictness():
    # k is read by a guard, so it is not auxiliary
    p = parse_proc("k := 1 . [k == 1] -> a")
    assert frozenset({"k"}) not in avars(p)
    with pytest.raises(NotAuxiliary):
        erase_aux(p, {"k"})
    # i := k copies k into a non-auxiliary variable
    assert frozenset({"k"}) not in avars(parse_proc("k := 1 . i := k"))


def test_in_hproc():
    assert in_hproc(parse_proc("i := 0 || a"))
    assert not in_hproc(parse_proc("a _| b"))
    assert not in_hproc(parse_proc("eval{i = 1}(a)"))
    assert in_hproc(EPS)


def test_aux_copy_from_outside_is_not_auxiliary():
    # h := i mentions i outside A = {h}
    assert frozenset({"h"}) not in avars(parse_proc("h := i"))
    assert frozenset({"h"}) in avars(parse_proc("h := h + 1"))
