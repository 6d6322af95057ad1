import pytest

from conftest import DEMOS
from deacp.files import SessionError, format_session, load_session, load_session_text, split_triple
from deacp.data import FiniteBackend


def test_demo_session_loads():
    s = load_session(DEMOS / "examples.dacp")
    assert s.env.actions == {"a", "b", "c"}
    assert s.env.gamma("b", "a") == "c"
    assert {"division", "swap", "inc"} <= set(s.terms)
    assert "swap" in s.triples and "after_a" in s.contexts
    assert s.logical == ("n", "n'")


def test_format_is_a_fixed_point():
    s = load_session(DEMOS / "examples.dacp")
    text = format_session(s)
    again = load_session_text(text)
    assert format_session(again) == text
    assert again.terms == s.terms and again.triples == s.triples


def test_finite_backend_and_continuations():
    s = load_session_text("backend finite 3\nactions a\nterm t = a .\n   a\n")
    assert s.env.backend == FiniteBackend(3)
    assert str(s.terms["t"].right) == str(s.terms["t"].left)


@pytest.mark.parametrize("text,needle", [
    ("actions a\n", "backend"),
    ("backend integers\n", "actions"),
    ("backend integers\nactions a\nterm t = b\n", "undeclared action"),
    ("backend integers\nactions a\nterm t = a\nterm t = a\n", "declared twice"),
    ("backend integers\nactions a, b\ncomm a | c = b\n", "undeclared"),
    ("backend integers\nactions a\nwibble x = a\n", "unknown declaration"),
    ("backend reals\nactions a\n", "unknown backend"),
    ("  a\nbackend integers\nactions a\n", "continuation"),
])
def test_session_errors_have_lines(text, needle):
    with pytest.raises(SessionError) as e:
        load_session_text(text, "x.dacp")
    assert needle in str(e.value)


def test_error_line_number():
    with pytest.raises(SessionError) as e:
        load_session_text("backend integers\nactions a\n\nterm t = a . (\n", "x.dacp")
    assert str(e.value).startswith("x.dacp:4:")


def test_same_name_in_different_kinds():
    s = load_session_text("backend integers\nactions a\nterm x = a\ntriple x = {true} a {true}\n")
    assert "x" in s.terms and "x" in s.triples


def test_split_triple():
    assert split_triple("{i == 0} i := 1 {i == 1}") == ("i == 0", " i := 1 ", "i == 1")
    with pytest.raises(ValueError):
        split_triple("i := 1")
