import json
import shutil
import subprocess

import pytest

from conftest import DEMOS
from deacp import cli

SESSION = str(DEMOS / "examples.dacp")
PROOF = str(DEMOS / "swap.proof")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_division(capsys):
    code, out, _ = run(capsys, "-f", SESSION, "eval", "--sigma", "s0", "--term", "division")
    assert code == 0
    assert out == "q := 0 . r := 11 . q := 1 . r := 8 . q := 2 . r := 5 . q := 3 . r := 2\n"


def test_session_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DEACP_SESSION", SESSION)
    code, out, _ = run(capsys, "eval", "--sigma", "s0", "--term", "division")
    assert code == 0 and out.startswith("q := 0")


def test_bisim_inline_terms(capsys):
    code, out, _ = run(capsys, "bisim", "--a", "a*delta", "--b", "(a.a)*delta")
    assert code == 0 and out.startswith("verdict: equivalent")
    code, out, _ = run(capsys, "bisim", "--a", "a", "--b", "b")
    assert code == 1 and "counterexample" in out


def test_bisim_truncated(capsys):
    code, out, _ = run(capsys, "bisim", "--a", "a*b || a*b", "--b", "a", "--bound", "2")
    assert code == 2


def test_hoare_check(capsys, tmp_path):
    code, out, _ = run(capsys, "-f", SESSION, "hoare-check", PROOF)
    assert code == 0 and out.startswith("verdict: ok")
    bad = tmp_path / "bad.proof"
    bad.write_text(open(PROOF).read().replace("assignment {i + j == n + n'", "assignment {i == n + n'"))
    code, out, _ = run(capsys, "-f", SESSION, "hoare-check", str(bad))
    assert code == 1
    assert "root.0.0 (line 6): schema-mismatch" in out


def test_prove_eq(capsys):
    code, out, _ = run(capsys, "-f", SESSION, "prove-eq", "--a", "inc", "--b", "inc_expanded")
    assert code == 0 and out.startswith("verdict: proved")
    code, out, _ = run(capsys, "-f", SESSION, "prove-eq", "--a", "a . (b + c)", "--b", "a . b + a . c")
    assert code == 1 and "refuted" in out


def test_prove_eq_budget(capsys, monkeypatch):
    monkeypatch.setenv("DEACP_BUDGET", "1")
    code, out, _ = run(capsys, "-f", SESSION, "prove-eq", "--a", "loop1", "--b", "loop2")
    assert code == 2 and "budget" in out


def test_hoare_auto_and_truth(capsys):
    code, out, _ = run(capsys, "-f", SESSION, "hoare-auto", "--triple", "inc_expanded")
    assert code == 0 and out.startswith("logical n, n'\nalt ")
    code, out, _ = run(capsys, "-f", SESSION, "hoare-auto", "--triple", "inc")
    assert code == 2
    code, out, _ = run(capsys, "-f", SESSION, "truth", "--triple", "swap", "--box", "-2", "2")
    assert code == 0 and "true within box [-2, 2]" in out
    code, out, _ = run(capsys, "truth", "{i == 0} i := 1 {i == 0}", "--box", "-1", "1")
    assert code == 1 and out.startswith("verdict: false")


def test_lts_and_hnf(capsys):
    code, out, _ = run(capsys, "-f", SESSION, "lts", "loop1")
    assert code == 0 and out.startswith("states 1\n")
    code, out, _ = run(capsys, "-f", SESSION, "hnf", "a . b + c")
    assert code == 0 and out.startswith("hnf: ")


def test_fmt(capsys):
    code, out, _ = run(capsys, "fmt", SESSION)
    assert code == 0 and out.startswith("backend integers\nactions a, b, c\n")


@pytest.mark.parametrize("argv,needle", [
    (["-f", "missing.dacp", "hnf", "a"], "cannot read session"),
    (["-f", SESSION, "hnf", "x"], "undeclared action"),
    (["-f", SESSION, "eval", "--sigma", "nope", "--term", "division"], "unknown evaluation map"),
    (["-f", SESSION, "truth", "--triple", "nope"], "unknown triple"),
    (["truth", "i := 1"], "{pre} process {post}"),
    (["-f", SESSION, "hoare-check", "missing.proof"], "missing.proof"),
    (["frobnicate"], ""),
])
def test_input_errors_exit_3(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 3
    assert needle in err


COMMANDS = [
    ["-f", SESSION, "eval", "--sigma", "s0", "--term", "division"],
    ["-f", SESSION, "bisim", "--a", "split1", "--b", "split2"],
    ["-f", SESSION, "bisim", "--a", "a", "--b", "b"],
    ["-f", SESSION, "prove-eq", "--a", "loop1", "--b", "loop2"],
    ["-f", SESSION, "prove-eq", "--a", "a", "--b", "b"],
    ["-f", SESSION, "hoare-check", PROOF],
    ["-f", SESSION, "hoare-auto", "--triple", "inc_expanded"],
    ["-f", SESSION, "hoare-auto", "--triple", "inc"],
    ["-f", SESSION, "truth", "--triple", "inc"],
    ["-f", SESSION, "lts", "division"],
    ["-f", SESSION, "hnf", "inc"],
    ["fmt", SESSION],
    ["-f", SESSION, "hnf", "x"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: " ".join(a[2:4] if a[0] == "-f" else a[:1]))
def test_json_reproduces_human_output(capsys, argv):
    code, human, herr = run(capsys, *argv)
    code2, js, _ = run(capsys, "--json", *argv)
    d = json.loads(js)
    assert code == code2 == d["exit"]
    assert cli.render(d) == human + herr


@pytest.mark.skipif(shutil.which("deacp") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["deacp", "bisim", "--a", "a*delta", "--b", "(a.a)*delta"], capture_output=True, text=True)
    assert p.returncode == 0
    assert p.stdout.startswith("verdict: equivalent")
