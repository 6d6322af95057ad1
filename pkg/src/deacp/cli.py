"""Command-line front end.

Exit codes: 0 affirmative verdict, 1 negative verdict, 2 unknown or budget
exhausted, 3 bad input.  ``--json`` prints the structured result; the human
text is always ``render(result)`` of that same object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .axioms import format_trace
from .files import Session, SessionError, load_session, split_triple
from .syntax import ParseError, show

OK, NEGATIVE, UNKNOWN, BAD_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _session(args) -> Session:
    path = args.file or os.environ.get("DEACP_SESSION")
    if path:
        return load_session(path)
    # No session: integers, no communication, any action name.
    from .env import integer_env

    s = Session(integer_env())
    s.parse_term = lambda text, allow_hole=False: _open_parse(text, allow_hole)
    return s


def _open_parse(text, allow_hole=False):
    from .syntax import parse_proc

    return parse_proc(text, allow_hole=allow_hole)


def _term(s, ref, what):
    try:
        return s.term(ref)
    except ParseError as e:
        raise InputError(f"{what}: {e}") from None


def _budget(args, default=None):
    if getattr(args, "budget", None) is not None:
        return args.budget
    env = os.environ.get("DEACP_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError("DEACP_BUDGET must be an integer") from None
    return default


def _triple(s, args):
    from .hoare import AssertedProcess

    if args.triple:
        if args.triple not in s.triples:
            raise InputError(f"unknown triple {args.triple!r}")
        return s.triples[args.triple]
    if args.spec:
        pre, proc, post = split_triple(args.spec)
    else:
        raise InputError("give --triple NAME or a '{pre} process {post}' argument")
    try:
        return AssertedProcess(s.parse_cond(pre), s.parse_term(proc), s.parse_cond(post))
    except ParseError as e:
        raise InputError(f"triple: {e}") from None


# ---------------------------------------------------------------- commands


def cmd_fmt(args):
    try:
        from .files import format_session

        s = load_session(args.path)
    except SessionError as e:
        raise InputError(str(e)) from None
    return OK, {"verdict": "ok", "text": format_session(s)}


def cmd_hnf(args):
    from .rewrite import hnf

    s = _session(args)
    p = _term(s, args.term, "term")
    h, tr = hnf(p, s.env)
    return OK, {"verdict": "ok", "term": show(p), "hnf": show(h), "trace": format_trace(tr)}


def cmd_eval(args):
    from .prove import BudgetExhausted, EliminationError, eval_eliminate

    s = _session(args)
    if args.sigma not in s.sigmas:
        raise InputError(f"unknown evaluation map {args.sigma!r}")
    p = _term(s, args.term, "term")
    try:
        q = eval_eliminate(s.sigmas[args.sigma], p, s.env, _budget(args, 10000))
    except BudgetExhausted as e:
        return UNKNOWN, {"verdict": "budget", "message": str(e),
                         "frontier": [show(t) for t in e.frontier]}
    except EliminationError as e:
        return UNKNOWN, {"verdict": "unknown", "message": str(e)}
    return OK, {"verdict": "ok", "result": show(q)}


def cmd_lts(args):
    from .sos import dump_lts, explore

    s = _session(args)
    p = _term(s, args.term, "term")
    lts = explore(p, s.env, args.bound, cleanup=not args.raw)
    verdict = "truncated" if lts.truncated else ("undetermined" if lts.undetermined else "ok")
    code = OK if verdict == "ok" else UNKNOWN
    return code, {"verdict": verdict, "states": len(lts.states),
                  "transitions": len(lts.transitions), "dump": dump_lts(lts)}


def cmd_bisim(args):
    from .bisim import bisim, render, result_to_json

    s = _session(args)
    p, q = _term(s, args.a, "--a"), _term(s, args.b, "--b")
    res = bisim(p, q, s.env, args.bound, args.max_cover)
    d = result_to_json(res)
    d["verdict"] = res.status
    d["text"] = render(res)
    code = {"equivalent": OK, "inequivalent": NEGATIVE}.get(res.status, UNKNOWN)
    return code, d


def cmd_prove_eq(args):
    from .bisim import render
    from .prove import format_eq_proof, prove_eq

    s = _session(args)
    p, q = _term(s, args.a, "--a"), _term(s, args.b, "--b")
    r = prove_eq(p, q, s.env, _budget(args))
    d = {"verdict": r.status, "message": r.message}
    if r.proof is not None:
        d["goals"] = len(r.proof.goals)
        d["text"] = format_eq_proof(r.proof)
    elif r.hint is not None:
        d["text"] = "bisimulation hint:\n" + render(r.hint)
    code = {"proved": OK, "refuted": NEGATIVE}.get(r.status, UNKNOWN)
    return code, d


def cmd_hoare_check(args):
    from .hoare import HoareError, check_proof, parse_proof

    s = _session(args)
    try:
        with open(args.proof) as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"{args.proof}: {e.strerror}") from None
    acts = s.env.actions if s.path else None
    try:
        node = parse_proof(text, actions=acts, logical=s.logical)
    except HoareError as e:
        raise InputError(f"{args.proof}: {e}") from None
    errs = check_proof(node, s.env)
    d = {"verdict": "ok" if not errs else "rejected", "nodes": node.size(),
         "errors": [{"node": e.node, "kind": e.kind, "message": e.message,
                     "line": e.line} for e in errs]}
    return (OK if not errs else NEGATIVE), d


def cmd_hoare_auto(args):
    from .hoare import ProofSearchFailed, auto_prove_seq, format_proof

    s = _session(args)
    ap = _triple(s, args)
    try:
        node = auto_prove_seq(ap, s.env, _budget(args, 10000))
    except ProofSearchFailed as e:
        return UNKNOWN, {"verdict": "fail", "message": str(e), "stuck": str(e.goal)}
    header = f"logical {', '.join(s.logical)}" if s.logical else ""
    return OK, {"verdict": "ok", "nodes": node.size(), "text": format_proof(node, header)}


def cmd_truth(args):
    from .truth import truth_check

    s = _session(args)
    ap = _triple(s, args)
    box = tuple(args.box) if args.box else (-8, 8)
    r = truth_check(ap, s.env, _budget(args, 5000), box)
    d = {"verdict": r.status, "checked": r.checked, "text": r.describe() + "\n"}
    if r.box:
        d["box"] = list(r.box)
    code = OK if r.true else (NEGATIVE if r.status == "false" else UNKNOWN)
    return code, d


# ---------------------------------------------------------------- rendering


def render(d: dict) -> str:
    """Human text for a structured result."""
    v = d.get("verdict")
    if "text" in d and v in ("ok",) and "nodes" in d:
        return d["text"]
    if "hnf" in d:
        return f"hnf: {d['hnf']}\n{d['trace']}"
    if "result" in d:
        return d["result"] + "\n"
    if "dump" in d:
        return d["dump"] if v == "ok" else f"verdict: {v}\n{d['dump']}"
    if "errors" in d:
        lines = [f"verdict: {v} ({d['nodes']} nodes)"]
        for e in d["errors"]:
            where = f" (line {e['line']})" if e["line"] else ""
            lines.append(f"{e['node']}{where}: {e['kind']}: {e['message']}")
        return "\n".join(lines) + "\n"
    out = []
    if v not in ("ok", None) and not str(d.get("text", "")).startswith(f"verdict: {v}"):
        out.append(f"verdict: {v}")
    if d.get("message") and v != "proved":
        out.append(d["message"])
    if "text" in d:
        out.append(d["text"].rstrip("\n"))
    return "\n".join(out) + "\n"


def build_parser():
    ap = argparse.ArgumentParser(prog="deacp", description="process algebra with data: normal forms, "
                                 "transition systems, bisimulation, equation proving and Hoare logic")
    ap.add_argument("-f", "--file", help="session file (default: $DEACP_SESSION)")
    ap.add_argument("--json", action="store_true", help="print the structured result")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fmt", help="print a session file in canonical form")
    p.add_argument("path")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("hnf", help="head normal form and its derivation")
    p.add_argument("term", help="term name or term text")
    p.set_defaults(func=cmd_hnf)

    p = sub.add_parser("eval", help="eliminate eval{sigma}(term)")
    p.add_argument("--sigma", required=True)
    p.add_argument("--term", required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lts", help="explore the transition system of a term")
    p.add_argument("term")
    p.add_argument("--bound", type=int, default=2000)
    p.add_argument("--raw", action="store_true", help="do not simplify target terms")
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("bisim", help="splitting bisimilarity of two terms")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--bound", type=int, default=2000)
    p.add_argument("--max-cover", type=int, default=None, help="largest cover to try")
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("prove-eq", help="derive an equation")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_prove_eq)

    p = sub.add_parser("hoare-check", help="check a proof script")
    p.add_argument("proof")
    p.set_defaults(func=cmd_hoare_check)

    for name, func, helptext in (("hoare-auto", cmd_hoare_auto, "search for a proof"),
                                 ("truth", cmd_truth, "check the truth of an asserted process")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("spec", nargs="?", help="'{pre} process {post}'")
        p.add_argument("--triple", help="triple name from the session")
        p.add_argument("--budget", type=int)
        if name == "truth":
            p.add_argument("--box", type=int, nargs=2, metavar=("LO", "HI"))
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    try:
        code, d = args.func(args)
    except (InputError, SessionError, ParseError) as e:
        code, d = BAD_INPUT, {"verdict": "input-error", "message": str(e)}
    except ValueError as e:
        code, d = BAD_INPUT, {"verdict": "input-error", "message": str(e)}
    d = {"command": args.cmd, **d, "exit": code}
    if args.json:
        print(json.dumps(d, indent=2))
    else:
        text = render(d)
        (sys.stdout if code != BAD_INPUT else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
