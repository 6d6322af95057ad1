"""Session files: one ``.dacp`` file fixes the data backend, the actions, the
communication function and a set of named terms.

Each declaration starts at column 0; indented lines continue the previous
one.  ``#`` starts a comment.  Declarations::

    backend integers | finite N
    actions a, b, c
    comm a | b = c
    logical n, n'
    sigma s0 = i = 11, j = 3
    term name = <process>
    cond name = <condition>
    triple name = {<pre>} <process> {<post>}
    context name = <process with one []>

``backend`` and ``actions`` are mandatory; there is no default alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .data import make_backend
from .env import CommError, CommFunction, Env
from .syntax import ParseError, Parser, parse_cond, parse_proc


class SessionError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = f"{path or '<session>'}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass
class Session:
    env: Env
    logical: tuple = ()
    sigmas: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    conds: dict = field(default_factory=dict)
    triples: dict = field(default_factory=dict)
    contexts: dict = field(default_factory=dict)
    path: str | None = None
    order: list = field(default_factory=list)  # (kind, name) in file order

    def parse_term(self, text, allow_hole=False):
        return parse_proc(text, actions=self.env.actions, logical=self.logical,
                          sigmas=self.sigmas, allow_hole=allow_hole)

    def parse_cond(self, text):
        return parse_cond(text, logical=self.logical)

    def term(self, ref):
        """A named term, or ``ref`` parsed as a term."""
        if ref in self.terms:
            return self.terms[ref]
        return self.parse_term(ref)


def _logical_lines(text):
    """Yield (line number, joined declaration text)."""
    cur, start = None, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace():
            if cur is None:
                raise SessionError("continuation line without a declaration", line=no)
            cur += " " + line.strip()
            continue
        if cur is not None:
            yield start, cur
        cur, start = line, no
    if cur is not None:
        yield start, cur


def _names(s):
    return [w for w in s.replace(",", " ").split() if w]


def split_triple(text):
    """Split ``{pre} proc {post}`` into its three source strings."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError("a triple is written {pre} process {post}")
    e1 = text.index("}")
    s2 = text.rindex("{")
    if s2 <= e1:
        raise ValueError("a triple is written {pre} process {post}")
    return text[1:e1], text[e1 + 1 : s2], text[s2 + 1 : -1]


def load_session_text(text, path=None) -> Session:
    decls = list(_logical_lines(text))
    backend = actions = None
    comm = {}
    logical = []
    for no, line in decls:
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if kw == "backend":
                backend = make_backend(rest)
            elif kw == "actions":
                actions = frozenset(_names(rest))
            elif kw == "comm":
                lhs, _, res = rest.partition("=")
                a, _, b = lhs.partition("|")
                if not (a.strip() and b.strip() and res.strip()):
                    raise SessionError("comm is written 'comm a | b = c'", path, no)
                key = (a.strip(), b.strip())
                if key in comm or key[::-1] in comm:
                    raise SessionError(f"communication of {key[0]} and {key[1]} given twice", path, no)
                comm[key] = res.strip()
            elif kw == "logical":
                logical += _names(rest)
        except ValueError as e:
            if isinstance(e, SessionError):
                raise
            raise SessionError(str(e), path, no) from None
    if backend is None:
        raise SessionError("missing 'backend' declaration", path)
    if actions is None:
        raise SessionError("missing 'actions' declaration", path)
    try:
        env = Env(backend, actions, CommFunction.of(comm))
    except CommError as e:
        raise SessionError(str(e), path) from None
    s = Session(env, tuple(logical), path=path)
    for no, line in decls:
        kw, _, rest = line.partition(" ")
        if kw in ("backend", "actions", "comm", "logical"):
            continue
        name, eq, body = rest.partition("=")
        name = name.strip()
        if not eq or not name.replace("_", "").replace("'", "").isalnum():
            raise SessionError(f"expected '{kw} <name> = ...'", path, no)
        if (kw, name) in s.order:
            raise SessionError(f"{kw} {name} is declared twice", path, no)
        try:
            if kw == "sigma":
                p = Parser("{" + body + "}", logical=s.logical)
                s.sigmas[name] = p.sigma_spec()
            elif kw == "term":
                s.terms[name] = s.parse_term(body)
            elif kw == "cond":
                s.conds[name] = s.parse_cond(body)
            elif kw == "triple":
                from .hoare import AssertedProcess

                pre, proc, post = split_triple(body)
                s.triples[name] = AssertedProcess(s.parse_cond(pre), s.parse_term(proc), s.parse_cond(post))
            elif kw == "context":
                from .truth import SeqContext

                s.contexts[name] = SeqContext(s.parse_term(body, allow_hole=True))
            else:
                raise SessionError(f"unknown declaration {kw!r}", path, no)
        except ParseError as e:
            raise SessionError(str(e), path, no) from None
        except SessionError:
            raise
        except ValueError as e:
            raise SessionError(str(e), path, no) from None
        s.order.append((kw, name))
    return s


def load_session(path) -> Session:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise SessionError(f"cannot read session: {e.strerror}", str(p)) from None
    return load_session_text(text, str(p))


def format_session(s: Session) -> str:
    """Canonical rendering of a session (the output of ``deacp fmt``)."""
    from .syntax import show, show_sigma

    be = s.env.backend
    lines = [f"backend {'integers' if be.name == 'integers' else f'finite {be.size}'}",
             f"actions {', '.join(sorted(s.env.actions))}"]
    done = set()
    for (a, b), c in s.env.comm.table:
        if (b, a) not in done:
            lines.append(f"comm {a} | {b} = {c}")
            done.add((a, b))
    if s.logical:
        lines.append(f"logical {', '.join(s.logical)}")
    for kw, name in s.order:
        if kw == "sigma":
            body = show_sigma(s.sigmas[name])
        elif kw == "term":
            body = show(s.terms[name])
        elif kw == "cond":
            body = show(s.conds[name])
        elif kw == "triple":
            t = s.triples[name]
            body = f"{{{show(t.pre)}}} {show(t.proc)} {{{show(t.post)}}}"
        else:
            body = show(s.contexts[name].term)
        lines.append(f"{kw} {name} = {body}")
    return "\n".join(lines) + "\n"
