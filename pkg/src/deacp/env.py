"""The fixed givens of a session: data backend, action alphabet and communication."""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import Backend, FiniteBackend, IntegerBackend


class CommError(ValueError):
    pass


@dataclass(frozen=True)
class CommFunction:
    """Partial communication table; unlisted pairs communicate to ``delta``.

    The table is closed under symmetry at construction, and rejected if a pair
    is given two different results or associativity fails.
    """

    table: tuple = ()

    @classmethod
    def of(cls, pairs=None):
        d = {}
        for (a, b), c in dict(pairs or {}).items():
            for key in ((a, b), (b, a)):
                if key in d and d[key] != c:
                    raise CommError(f"communication of {a} and {b} is not commutative")
                d[key] = c
        comm = cls(tuple(sorted(d.items())))
        comm.check_associative()
        return comm

    def __call__(self, a, b):
        """Result action name, or ``None`` for deadlock."""
        for key, c in self.table:
            if key == (a, b):
                return c
        return None

    def names(self) -> set:
        out = set()
        for (a, b), c in self.table:
            out |= {a, b, c}
        return out

    def check_associative(self):
        names = sorted(self.names())
        for a in names:
            for b in names:
                for c in names:
                    ab = self(a, b)
                    bc = self(b, c)
                    left = self(ab, c) if ab is not None else None
                    right = self(a, bc) if bc is not None else None
                    if left != right:
                        raise CommError(
                            f"communication is not associative on ({a}, {b}, {c})"
                        )


NO_COMM = CommFunction()


@dataclass(frozen=True)
class Env:
    backend: Backend = field(default_factory=IntegerBackend)
    actions: frozenset = frozenset()
    comm: CommFunction = NO_COMM

    def __post_init__(self):
        object.__setattr__(self, "actions", frozenset(self.actions))
        missing = self.comm.names() - self.actions
        if self.actions and missing:
            raise CommError(f"communication mentions undeclared actions {sorted(missing)}")

    def gamma(self, a, b):
        return self.comm(a, b)


def finite_env(size=2, actions=(), comm=None) -> Env:
    return Env(FiniteBackend(size), frozenset(actions), CommFunction.of(comm or {}))


def integer_env(actions=(), comm=None) -> Env:
    return Env(IntegerBackend(), frozenset(actions), CommFunction.of(comm or {}))
