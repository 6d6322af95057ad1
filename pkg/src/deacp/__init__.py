"""Process algebra with data, iteration and evaluation operators.

Term syntax, equational normal forms, operational semantics, splitting
bisimulation, equation proving and a Hoare logic for asserted processes.
"""

from .bisim import bisim, validate
from .data import FiniteBackend, IntegerBackend
from .env import Env, finite_env, integer_env
from .files import Session, load_session
from .hoare import AssertedProcess, auto_prove_seq, check_proof, format_proof, parse_proof
from .prove import check_eq_proof, eval_eliminate, prove_eq
from .rewrite import hnf
from .sos import explore
from .syntax import parse_cond, parse_proc, show
from .truth import context_check, corollary_transfer, evaleqv, truth_check

__all__ = [
    "AssertedProcess",
    "Env",
    "FiniteBackend",
    "IntegerBackend",
    "Session",
    "auto_prove_seq",
    "bisim",
    "check_eq_proof",
    "check_proof",
    "context_check",
    "corollary_transfer",
    "eval_eliminate",
    "evaleqv",
    "explore",
    "finite_env",
    "format_proof",
    "hnf",
    "integer_env",
    "load_session",
    "parse_cond",
    "parse_proc",
    "parse_proof",
    "prove_eq",
    "show",
    "truth_check",
    "validate",
]
