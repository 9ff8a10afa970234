"""Proof terms for classical logic with parallel composition and communication channels."""
from .formula import And, Arrow, Atom, Bot, Formula, Top, conj, neg
from .normalize import Result, normalize, normalize_traced
from .reduction import Redex, RuleId, enumerate_normal_forms, find_redexes, step
from .syntax import ParseError, parse_formula, parse_source, parse_term, show
from .term import alpha_eq
from .typecheck import TypingError, typecheck
from .verify import VerificationReport, verify_normal_form

__version__ = "0.1.0"

__all__ = [
    "And", "Arrow", "Atom", "Bot", "Formula", "ParseError", "Redex", "Result", "RuleId", "Top",
    "TypingError", "VerificationReport", "alpha_eq", "conj", "enumerate_normal_forms", "find_redexes",
    "neg", "normalize", "normalize_traced", "parse_formula", "parse_source", "parse_term", "show",
    "step", "typecheck", "verify_normal_form",
]
