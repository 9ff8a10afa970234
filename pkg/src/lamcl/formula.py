"""Formulas of the logic and the subformula relations used by reduction guards."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union


@dataclass(frozen=True, slots=True)
class Atom:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class Bot:
    def __str__(self):
        return "bot"


@dataclass(frozen=True, slots=True)
class Top:
    def __str__(self):
        return "top"


@dataclass(frozen=True, slots=True)
class Arrow:
    left: Formula
    right: Formula

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class And:
    left: Formula
    right: Formula

    def __str__(self):
        return show(self)


Formula = Union[Atom, Bot, Top, Arrow, And]

BOT = Bot()
TOP = Top()
BOOL = Atom("Bool")


def neg(f: Formula) -> Arrow:
    return Arrow(f, BOT)


def conj(fs: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is top."""
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def is_prime(f: Formula) -> bool:
    return not isinstance(f, And)


@lru_cache(maxsize=None)
def formula_size(f: Formula) -> int:
    match f:
        case Arrow(l, r) | And(l, r):
            return 1 + formula_size(l) + formula_size(r)
        case _:
            return 1


def prime_factors(f: Formula) -> tuple[Formula, ...]:
    """Leaves of the maximal conjunction tree of f, left to right."""
    if isinstance(f, And):
        return prime_factors(f.left) + prime_factors(f.right)
    return (f,)


@lru_cache(maxsize=None)
def subformulas(f: Formula) -> frozenset[Formula]:
    """All subformulas of f, f included."""
    match f:
        case Arrow(l, r) | And(l, r):
            return frozenset({f}) | subformulas(l) | subformulas(r)
        case _:
            return frozenset({f})


def proper_subformulas(f: Formula) -> frozenset[Formula]:
    match f:
        case Arrow(l, r) | And(l, r):
            return subformulas(l) | subformulas(r)
        case _:
            return frozenset()


@lru_cache(maxsize=None)
def strong_subformulas(f: Formula) -> frozenset[Formula]:
    """Proper subformulas of the prime proper subformulas of f."""
    out: set[Formula] = set()
    for x in proper_subformulas(f):
        if is_prime(x):
            out |= proper_subformulas(x)
    return frozenset(out)


def is_strong_subformula(b: Formula, a: Formula) -> bool:
    return b in strong_subformulas(a)


def is_conjunction_of(f: Formula, pool: frozenset[Formula] | set[Formula]) -> bool:
    """True if f is in pool or is a conjunction whose conjuncts all are."""
    if f in pool:
        return True
    if isinstance(f, And):
        return is_conjunction_of(f.left, pool) and is_conjunction_of(f.right, pool)
    return False


def _atom_text(f: Formula) -> str:
    text = show(f)
    return text if isinstance(f, (Atom, Bot, Top)) or _is_neg(f) else f"({text})"


def _is_neg(f: Formula) -> bool:
    return isinstance(f, Arrow) and isinstance(f.right, Bot)


def show(f: Formula) -> str:
    """Concrete syntax: `->` and `&` right associative, `&` binds tighter, `~A` for A -> bot."""
    match f:
        case Atom(name):
            return name
        case Bot():
            return "bot"
        case Top():
            return "top"
        case Arrow(l, Bot()):
            return "~" + _atom_text(l)
        case Arrow(l, r):
            left = show(l)
            if isinstance(l, Arrow) and not _is_neg(l):
                left = f"({left})"
            return f"{left} -> {show(r)}"
        case And(l, r):
            left = show(l)
            if isinstance(l, And) or (isinstance(l, Arrow) and not _is_neg(l)):
                left = f"({left})"
            right = show(r)
            if isinstance(r, Arrow) and not _is_neg(r):
                right = f"({right})"
            return f"{left} & {right}"
    raise TypeError(f"not a formula: {f!r}")
