"""Executable metatheory: checks of normal terms that report concrete witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import formula as F
from .formula import Formula
from .reduction import find_redexes
from .term import (
    App, Lam, ParCh, Path, Proj, Shape, Term, Var, binders_along, classify, is_simply_typed,
    positions, subterm_at,
)
from .typecheck import free_context, subterm_types, typecheck

Context = Mapping[str, Formula]


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    path: Path | None = None
    formula: Formula | None = None
    detail: str = ""


@dataclass
class VerificationReport:
    subject: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def add(self, name: str, ok: bool, path: Path | None = None,
            formula: Formula | None = None, detail: str = "") -> None:
        self.checks.append(Check(name, ok, path, formula, detail))

    def merge(self, other: VerificationReport) -> VerificationReport:
        self.checks.extend(other.checks)
        return self

    def as_records(self) -> list[dict]:
        return [{
            "check": c.name,
            "ok": c.ok,
            "path": list(c.path) if c.path is not None else None,
            "formula": F.show(c.formula) if c.formula is not None else None,
            "detail": c.detail,
        } for c in self.checks]


def is_normal(ctx: Context, t: Term) -> bool:
    return not find_redexes(ctx, t)


def _passed(report: VerificationReport, name: str, before: int) -> None:
    if len(report.checks) == before:
        report.add(name, True)


def _channel_occurrence(t: Term, p: Path, x: str) -> bool:
    """True if the variable x at path p is bound by a channel binder."""
    for name, node, _ in reversed(binders_along(t, p)):
        if name == x:
            return isinstance(node, ParCh)
    return False


def check_subformula_property(ctx: Context, t: Term, subject: str = "term",
                              require_normal: bool = True) -> VerificationReport:
    """Channel kinds and subterm types of a normal term stay within its premises and conclusion."""
    if require_normal and not is_normal(ctx, t):
        raise PreconditionError("subformula property is only claimed for normal terms")
    fctx = free_context(ctx, t)
    conclusion = typecheck(ctx, t)
    premises = [*fctx.values(), conclusion]
    proper: set[Formula] = set()
    pool: set[Formula] = set()
    for a in premises:
        proper |= F.proper_subformulas(a)
        pool |= F.subformulas(a)
    report = VerificationReport(subject)

    before = len(report.checks)
    for p, s in positions(t):
        if isinstance(s, ParCh):
            for factor in F.prime_factors(s.kind):
                if factor not in proper:
                    report.add("channel-kind", False, p, factor,
                               f"prime factor of the kind of {s.channel} is not a proper subformula of a premise or the conclusion")
    _passed(report, "channel-kind", before)

    before = len(report.checks)
    types = subterm_types(ctx, t)
    for p, s in positions(t):
        if isinstance(s, Var) and _channel_occurrence(t, p, s.name):
            continue
        if not F.is_conjunction_of(types[p], pool):
            report.add("subterm-type", False, p, types[p],
                       "type is neither a subformula nor a conjunction of subformulas")
    _passed(report, "subterm-type", before)
    return report


def _require_normal_simply_typed(ctx: Context, t: Term) -> None:
    if not is_simply_typed(t):
        raise PreconditionError("term must be simply typed")
    if not is_normal(ctx, t):
        raise PreconditionError("term must be normal")


def check_bound_hypothesis(ctx: Context, t: Term, subject: str = "term") -> VerificationReport:
    """Every bound variable's type is a proper subformula of a prime factor of the
    conclusion or a strong subformula of a premise."""
    _require_normal_simply_typed(ctx, t)
    fctx = free_context(ctx, t)
    conclusion = typecheck(ctx, t)
    inside_factors: set[Formula] = set()
    for factor in F.prime_factors(conclusion):
        inside_factors |= F.proper_subformulas(factor)
    strong: set[Formula] = set()
    for a in fctx.values():
        strong |= F.strong_subformulas(a)
    report = VerificationReport(subject)
    before = len(report.checks)
    for p, s in positions(t):
        if isinstance(s, Lam) and s.annot not in inside_factors and s.annot not in strong:
            report.add("bound-hypothesis", False, p, s.annot, f"binder {s.binder}")
    _passed(report, "bound-hypothesis", before)
    return report


def check_applied_occurrences(ctx: Context, t: Term, z: str, subject: str = "term") -> VerificationReport:
    """Either every occurrence of z is eliminated on the spot, or z's type is
    bot, a subformula of the conclusion, or a proper subformula of another premise."""
    _require_normal_simply_typed(ctx, t)
    if z not in ctx:
        raise PreconditionError(f"{z} is not in the context")
    ztype = ctx[z]
    report = VerificationReport(subject)
    conclusion = typecheck(ctx, t)
    others = [a for x, a in free_context(ctx, t).items() if x != z]
    if ztype == F.BOT or ztype in F.subformulas(conclusion) or any(
            ztype in F.proper_subformulas(a) for a in others):
        report.add("applied-occurrence", True, detail="type condition")
        return report
    bare = []
    for p, s in positions(t):
        if s == Var(z) and not any(name == z for name, _, _ in binders_along(t, p)):
            parent = subterm_at(t, p[:-1]) if p else None
            eliminated = (isinstance(parent, App) and p[-1] == 0) or isinstance(parent, Proj)
            if not eliminated:
                bare.append(p)
    for p in bare:
        report.add("applied-occurrence", False, p, ztype, f"{z} occurs without an elimination")
    if not bare:
        report.add("applied-occurrence", True, detail="every occurrence eliminated")
    return report


def verify_normal_form(ctx: Context, t: Term, subject: str = "term") -> VerificationReport:
    """All checks that apply to a normalizer output."""
    report = VerificationReport(subject)
    normal = is_normal(ctx, t)
    report.add("normal", normal)
    shape = classify(t)
    report.add("parallel-form", shape is not Shape.OTHER, detail=shape.value)
    if normal:
        report.merge(check_subformula_property(ctx, t, subject))
    if normal and is_simply_typed(t):
        report.merge(check_bound_hypothesis(ctx, t, subject))
        for z in free_context(ctx, t):
            report.merge(check_applied_occurrences(ctx, t, z, subject))
    return report
