"""Type assignment for proof terms and the communication measures built on it."""
from __future__ import annotations

from typing import Mapping

from . import formula as F
from .formula import Formula
from .term import (
    App, BoolLit, Efq, If, Lam, Pair, ParCh, ParPlain, Path, Proj, TT, Term, Var,
    binders_along, children, free_vars, subterm_at, with_children,
)

Context = Mapping[str, Formula]


class TypingError(Exception):
    """A term violates a typing rule; carries the rule name and the failing path."""

    def __init__(self, rule: str, path: Path, msg: str):
        super().__init__(f"[{rule}] at {list(path)}: {msg}")
        self.rule, self.path, self.msg = rule, tuple(path), msg


def typecheck(ctx: Context, t: Term, extension: bool = True) -> Formula:
    return _check(dict(ctx), t, (), extension)


def _check(ctx: dict[str, Formula], t: Term, path: Path, ext: bool) -> Formula:
    match t:
        case Var(x):
            if x not in ctx:
                raise TypingError("Var", path, f"unbound variable {x!r}")
            return ctx[x]
        case Lam(x, a, body):
            return F.Arrow(a, _check({**ctx, x: a}, body, path + (0,), ext))
        case App(f, u):
            tf = _check(ctx, f, path + (0,), ext)
            tu = _check(ctx, u, path + (1,), ext)
            if not isinstance(tf, F.Arrow):
                raise TypingError("App", path, f"applying a term of type {tf}")
            if tf.left != tu:
                raise TypingError("App", path, f"argument has type {tu}, expected {tf.left}")
            return tf.right
        case Pair(a, b):
            return F.And(_check(ctx, a, path + (0,), ext), _check(ctx, b, path + (1,), ext))
        case Proj(u, i):
            tu = _check(ctx, u, path + (0,), ext)
            if not isinstance(tu, F.And):
                raise TypingError("Proj", path, f"projecting from type {tu}")
            return tu.left if i == 0 else tu.right
        case Efq(p, u):
            if not isinstance(p, F.Atom):
                raise TypingError("Efq", path, f"target {p} must be atomic and not bot")
            tu = _check(ctx, u, path + (0,), ext)
            if tu != F.BOT:
                raise TypingError("Efq", path, f"argument has type {tu}, expected bot")
            return p
        case TT():
            return F.TOP
        case ParPlain(u, v):
            tu = _check(ctx, u, path + (0,), ext)
            tv = _check(ctx, v, path + (1,), ext)
            if tu != tv:
                raise TypingError("Contr", path, f"sides have types {tu} and {tv}")
            return tu
        case ParCh(a, kind, u, v):
            tu = _check({**ctx, a: F.neg(kind)}, u, path + (0,), ext)
            tv = _check({**ctx, a: kind}, v, path + (1,), ext)
            if tu != tv:
                raise TypingError("EM", path, f"sides have types {tu} and {tv}")
            return tu
        case BoolLit():
            if not ext:
                raise TypingError("Bool", path, "boolean extension is disabled")
            return F.BOOL
        case If(c, a, b):
            if not ext:
                raise TypingError("If", path, "boolean extension is disabled")
            tc = _check(ctx, c, path + (0,), ext)
            if tc != F.BOOL:
                raise TypingError("If", path, f"condition has type {tc}, expected Bool")
            ta = _check(ctx, a, path + (1,), ext)
            tb = _check(ctx, b, path + (2,), ext)
            if ta != tb:
                raise TypingError("If", path, f"branches have types {ta} and {tb}")
            return ta
    raise TypingError("?", path, f"not a term: {t!r}")


def local_context(ctx: Context, t: Term, path: Path) -> dict[str, Formula]:
    """Typing context in force at path: ctx extended by the binders above it."""
    out = dict(ctx)
    for name, node, i in binders_along(t, path):
        if isinstance(node, Lam):
            out[name] = node.annot
        else:
            out[name] = F.neg(node.kind) if i == 0 else node.kind
    return out


def free_context(ctx: Context, t: Term) -> dict[str, Formula]:
    """ctx restricted to the free variables of t, in first-occurrence order."""
    return {x: ctx[x] for x in free_vars(t)}


def type_at(ctx: Context, t: Term, path: Path) -> Formula:
    return typecheck(local_context(ctx, t, path), subterm_at(t, path))


def subterm_types(ctx: Context, t: Term) -> dict[Path, Formula]:
    """Type of every subterm, keyed by path."""
    out: dict[Path, Formula] = {}

    def go(c: dict[str, Formula], s: Term, p: Path) -> Formula:
        match s:
            case Lam(x, a, _):
                go({**c, x: a}, s.body, p + (0,))
            case ParCh(a, k, u, v):
                go({**c, a: F.neg(k)}, u, p + (0,))
                go({**c, a: k}, v, p + (1,))
            case _:
                for i, ch in enumerate(children(s)):
                    go(c, ch, p + (i,))
        ty = _type_from_children(c, s, p, out)
        out[p] = ty
        return ty

    go(dict(ctx), t, ())
    return out


def _type_from_children(c, s, p, known) -> Formula:
    match s:
        case Var(x):
            if x not in c:
                raise TypingError("Var", p, f"unbound variable {x!r}")
            return c[x]
        case Lam(_, a, _):
            return F.Arrow(a, known[p + (0,)])
    # the remaining rules only inspect child types; reuse the checker on a
    # shallow copy whose children are replaced by typed placeholders
    kids = children(s)
    holes = {f"%hole{i}": known[p + (i,)] for i in range(len(kids))}
    shallow = with_children(s, tuple(Var(h) for h in holes))
    if isinstance(s, ParCh):
        # the placeholder types already account for the channel polarity
        tu, tv = holes["%hole0"], holes["%hole1"]
        if tu != tv:
            raise TypingError("EM", p, f"sides have types {tu} and {tv}")
        return tu
    return _check(holes, shallow, p, True)


# -- communication measures ----------------------------------------------------------

def communication_kind(t: Term, p: Path) -> Formula:
    node = subterm_at(t, p)
    if not isinstance(node, ParCh):
        raise TypingError("EM", p, "path does not address a channel binder")
    return node.kind


def offending_factors(kind: Formula, allowed) -> list[Formula]:
    """Prime factors of kind for which allowed(factor) is false."""
    return [f for f in F.prime_factors(kind) if not allowed(f)]


def complexity_of(kind: Formula, node_type: Formula, fv_types) -> int:
    """Symbol count of the kind's prime factors that are neither proper
    subformulas of node_type nor strong subformulas of any fv type."""
    proper = F.proper_subformulas(node_type)
    strong = set()
    for a in fv_types:
        strong |= F.strong_subformulas(a)
    bad = offending_factors(kind, lambda f: f in proper or f in strong)
    return max(0, sum(F.formula_size(f) for f in bad))


def node_complexity(lctx: Context, node: ParCh, node_type: Formula | None = None) -> int:
    """Communication complexity of the channel bound at node, typed under lctx."""
    if node_type is None:
        node_type = typecheck(lctx, node)
    fvs = free_vars(node)
    return complexity_of(node.kind, node_type, (lctx[x] for x in fvs))


def communication_complexity(root_ctx: Context, t: Term, p: Path) -> int:
    node = subterm_at(t, p)
    if not isinstance(node, ParCh):
        raise TypingError("EM", p, "path does not address a channel binder")
    return node_complexity(local_context(root_ctx, t, p), node)


def a_set(ctx: Context, a: Formula) -> frozenset[Formula]:
    """Proper subformulas of a together with the strong subformulas of ctx's formulas."""
    out = set(F.proper_subformulas(a))
    for ai in ctx.values():
        out |= F.strong_subformulas(ai)
    result = frozenset(out)
    assert all(F.proper_subformulas(f) <= result for f in result), "A-set not subformula-closed"
    return result
