"""One-step reduction: redex discovery with every side condition, and rewriting."""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Mapping

from . import formula as F
from .formula import Formula
from .term import (
    PARALLEL, App, BoolLit, Efq, If, Lam, Pair, ParCh, ParPlain, Path, Proj, Term, Var,
    all_names, apply_stack, as_stack_elem, binder_of, binders_along, canonical, children, free_vars,
    fresh_name, is_simply_typed, multiple_substitute, occurs_free, positions,
    rename_binder, replace_at, spine_components, substitute, subterm_at, tuple_term,
    with_children, PathError,
)
from .typecheck import local_context, node_complexity, subterm_types, typecheck

Context = Mapping[str, Formula]


class RuleId(str, enum.Enum):
    BETA = "Beta"
    PROJ_PAIR = "ProjPair"
    IF_TRUE = "IfTrue"
    IF_FALSE = "IfFalse"
    PERM_APP_LEFT = "PermAppLeft"
    PERM_STACK = "PermStack"
    PERM_LAM = "PermLam"
    PERM_PAIR_LEFT = "PermPairLeft"
    PERM_PAIR_RIGHT = "PermPairRight"
    PERM_IF = "PermIf"
    PERM_PAR_LEFT = "PermParOverParLeft"
    PERM_PAR_RIGHT = "PermParOverParRight"
    BASIC_CROSS = "BasicCross"
    CROSS = "Cross"
    DROP_LEFT = "DropLeft"
    DROP_RIGHT = "DropRight"

    def __str__(self):
        return self.value


INTUITIONISTIC = frozenset({RuleId.BETA, RuleId.PROJ_PAIR, RuleId.IF_TRUE, RuleId.IF_FALSE})
STRUCTURAL_PERMUTATIONS = frozenset({
    RuleId.PERM_APP_LEFT, RuleId.PERM_STACK, RuleId.PERM_LAM,
    RuleId.PERM_PAIR_LEFT, RuleId.PERM_PAIR_RIGHT, RuleId.PERM_IF,
})
PAR_PERMUTATIONS = frozenset({RuleId.PERM_PAR_LEFT, RuleId.PERM_PAR_RIGHT})
COMMUNICATIONS = frozenset({RuleId.BASIC_CROSS, RuleId.CROSS})
DROPS = frozenset({RuleId.DROP_LEFT, RuleId.DROP_RIGHT})


@dataclass(frozen=True)
class Redex:
    """A rule applicable at `path`.

    sender: for crosses, path of the `a u` occurrence relative to the rule's root.
    ys: for Cross, the variables of the message bound inside its component.
    child: for PermIf, which child of the conditional is parallel.
    """

    path: Path
    rule: RuleId
    sender: Path | None = None
    ys: tuple[str, ...] = ()
    child: int | None = None


class RedexError(ValueError):
    """A redex is not applicable to the term it was given."""


# -- discovery ---------------------------------------------------------------------

def find_redexes(ctx: Context, t: Term) -> list[Redex]:
    """All applicable redexes, leftmost-innermost first."""
    types = subterm_types(ctx, t)
    out: list[Redex] = []

    def go(lctx: dict[str, Formula], s: Term, p: Path) -> None:
        match s:
            case Lam(x, a, b):
                go({**lctx, x: a}, b, p + (0,))
            case ParCh(a, k, l, r):
                go({**lctx, a: F.neg(k)}, l, p + (0,))
                go({**lctx, a: k}, r, p + (1,))
            case _:
                for i, c in enumerate(children(s)):
                    go(lctx, c, p + (i,))
        out.extend(node_redexes(lctx, s, p, types[p]))

    go(dict(ctx), t, ())
    return out


def node_redexes(lctx: Context, node: Term, path: Path = (), node_type: Formula | None = None) -> list[Redex]:
    """Redexes rooted exactly at node, typed under the local context lctx."""
    out = local_redexes(node, path)
    if isinstance(node, ParCh):
        out.extend(_channel_redexes(lctx, node, path, node_type))
    return out


def local_redexes(node: Term, path: Path = ()) -> list[Redex]:
    """Intuitionistic and structural-permutation redexes at node; these need no typing."""
    out: list[Redex] = []
    match node:
        case App(Lam(), _):
            out.append(Redex(path, RuleId.BETA))
        case Proj(Pair(), _):
            out.append(Redex(path, RuleId.PROJ_PAIR))
        case If(BoolLit(v), _, _):
            out.append(Redex(path, RuleId.IF_TRUE if v else RuleId.IF_FALSE))
    match node:
        case App(f, arg):
            if isinstance(arg, PARALLEL):
                out.append(Redex(path, RuleId.PERM_APP_LEFT))
            if isinstance(f, PARALLEL):
                out.append(Redex(path, RuleId.PERM_STACK))
        case Proj(u, _) | Efq(_, u):
            if isinstance(u, PARALLEL):
                out.append(Redex(path, RuleId.PERM_STACK))
        case Lam(_, _, b):
            if isinstance(b, PARALLEL):
                out.append(Redex(path, RuleId.PERM_LAM))
        case Pair(a, b):
            if isinstance(a, PARALLEL):
                out.append(Redex(path, RuleId.PERM_PAIR_LEFT))
            if isinstance(b, PARALLEL):
                out.append(Redex(path, RuleId.PERM_PAIR_RIGHT))
        case If():
            for i, c in enumerate(children(node)):
                if isinstance(c, PARALLEL):
                    out.append(Redex(path, RuleId.PERM_IF, child=i))
    return out


def intuitionistic_redexes(t: Term) -> list[Redex]:
    """Beta, projection and conditional redexes of t, leftmost-outermost first."""
    return [r for p, s in positions(t) for r in local_redexes(s, p) if r.rule in INTUITIONISTIC]


def contract(t: Term, r: Redex) -> Term:
    """Apply an intuitionistic redex without consulting a typing context."""
    if r.rule not in INTUITIONISTIC:
        raise RedexError(f"{r.rule} needs a typing context; use step")
    return replace_at(t, r.path, _rewrite({}, subterm_at(t, r.path), r, set()))


def _channel_redexes(lctx: Context, node: ParCh, path: Path, node_type) -> list[Redex]:
    a, left, right = node.channel, node.left, node.right
    out: list[Redex] = []
    if node_complexity(lctx, node, node_type) > 0:
        if isinstance(left, PARALLEL):
            out.append(Redex(path, RuleId.PERM_PAR_LEFT))
        if isinstance(right, PARALLEL):
            out.append(Redex(path, RuleId.PERM_PAR_RIGHT))
        for sp in sender_paths(node):
            u = subterm_at(node, sp).arg
            if occurs_free(a, u):
                continue
            bound = {name for name, _, _ in binders_along(left, sp[1:])}
            if not bound.intersection(free_vars(u)):
                out.append(Redex(path, RuleId.BASIC_CROSS, sender=sp))
        out.extend(_cross_redexes(lctx, node, path))
    if not occurs_free(a, left):
        out.append(Redex(path, RuleId.DROP_LEFT))
    if not occurs_free(a, right):
        out.append(Redex(path, RuleId.DROP_RIGHT))
    return out


def sender_paths(node: ParCh) -> list[Path]:
    """Paths (from node) of every `a u` in the left side where a is the node's channel."""
    a = node.channel
    out: list[Path] = []

    def go(s: Term, p: Path, shadowed: bool) -> None:
        if shadowed:
            return
        if isinstance(s, App) and s.fun == Var(a):
            out.append(p)
        for i, c in enumerate(children(s)):
            go(c, p + (i,), binder_of(s) == a)

    go(node.left, (0,), False)
    return out


def is_simple_parallel(t: Term) -> bool:
    """t1 || ... || tn with every ti simply typed (no channel binder on the spine)."""
    if isinstance(t, ParPlain):
        return is_simple_parallel(t.left) and is_simple_parallel(t.right)
    return is_simply_typed(t)


def _cross_redexes(lctx: Context, node: ParCh, path: Path) -> list[Redex]:
    a, left = node.channel, node.left
    if not is_simple_parallel(left):
        return []
    left_ctx = {**lctx, a: F.neg(node.kind)}
    if find_redexes(left_ctx, left):
        return []
    out = []
    for cpath, comp in spine_components(left):
        last = last_free_occurrence(comp, a)
        if last is None or not last or last[-1] != 0:
            continue
        sp_in_comp = last[:-1]
        sender = subterm_at(comp, sp_in_comp)
        if not isinstance(sender, App):
            continue
        bound = [name for name, _, _ in binders_along(comp, sp_in_comp)]
        ys = tuple(y for y in free_vars(sender.arg) if y in bound)
        if ys:
            out.append(Redex(path, RuleId.CROSS, sender=(0,) + cpath + sp_in_comp, ys=ys))
    return out


def last_free_occurrence(t: Term, a: str) -> Path | None:
    """Path of the rightmost free occurrence of variable a in t."""
    found = None
    # pre-order visits leaves in left-to-right order; keep the last hit
    for p, s in positions(t):
        if isinstance(s, Var) and s.name == a and _free_at(t, p, a):
            found = p
    return found


def _free_at(t: Term, p: Path, a: str) -> bool:
    return all(name != a for name, _, _ in binders_along(t, p))


# -- rewriting ---------------------------------------------------------------------

def step(ctx: Context, t: Term, r: Redex) -> Term:
    """Apply r to t; raises RedexError if r is not a current redex of t."""
    try:
        node = subterm_at(t, r.path)
    except PathError as e:
        raise RedexError(f"stale redex path {list(r.path)}: {e}") from None
    lctx = local_context(ctx, t, r.path)
    if r not in node_redexes(lctx, node, r.path):
        raise RedexError(f"{r.rule} does not apply at {list(r.path)}")
    avoid = all_names(t) | set(ctx)
    return replace_at(t, r.path, _rewrite(lctx, node, r, avoid))


def redex_at(ctx: Context, t: Term, path: Path, rule: RuleId | str,
             sender: Path | None = None, child: int | None = None) -> Redex:
    """Rebuild the redex identified by (path, rule, sender), e.g. when replaying a trace."""
    rule = RuleId(rule)
    node = subterm_at(t, path)
    for r in node_redexes(local_context(ctx, t, path), node, tuple(path)):
        if r.rule == rule and r.sender == (tuple(sender) if sender is not None else None):
            if child is None or r.child == child:
                return r
    raise RedexError(f"{rule} does not apply at {list(path)}")


def _avoiding(par: Term, avoid_free: set[str], used: set[str]) -> Term:
    """Rename par's channel if it clashes with avoid_free."""
    if isinstance(par, ParCh) and par.channel in avoid_free:
        new = fresh_name(used | avoid_free | all_names(par), par.channel)
        used.add(new)
        return rename_binder(par, new)
    return par


def _rebuild(par: Term, left: Term, right: Term) -> Term:
    if isinstance(par, ParCh):
        return ParCh(par.channel, par.kind, left, right)
    return ParPlain(left, right)


def _rewrite(lctx: Context, node: Term, r: Redex, used: set[str]) -> Term:
    rule = r.rule
    if rule is RuleId.BETA:
        return substitute(node.fun.body, node.fun.binder, node.arg)
    if rule is RuleId.PROJ_PAIR:
        return children(node.of)[node.index]
    if rule is RuleId.IF_TRUE:
        return node.then
    if rule is RuleId.IF_FALSE:
        return node.else_
    if rule is RuleId.PERM_APP_LEFT:
        w = node.fun
        par = _avoiding(node.arg, set(free_vars(w)), used)
        return _rebuild(par, App(w, par.left), App(w, par.right))
    if rule is RuleId.PERM_STACK:
        head, xi = as_stack_elem(node)
        extra = set(free_vars(xi.term)) if hasattr(xi, "term") else set()
        par = _avoiding(head, extra, used)
        return _rebuild(par, apply_stack(par.left, [xi]), apply_stack(par.right, [xi]))
    if rule is RuleId.PERM_LAM:
        par = _avoiding(node.body, {node.binder}, used)
        lam = lambda b: Lam(node.binder, node.annot, b)  # noqa: E731
        return _rebuild(par, lam(par.left), lam(par.right))
    if rule in (RuleId.PERM_PAIR_LEFT, RuleId.PERM_PAIR_RIGHT):
        i = 0 if rule is RuleId.PERM_PAIR_LEFT else 1
        w = children(node)[1 - i]
        par = _avoiding(children(node)[i], set(free_vars(w)), used)
        if i == 0:
            return _rebuild(par, Pair(par.left, w), Pair(par.right, w))
        return _rebuild(par, Pair(w, par.left), Pair(w, par.right))
    if rule is RuleId.PERM_IF:
        kids = list(children(node))
        others = {x for j, k in enumerate(kids) if j != r.child for x in free_vars(k)}
        par = _avoiding(kids[r.child], others, used)

        def plug(s):
            new = list(kids)
            new[r.child] = s
            return with_children(node, tuple(new))

        return _rebuild(par, plug(par.left), plug(par.right))
    if rule in PAR_PERMUTATIONS:
        b, kb = node.channel, node.kind
        if rule is RuleId.PERM_PAR_LEFT:
            inner, w = node.left, node.right
            par = _avoiding(inner, set(free_vars(w)) | {b}, used)
            return _rebuild(par, ParCh(b, kb, par.left, w), ParCh(b, kb, par.right, w))
        inner, w = node.right, node.left
        par = _avoiding(inner, set(free_vars(w)) | {b}, used)
        return _rebuild(par, ParCh(b, kb, w, par.left), ParCh(b, kb, w, par.right))
    if rule is RuleId.BASIC_CROSS:
        message = subterm_at(node, r.sender).arg
        return channel_substitute(node.right, node.channel, message)
    if rule is RuleId.CROSS:
        return _cross(lctx, node, r, used)
    if rule is RuleId.DROP_LEFT:
        return node.left
    if rule is RuleId.DROP_RIGHT:
        return node.right
    raise RedexError(f"unknown rule {rule}")


def _cross(lctx: Context, node: ParCh, r: Redex, used: set[str]) -> Term:
    a, sender = node.channel, r.sender
    message = subterm_at(node, sender).arg
    sender_ctx = local_context(lctx, node, sender)
    kind = F.conj(sender_ctx[y] for y in r.ys)
    b = fresh_name(used, "c")
    used.add(b)
    # the component holding the sender: descend through the plain spine
    comp_path: Path = (0,)
    while isinstance(subterm_at(node, comp_path), ParPlain):
        comp_path += (sender[len(comp_path)],)
    comp = subterm_at(node, comp_path)
    reply = App(Var(b), tuple_term([Var(y) for y in r.ys]))
    comp = replace_at(comp, sender[len(comp_path):], reply)
    received = channel_substitute(node.right, a, multiple_substitute(message, list(r.ys), b))
    return ParCh(b, kind, ParCh(a, node.kind, comp, node.right), received)


def channel_substitute(d: Term, a: str, u: Term) -> Term:
    """d[u/a]: every free occurrence of channel a replaced at once."""
    return substitute(d, a, u)


# -- exploration -------------------------------------------------------------------

@dataclass
class Exploration:
    normal_forms: list[Term]
    visited: int
    truncated: bool


def enumerate_normal_forms(ctx: Context, t: Term, depth: int, limit: int = 100_000) -> Exploration:
    """Breadth-first search over every redex choice, up to depth steps."""
    seen = {canonical(t)}
    frontier = deque([(t, 0)])
    normals: dict[Term, Term] = {}
    truncated = False
    while frontier:
        s, d = frontier.popleft()
        rs = find_redexes(ctx, s)
        if not rs:
            normals.setdefault(canonical(s), s)
            continue
        if d >= depth:
            truncated = True
            continue
        for r in rs:
            nxt = step(ctx, s, r)
            key = canonical(nxt)
            if key in seen:
                continue
            if len(seen) >= limit:
                truncated = True
                continue
            seen.add(key)
            frontier.append((nxt, d + 1))
    return Exploration(list(normals.values()), len(seen), truncated)


def is_normal(ctx: Context, t: Term) -> bool:
    return not find_redexes(ctx, t)


def check_subject_reduction(ctx: Context, before: Term, after: Term) -> None:
    """Raise AssertionError unless after keeps the type and does not gain free variables."""
    ta, tb = typecheck(ctx, before), typecheck(ctx, after)
    if ta != tb:
        raise AssertionError(f"type changed from {ta} to {tb}")
    extra = set(free_vars(after)) - set(free_vars(before))
    if extra:
        raise AssertionError(f"new free variables {sorted(extra)}")
