"""Proof terms: AST, binding, substitution, paths and structural classification."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .formula import Formula

# Child indices: Lam body=0; App fun=0 arg=1; Pair 0/1; Proj/Efq of=0;
# ParCh/ParPlain left=0 right=1; If cond=0 then=1 else=2.


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    binder: str
    annot: Formula
    body: Term


@dataclass(frozen=True, slots=True)
class App:
    fun: Term
    arg: Term


@dataclass(frozen=True, slots=True)
class Pair:
    fst: Term
    snd: Term


@dataclass(frozen=True, slots=True)
class Proj:
    of: Term
    index: int

    def __post_init__(self):
        if self.index not in (0, 1):
            raise ValueError("projection index must be 0 or 1")


@dataclass(frozen=True, slots=True)
class Efq:
    target: Formula
    of: Term


@dataclass(frozen=True, slots=True)
class TT:
    pass


@dataclass(frozen=True, slots=True)
class ParCh:
    """`left |channel:kind| right`; channel is bound in both sides."""

    channel: str
    kind: Formula
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class ParPlain:
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class If:
    cond: Term
    then: Term
    else_: Term


Term = Union[Var, Lam, App, Pair, Proj, Efq, TT, ParCh, ParPlain, BoolLit, If]
Path = tuple[int, ...]

TRUE = BoolLit(True)
FALSE = BoolLit(False)
UNIT = TT()
PARALLEL = (ParCh, ParPlain)


class PathError(LookupError):
    pass


# -- stacks ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Arg:
    term: Term


@dataclass(frozen=True, slots=True)
class Projection:
    index: int


@dataclass(frozen=True, slots=True)
class EfqTo:
    atom: Formula


StackElem = Union[Arg, Projection, EfqTo]


def apply_stack(t: Term, stack: Iterable[StackElem]) -> Term:
    for el in stack:
        match el:
            case Arg(u):
                t = App(t, u)
            case Projection(i):
                t = Proj(t, i)
            case EfqTo(p):
                t = Efq(p, t)
    return t


def as_stack_elem(t: Term) -> tuple[Term, StackElem] | None:
    """Split t = head·ξ when t is an elimination with a one-element stack ξ."""
    match t:
        case App(f, a):
            return f, Arg(a)
        case Proj(u, i):
            return u, Projection(i)
        case Efq(p, u):
            return u, EfqTo(p)
    return None


def tuple_term(ts: list[Term]) -> Term:
    """<t1, ..., tn> as right-nested pairs; tt when empty."""
    if not ts:
        return UNIT
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Pair(t, out)
    return out


def tuple_projection(i: int, n: int) -> tuple[Projection, ...]:
    """Stack selecting element i of an n-element right-nested tuple."""
    if not 0 <= i < n:
        raise IndexError(i)
    if i == n - 1:
        return (Projection(1),) * i
    return (Projection(1),) * i + (Projection(0),)


# -- structure -----------------------------------------------------------------

_CHILD_GETTERS = {
    Lam: lambda t: (t.body,),
    App: lambda t: (t.fun, t.arg),
    Pair: lambda t: (t.fst, t.snd),
    Proj: lambda t: (t.of,),
    Efq: lambda t: (t.of,),
    ParCh: lambda t: (t.left, t.right),
    ParPlain: lambda t: (t.left, t.right),
    If: lambda t: (t.cond, t.then, t.else_),
}


def children(t: Term) -> tuple[Term, ...]:
    get = _CHILD_GETTERS.get(type(t))
    return get(t) if get else ()


def with_children(t: Term, kids: tuple[Term, ...]) -> Term:
    match t:
        case Lam(x, ty, _):
            return Lam(x, ty, kids[0])
        case App():
            return App(kids[0], kids[1])
        case Pair():
            return Pair(kids[0], kids[1])
        case Proj(_, i):
            return Proj(kids[0], i)
        case Efq(p, _):
            return Efq(p, kids[0])
        case ParCh(a, k, _, _):
            return ParCh(a, k, kids[0], kids[1])
        case ParPlain():
            return ParPlain(kids[0], kids[1])
        case If():
            return If(kids[0], kids[1], kids[2])
    return t


def binder_of(t: Term) -> str | None:
    match t:
        case Lam(x, _, _):
            return x
        case ParCh(a, _, _, _):
            return a
    return None


def subterm_at(t: Term, p: Iterable[int]) -> Term:
    for depth, i in enumerate(p):
        kids = children(t)
        if not 0 <= i < len(kids):
            raise PathError(f"path step {i} at depth {depth} does not resolve")
        t = kids[i]
    return t


def replace_at(t: Term, p: Path | list[int], s: Term) -> Term:
    """Graft s at p, literally: binders of t are not renamed."""
    p = tuple(p)
    if not p:
        return s
    kids = children(t)
    i = p[0]
    if not 0 <= i < len(kids):
        raise PathError(f"path step {i} does not resolve")
    new = list(kids)
    new[i] = replace_at(kids[i], p[1:], s)
    return with_children(t, tuple(new))


def positions(t: Term, prefix: Path = ()) -> Iterator[tuple[Path, Term]]:
    """Pre-order (path, subterm) pairs."""
    stack = [(prefix, t)]
    while stack:
        p, s = stack.pop()
        yield p, s
        kids = children(s)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((p + (i,), kids[i]))


def postorder(t: Term, prefix: Path = ()) -> Iterator[tuple[Path, Term]]:
    """Leftmost-innermost order: children before parents, left to right."""
    for i, c in enumerate(children(t)):
        yield from postorder(c, prefix + (i,))
    yield prefix, t


def binders_along(t: Term, p: Path) -> list[tuple[str, Term, int]]:
    """(name, binding node, child index) for every binder passed on the way to p."""
    out = []
    for i in p:
        b = binder_of(t)
        if b is not None:
            out.append((b, t, i))
        t = children(t)[i]
    return out


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


def depth(t: Term) -> int:
    """Height of the syntax tree; a leaf has depth 1."""
    return 1 + max((depth(c) for c in children(t)), default=0)


def count_parallel(t: Term) -> int:
    return int(isinstance(t, PARALLEL)) + sum(count_parallel(c) for c in children(t))


# -- names ------------------------------------------------------------------------

def free_vars(t: Term) -> list[str]:
    """Free variables in first-occurrence order."""
    out: dict[str, None] = {}
    _free(t, frozenset(), out)
    return list(out)


def _free(t: Term, bound: frozenset[str], out: dict[str, None]) -> None:
    match t:
        case Var(x):
            if x not in bound:
                out.setdefault(x)
        case Lam(x, _, b):
            _free(b, bound | {x}, out)
        case ParCh(a, _, l, r):
            inner = bound | {a}
            _free(l, inner, out)
            _free(r, inner, out)
        case _:
            for c in children(t):
                _free(c, bound, out)


def occurs_free(x: str, t: Term) -> bool:
    match t:
        case Var(y):
            return x == y
        case Lam(y, _, b):
            return x != y and occurs_free(x, b)
        case ParCh(a, _, l, r):
            return x != a and (occurs_free(x, l) or occurs_free(x, r))
    return any(occurs_free(x, c) for c in children(t))


def count_free(x: str, t: Term) -> int:
    match t:
        case Var(y):
            return int(x == y)
        case Lam(y, _, b):
            return 0 if x == y else count_free(x, b)
        case ParCh(a, _, l, r):
            return 0 if x == a else count_free(x, l) + count_free(x, r)
    return sum(count_free(x, c) for c in children(t))


def all_names(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, Lam):
            out.add(s.binder)
        elif isinstance(s, ParCh):
            out.add(s.channel)
        stack.extend(children(s))
    return out


_SUFFIX = re.compile(r"\d+$")


def fresh_name(avoid: Iterable[str], hint: str) -> str:
    """hint plus the lowest numeric suffix not in avoid."""
    avoid = set(avoid)
    base = _SUFFIX.sub("", hint) or "v"
    i = 0
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# -- substitution -------------------------------------------------------------------

def substitute(t: Term, x: str, u: Term) -> Term:
    """t[u/x], capture-avoiding for both lambda and channel binders."""
    return substitute_many(t, {x: u})


def substitute_many(t: Term, sub: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    sub = {k: v for k, v in sub.items()}
    if not sub:
        return t
    fvs: set[str] = set()
    for v in sub.values():
        fvs.update(free_vars(v))
    return _subst(t, sub, fvs, all_names(t) | fvs | set(sub))


def _subst(t: Term, sub: dict[str, Term], fvs: set[str], used: set[str]) -> Term:
    match t:
        case Var(x):
            return sub.get(x, t)
        case Lam(x, ty, b):
            inner, x2 = _enter_binder(x, b, sub, fvs, used)
            if not inner:
                return t
            return Lam(x2, ty, _subst(_rename(b, x, x2), inner, fvs, used))
        case ParCh(a, k, l, r):
            inner, a2 = _enter_binder(a, ParPlain(l, r), sub, fvs, used)
            if not inner:
                return t
            l2 = _subst(_rename(l, a, a2), inner, fvs, used)
            r2 = _subst(_rename(r, a, a2), inner, fvs, used)
            return ParCh(a2, k, l2, r2)
        case _:
            kids = children(t)
            if not kids:
                return t
            return with_children(t, tuple(_subst(c, sub, fvs, used) for c in kids))


def _enter_binder(x, body, sub, fvs, used):
    inner = {k: v for k, v in sub.items() if k != x and occurs_free(k, body)}
    if not inner:
        return inner, x
    if x in fvs and any(x in free_vars(v) for v in inner.values()):
        x2 = fresh_name(used, x)
        used.add(x2)
        return inner, x2
    return inner, x


def _rename(t: Term, x: str, y: str) -> Term:
    if x == y:
        return t
    return substitute(t, x, Var(y))


def rename_binder(t: Term, new: str) -> Term:
    """Alpha-rename the binder at the root of t to new (assumed fresh)."""
    match t:
        case Lam(x, ty, b):
            return Lam(new, ty, _rename(b, x, new))
        case ParCh(a, k, l, r):
            return ParCh(new, k, _rename(l, a, new), _rename(r, a, new))
    raise TypeError("root has no binder")


def multiple_substitute(u: Term, ys: list[str], b: str) -> Term:
    """u with each y_i replaced by the i-th projection of the channel b."""
    if len(set(ys)) != len(ys):
        raise ValueError("duplicate variables in multiple substitution")
    if not ys:
        raise ValueError("multiple substitution needs at least one variable")
    n = len(ys)
    return substitute_many(
        u, {y: apply_stack(Var(b), tuple_projection(i, n)) for i, y in enumerate(ys)}
    )


# -- alpha equivalence ----------------------------------------------------------------

def alpha_eq(t: Term, u: Term) -> bool:
    return _alpha(t, u, {}, {}, 0)


def _alpha(t, u, env_t, env_u, depth) -> bool:
    match t, u:
        case Var(x), Var(y):
            return env_t.get(x, x) == env_u.get(y, y) if (x in env_t) == (y in env_u) else False
        case Lam(x, a, b), Lam(y, a2, b2):
            if a != a2:
                return False
            k = f"#{depth}"
            return _alpha(b, b2, {**env_t, x: k}, {**env_u, y: k}, depth + 1)
        case ParCh(x, a, l, r), ParCh(y, a2, l2, r2):
            if a != a2:
                return False
            k = f"#{depth}"
            et, eu = {**env_t, x: k}, {**env_u, y: k}
            return _alpha(l, l2, et, eu, depth + 1) and _alpha(r, r2, et, eu, depth + 1)
        case Proj(a, i), Proj(b, j):
            return i == j and _alpha(a, b, env_t, env_u, depth)
        case Efq(p, a), Efq(q, b):
            return p == q and _alpha(a, b, env_t, env_u, depth)
        case BoolLit(v), BoolLit(w):
            return v == w
        case _:
            if type(t) is not type(u):
                return False
            kt, ku = children(t), children(u)
            return len(kt) == len(ku) and all(
                _alpha(a, b, env_t, env_u, depth) for a, b in zip(kt, ku)
            )


def canonical(t: Term) -> Term:
    """Alpha-normal representative: binders renamed by binding depth.

    Two terms are alpha-equal iff their canonical forms are equal, provided no
    free variable is spelled like a generated name (`%<n>`).
    """
    return _canon(t, {}, 0)


def _canon(t: Term, env: dict[str, str], depth: int) -> Term:
    match t:
        case Var(x):
            return Var(env.get(x, x))
        case Lam(x, ty, b):
            k = f"%{depth}"
            return Lam(k, ty, _canon(b, {**env, x: k}, depth + 1))
        case ParCh(a, kind, l, r):
            k = f"%{depth}"
            e = {**env, a: k}
            return ParCh(k, kind, _canon(l, e, depth + 1), _canon(r, e, depth + 1))
        case _:
            kids = children(t)
            if not kids:
                return t
            return with_children(t, tuple(_canon(c, env, depth) for c in kids))


# -- classification --------------------------------------------------------------------

class Shape(enum.Enum):
    SIMPLY_TYPED = "SimplyTyped"
    SIMPLE_PARALLEL = "SimpleParallel"
    PARALLEL_FORM = "ParallelForm"
    OTHER = "Other"


def is_simply_typed(t: Term) -> bool:
    return not isinstance(t, PARALLEL) and all(is_simply_typed(c) for c in children(t))


def spine_components(t: Term) -> list[tuple[Path, Term]]:
    """The maximal non-parallel subterms hanging off the parallel spine of t."""
    if isinstance(t, PARALLEL):
        return [((i,) + p, s) for i, c in enumerate(children(t)) for p, s in spine_components(c)]
    return [((), t)]


def is_parallel_form(t: Term) -> bool:
    return all(is_simply_typed(c) for _, c in spine_components(t))


def classify(t: Term) -> Shape:
    """Most specific of SimplyTyped < SimpleParallel < ParallelForm, else Other.

    SimpleParallel: all components simply typed and every parallel node below
    the root is a plain `||` (the root itself may bind a channel).
    """
    comps = spine_components(t)
    if not all(is_simply_typed(c) for _, c in comps):
        return Shape.OTHER
    if not isinstance(t, PARALLEL):
        return Shape.SIMPLY_TYPED
    if all(isinstance(n, ParPlain) for n in _spine_nodes(t)[1:]):
        return Shape.SIMPLE_PARALLEL
    return Shape.PARALLEL_FORM


def _spine_nodes(t: Term) -> list[Term]:
    if not isinstance(t, PARALLEL):
        return []
    return [t] + [n for c in children(t) for n in _spine_nodes(c)]
