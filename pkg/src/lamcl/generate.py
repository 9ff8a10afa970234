"""Seeded, type-directed generation of well-typed random terms of bounded depth."""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import formula as F
from .formula import Formula
from .term import App, Efq, Lam, Pair, ParCh, ParPlain, Proj, Term, UNIT, Var, depth as term_depth, fresh_name

ATOMS = (F.Atom("P"), F.Atom("Q"), F.Atom("R"))

# free assumptions that make every atom and bot inhabited
BASE_CONTEXT: dict[str, Formula] = {
    "p": ATOMS[0], "q": ATOMS[1], "r": ATOMS[2], "n": F.neg(ATOMS[0]),
}


@dataclass(frozen=True)
class Sample:
    seed: int
    ctx: dict[str, Formula]
    term: Term
    type: Formula


def random_formula(rng: random.Random, depth: int, atoms=ATOMS) -> Formula:
    if depth <= 0 or rng.random() < 0.35:
        return rng.choice(atoms)
    roll = rng.random()
    if roll < 0.45:
        return F.Arrow(random_formula(rng, depth - 1, atoms), random_formula(rng, depth - 1, atoms))
    if roll < 0.75:
        return F.And(random_formula(rng, depth - 1, atoms), random_formula(rng, depth - 1, atoms))
    if roll < 0.9:
        return F.neg(random_formula(rng, depth - 1, atoms))
    return F.TOP


class Generator:
    """Builds terms whose syntax tree depth never exceeds max_depth.

    Every generating method returns None when nothing of the requested type
    fits in the remaining depth; callers then fall back to other shapes.
    """

    def __init__(self, seed: int, max_depth: int = 5, channel_prob: float = 0.3,
                 plain_prob: float = 0.05, redex_prob: float = 0.2):
        self.rng = random.Random(seed)
        self.seed = seed
        self.max_depth = max_depth
        self.channel_prob = channel_prob
        self.plain_prob = plain_prob
        self.redex_prob = redex_prob
        self.names: set[str] = set(BASE_CONTEXT)

    def fresh(self, hint: str) -> str:
        name = fresh_name(self.names, hint)
        self.names.add(name)
        return name

    def sample(self, attempts: int = 100) -> Sample:
        ctx = dict(BASE_CONTEXT)
        for _ in range(attempts):
            ty = random_formula(self.rng, 2)
            t = self.term(ctx, ty, self.max_depth)
            if t is not None:
                assert term_depth(t) <= self.max_depth
                return Sample(self.seed, ctx, t, ty)
        raise RuntimeError(f"seed {self.seed}: no term found in {attempts} attempts")

    def term(self, ctx: dict[str, Formula], ty: Formula, depth: int) -> Term | None:
        if depth < 1:
            return None
        rng = self.rng
        shapes = []
        roll = rng.random()
        if roll < self.channel_prob:
            shapes.append(self.channel)
        elif roll < self.channel_prob + self.plain_prob:
            shapes.append(self.plain)
        elif roll < self.channel_prob + self.plain_prob + self.redex_prob:
            shapes.append(self.redex)
        basic = [self.elimination, self.introduction]
        rng.shuffle(basic)
        for shape in shapes + basic:
            t = shape(ctx, ty, depth)
            if t is not None:
                return t
        return None

    def channel(self, ctx, ty: Formula, depth: int) -> Term | None:
        kind = random_formula(self.rng, 1)
        a = self.fresh("a")
        left = self.term({**ctx, a: F.neg(kind)}, ty, depth - 1)
        right = left and self.term({**ctx, a: kind}, ty, depth - 1)
        return ParCh(a, kind, left, right) if right else None

    def plain(self, ctx, ty: Formula, depth: int) -> Term | None:
        left = self.term(ctx, ty, depth - 1)
        right = left and self.term(ctx, ty, depth - 1)
        return ParPlain(left, right) if right else None

    def redex(self, ctx, ty: Formula, depth: int) -> Term | None:
        arg_ty = random_formula(self.rng, 1)
        x = self.fresh("x")
        body = self.term({**ctx, x: arg_ty}, ty, depth - 2)
        arg = body and self.term(ctx, arg_ty, depth - 1)
        return App(Lam(x, arg_ty, body), arg) if arg else None

    def introduction(self, ctx, ty: Formula, depth: int) -> Term | None:
        match ty:
            case F.Arrow(a, b):
                x = self.fresh("x")
                body = self.term({**ctx, x: a}, b, depth - 1)
                return Lam(x, a, body) if body else None
            case F.And(a, b):
                left = self.term(ctx, a, depth - 1)
                right = left and self.term(ctx, b, depth - 1)
                return Pair(left, right) if right else None
            case F.Top():
                return UNIT
            case F.Atom():
                falsum = self.term(ctx, F.BOT, depth - 1)
                return Efq(ty, falsum) if falsum else None
        return None

    def elimination(self, ctx, ty: Formula, depth: int) -> Term | None:
        """A context variable eliminated down to ty by applications and projections."""
        options = [(x, chain) for x, a in ctx.items()
                   for chain in [_elimination_chain(a, ty)] if chain is not None and len(chain) < depth]
        if not options:
            return None
        x, chain = self.rng.choice(options)
        t: Term = Var(x)
        for i, step in enumerate(chain):
            if isinstance(step, int):
                t = Proj(t, step)
                continue
            # the i-th elimination from the head sits len(chain) - i levels below the top
            arg = self.term(ctx, step, depth - (len(chain) - i))
            if arg is None:
                return None
            t = App(t, arg)
        return t


def _elimination_chain(have: Formula, want: Formula) -> list | None:
    """Shortest list of eliminations (argument types or projection indices) from have to want."""
    if have == want:
        return []
    best = None
    match have:
        case F.Arrow(a, b):
            rest = _elimination_chain(b, want)
            if rest is not None:
                best = [a, *rest]
        case F.And(l, r):
            for i, part in enumerate((l, r)):
                rest = _elimination_chain(part, want)
                if rest is not None and (best is None or len(rest) + 1 < len(best)):
                    best = [i, *rest]
    return best


def random_term(seed: int, max_depth: int = 5, channel_prob: float = 0.3) -> Sample:
    return Generator(seed, max_depth, channel_prob).sample()
