"""The terminating normalization strategy and its complexity measures.

The master procedure works on one term held by a `Normalizer` and rewrites it
in place through `reduction.step`, so every recorded event is a single
replayable rule application at an absolute path.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from typing import Mapping

from . import formula as F
from .formula import Formula
from .reduction import (
    DROPS, COMMUNICATIONS, STRUCTURAL_PERMUTATIONS, Redex, RedexError,
    RuleId, check_subject_reduction, contract, find_redexes, intuitionistic_redexes,
    last_free_occurrence, local_redexes, node_redexes, step,
)
from .term import (
    PARALLEL, ParCh, Path, Term, canonical, count_free, count_parallel, is_parallel_form,
    is_simply_typed, occurs_free, positions, postorder, size, subterm_at,
)
from .typecheck import a_set, free_context, local_context, node_complexity, typecheck

Context = Mapping[str, Formula]

DEFAULT_STEP_BUDGET = 1_000_000
DEFAULT_SEARCH_BUDGET = 100_000


class BudgetError(RuntimeError):
    """A step or search budget ran out before the computation finished."""


class StrategyError(RuntimeError):
    """The strategy reached a state its correctness argument rules out."""


class InvariantError(AssertionError):
    """A checked invariant (measure decrease, subject reduction) failed."""


def budget_from_env(default: int) -> int:
    raw = os.environ.get("LAMCL_BUDGET")
    return int(raw) if raw else default


@dataclass(frozen=True, order=True)
class AComplexity:
    """Ranking of a channel node for the side strategy, compared lexicographically."""
    c: int  # offending kind size
    d: int  # parallel operators inside the sides
    l: int  # longest intuitionistic reductions of the sides (only when d == 0)
    o: int  # occurrences of the channel

    def as_list(self) -> list[int]:
        return [self.c, self.d, self.l, self.o]


@dataclass(frozen=True, order=True)
class MasterMeasure:
    asize: int  # formulas the kinds are measured against
    r: int      # highest channel complexity
    k: int      # channels at that complexity
    s: int      # term size

    def as_list(self) -> list[int]:
        return [self.asize, self.r, self.k, self.s]


@dataclass(frozen=True)
class TraceEvent:
    step: int
    rule: RuleId
    path: Path
    sender: Path | None
    child: int | None
    measure: MasterMeasure | None
    complexity: AComplexity | None
    term_after: Term


@dataclass(frozen=True)
class MeasureRecord:
    """A master-strategy measure at path, with the measure it had to stay below."""
    path: Path
    bound: MasterMeasure | None
    measure: MasterMeasure


@dataclass
class Result:
    term: Term
    trace: list[TraceEvent] = field(default_factory=list)
    measures: list[MeasureRecord] = field(default_factory=list)


# -- measures ---------------------------------------------------------------------

def longest_intuitionistic_len(t: Term, budget: int | None = None) -> int:
    """Length of the longest reduction of t by intuitionistic rules only."""
    if not is_simply_typed(t):
        raise ValueError("longest_intuitionistic_len needs a simply typed term")
    budget = budget_from_env(DEFAULT_SEARCH_BUDGET) if budget is None else budget
    memo: dict[Term, int] = {}

    def go(s: Term) -> int:
        key = canonical(s)
        if key in memo:
            return memo[key]
        if len(memo) >= budget:
            raise BudgetError(f"intuitionistic search exceeded {budget} terms")
        best = 0
        for r in intuitionistic_redexes(s):
            best = max(best, 1 + go(contract(s, r)))
        memo[key] = best
        return best

    return go(t)


def kind_complexity(kind: Formula, aset) -> int:
    """Symbol count of the prime factors of kind lying outside the subformulas of aset."""
    pool = set()
    for f in aset:
        pool |= F.subformulas(f)
    return max(0, sum(F.formula_size(p) for p in F.prime_factors(kind) if p not in pool))


def a_complexity(node: ParCh, aset, budget: int | None = None) -> AComplexity:
    """(c, d, l, o) of a channel node; l is only computed when both sides are simply typed."""
    c = kind_complexity(node.kind, aset)
    d = count_parallel(node.left) + count_parallel(node.right)
    l = 0
    if d == 0:
        l = longest_intuitionistic_len(node.left, budget) + longest_intuitionistic_len(node.right, budget)
    o = count_free(node.channel, node.left) + count_free(node.channel, node.right)
    return AComplexity(c, d, l, o)


def master_measure(t: Term, aset) -> MasterMeasure:
    cs = [kind_complexity(s.kind, aset) for _, s in positions(t) if isinstance(s, ParCh)]
    r = max(cs, default=0)
    return MasterMeasure(len(aset), r, cs.count(r), size(t))


def term_a_set(ctx: Context, t: Term) -> frozenset[Formula]:
    return a_set(free_context(ctx, t), typecheck(ctx, t))


# -- the normalizer ----------------------------------------------------------------

class Normalizer:
    def __init__(self, ctx: Context, t: Term, *, step_budget: int | None = None,
                 search_budget: int | None = None, check: bool = True):
        typecheck(ctx, t)
        self.ctx = dict(ctx)
        self.term = t
        self.trace: list[TraceEvent] = []
        self.measures: list[MeasureRecord] = []
        self.step_budget = budget_from_env(DEFAULT_STEP_BUDGET) if step_budget is None else step_budget
        self.search_budget = search_budget
        self.check = check
        # unchanged subtrees are shared between steps, so identity is a sound key
        self._cx_cache: dict[tuple[int, int], tuple[ParCh, AComplexity]] = {}

    def result(self) -> Result:
        return Result(self.term, self.trace, self.measures)

    # -- plumbing
    def sub(self, p: Path) -> Term:
        return subterm_at(self.term, p)

    def lctx(self, p: Path) -> dict[str, Formula]:
        return local_context(self.ctx, self.term, p)

    def apply(self, r: Redex, measure=None, complexity=None) -> None:
        if len(self.trace) >= self.step_budget:
            raise BudgetError(f"step budget of {self.step_budget} exhausted")
        before = self.term
        self.term = step(self.ctx, before, r)
        if self.check:
            # only the subterm at r.path changed, so checking it in its local
            # context is equivalent to checking the whole term
            try:
                check_subject_reduction(local_context(self.ctx, before, r.path),
                                        subterm_at(before, r.path), self.sub(r.path))
            except AssertionError as e:
                raise InvariantError(f"{r.rule} at {list(r.path)}: {e}") from None
        self.trace.append(TraceEvent(len(self.trace), r.rule, r.path, r.sender, r.child,
                                     measure, complexity, self.term))

    def normalize_intuitionistic(self, p: Path, measure=None, complexity=None) -> None:
        """Leftmost-outermost intuitionistic steps until the subterm at p is normal."""
        while rs := intuitionistic_redexes(self.sub(p)):
            r = rs[0]
            self.apply(Redex(p + r.path, r.rule), measure, complexity)

    def to_parallel_form(self, p: Path) -> None:
        """Lift parallel operators to the spine, innermost first."""
        while not is_parallel_form(self.sub(p)):
            for q, s in postorder(self.sub(p)):
                rs = [r for r in local_redexes(s, q) if r.rule in STRUCTURAL_PERMUTATIONS]
                if rs:
                    r = rs[0]
                    self.apply(Redex(p + q, r.rule, child=r.child))
                    break

    # -- the master strategy
    def master(self, p: Path = (), parent: MasterMeasure | None = None) -> None:
        while True:
            t = self.sub(p)
            if not is_parallel_form(t):
                self.to_parallel_form(p)
                continue
            lctx = self.lctx(p)
            ty = typecheck(lctx, t)
            aset = a_set(free_context(lctx, t), ty)
            measure = master_measure(t, aset)
            if parent is not None and not measure < parent:
                raise InvariantError(f"measure {measure} does not decrease below {parent} at {list(p)}")
            self.measures.append(MeasureRecord(p, parent, measure))
            parent = measure
            if is_simply_typed(t):
                self.normalize_intuitionistic(p, measure)
                return
            root = node_redexes(lctx, t, p, ty)
            active = isinstance(t, ParCh) and node_complexity(lctx, t, ty) > 0
            if not root and not active:
                self.master(p + (0,), measure)
                self.master(p + (1,), measure)
                if self.normal_at(p):
                    return
                drops = [r for r in node_redexes(self.lctx(p), self.sub(p), p) if r.rule in DROPS]
                if drops:
                    self.apply(drops[0], measure)
                    if self.normal_at(p):
                        return
                continue
            if measure.r == 0:
                drops = [r for r in root if r.rule in DROPS]
                if not drops:
                    raise StrategyError(f"no communication complexity left but no drop at {list(p)}")
                self.apply(drops[0], measure)
                continue
            w = self.smallest(p, lambda s: kind_complexity(s.kind, aset) == measure.r)
            self.side_loop(w, aset, measure.r, measure)

    def normal_at(self, p: Path) -> bool:
        return not find_redexes(self.lctx(p), self.sub(p))

    def smallest(self, p: Path, pred) -> Path:
        """Path of the smallest channel node under p satisfying pred; leftmost on ties."""
        found = [(size(s), q) for q, s in positions(self.sub(p))
                 if isinstance(s, ParCh) and pred(s)]
        return p + min(found)[1]

    def side_loop(self, w: Path, aset, r: int, measure: MasterMeasure) -> None:
        while max((kind_complexity(s.kind, aset) for _, s in positions(self.sub(w))
                   if isinstance(s, ParCh)), default=0) >= r:
            self.side_reduce(w, aset, measure)

    # -- the side strategy
    def side_reduce(self, w: Path, aset, measure: MasterMeasure | None = None) -> None:
        """One side-strategy step on the subterm at w."""
        scored = [(self.a_complexity(s, aset), q, s)
                  for q, s in positions(self.sub(w)) if isinstance(s, ParCh)]
        if not scored:
            raise StrategyError(f"no channel node under {list(w)}")
        best = max(cx for cx, _, _ in scored)
        _, q, node = min((size(s), q, s) for cx, q, s in scored if cx == best)
        p = w + q
        if best.d > 0:
            rule = RuleId.PERM_PAR_LEFT if isinstance(node.left, PARALLEL) else RuleId.PERM_PAR_RIGHT
            self.apply_strategy(Redex(p, rule), measure, best)
        elif best.l > 0:
            self.normalize_intuitionistic(p + (0,), measure, best)
            self.normalize_intuitionistic(p + (1,), measure, best)
        elif best.c > 0:
            self.communicate(p, node, measure, best)
        else:
            self.drop(p, node, measure, best)

    def a_complexity(self, node: ParCh, aset) -> AComplexity:
        key = (id(node), id(aset))
        hit = self._cx_cache.get(key)
        if hit is not None and hit[0] is node:
            return hit[1]
        cx = a_complexity(node, aset, self.search_budget)
        self._cx_cache[key] = (node, cx)
        return cx

    def apply_strategy(self, r: Redex, measure, complexity) -> None:
        try:
            self.apply(r, measure, complexity)
        except RedexError as e:
            raise StrategyError(f"strategy chose an inapplicable step: {e}") from None

    def drop(self, p: Path, node: ParCh, measure, complexity) -> None:
        if not occurs_free(node.channel, node.left):
            self.apply_strategy(Redex(p, RuleId.DROP_LEFT), measure, complexity)
        elif not occurs_free(node.channel, node.right):
            self.apply_strategy(Redex(p, RuleId.DROP_RIGHT), measure, complexity)
        else:
            raise StrategyError(f"channel {node.channel} occurs on both sides at {list(p)}")

    def communicate(self, p: Path, node: ParCh, measure, complexity) -> None:
        a = node.channel
        if not (occurs_free(a, node.left) and occurs_free(a, node.right)):
            self.drop(p, node, measure, complexity)
            return
        sender = rightmost_sender(node)
        if sender is None:
            raise StrategyError(f"the last occurrence of {a} at {list(p)} is not applied")
        rs = [r for r in node_redexes(self.lctx(p), node, p)
              if r.rule in COMMUNICATIONS and r.sender == sender]
        if not rs:
            raise StrategyError(f"no cross reduction for sender {list(sender)} at {list(p)}")
        self.apply(rs[0], measure, complexity)
        # drops enabled by the communication, inside the rewritten subterm
        while True:
            drops = [r for r in find_redexes(self.lctx(p), self.sub(p)) if r.rule in DROPS]
            if not drops:
                return
            r = drops[0]
            self.apply(Redex(p + r.path, r.rule), measure, complexity)


def rightmost_sender(node: ParCh) -> Path | None:
    """Path (from node) of `a u` for the last free occurrence of a in the left side."""
    last = last_free_occurrence(node.left, node.channel)
    if not last or last[-1] != 0:
        return None
    return (0,) + last[:-1]


# -- entry points ------------------------------------------------------------------

def normalize_traced(ctx: Context, t: Term, **kw) -> Result:
    n = Normalizer(ctx, t, **kw)
    n.master()
    return n.result()


def normalize(ctx: Context, t: Term, **kw) -> Term:
    return normalize_traced(ctx, t, **kw).term


def to_parallel_form(ctx: Context, t: Term) -> Term:
    n = Normalizer(ctx, t)
    n.to_parallel_form(())
    return n.term


def side_reduce(ctx: Context, t: Term) -> Term:
    """One side-strategy step on t, with the A-set taken from t itself."""
    n = Normalizer(ctx, t)
    n.side_reduce((), term_a_set(ctx, t))
    return n.term


def reduce_simple(ctx: Context, t: Term, strategy: str = "leftmost", seed: int | None = None,
                  max_steps: int | None = None) -> Result:
    """Reduce by picking the first redex (leftmost) or a seeded random one at each step."""
    if strategy not in ("leftmost", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    n = Normalizer(ctx, t, step_budget=max_steps)
    rng = random.Random(seed)
    while rs := find_redexes(n.ctx, n.term):
        r = rs[0] if strategy == "leftmost" else rng.choice(rs)
        n.apply(r)
    return n.result()
