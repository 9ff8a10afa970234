import pytest
from hypothesis import given, settings

from lamcl.formula import Atom
from lamcl.normalize import (
    AComplexity, BudgetError, MasterMeasure, a_complexity, kind_complexity, longest_intuitionistic_len,
    normalize, normalize_traced, reduce_simple, side_reduce, term_a_set, to_parallel_form,
)
from lamcl.reduction import COMMUNICATIONS, RuleId, find_redexes
from lamcl.syntax import parse_term, show
from lamcl.term import alpha_eq, classify, free_vars, is_parallel_form, Shape
from lamcl.typecheck import typecheck

from conftest import CORPUS_FILES, load_source, source
from strategies import small_samples

P, Q, S, T = (Atom(n) for n in "PQST")


@pytest.mark.parametrize("text, expected", [
    ("tt", 0),
    (r"(\x:top. x) tt", 1),
    (r"(\x:top & top. <x p0, x p1>) <tt, tt>", 3),
    (r"(\f:top -> top. f (f tt)) (\y:top. y)", 3),
])
def test_longest_intuitionistic_reduction(text, expected):
    assert longest_intuitionistic_len(parse_term(text)) == expected


def test_longest_reduction_rejects_parallel_terms():
    with pytest.raises(ValueError):
        longest_intuitionistic_len(parse_term("tt || tt"))


def test_longest_reduction_budget():
    with pytest.raises(BudgetError):
        longest_intuitionistic_len(parse_term(r"<(\x:top. x) tt, (\x:top. x) tt>"), budget=1)


def test_loop_guard_complexity_is_zero():
    src = source(r"assume x : B -> ~B. term \y:B. a y |a:B| x a")
    aset = term_a_set(src.ctx, src.term)
    assert kind_complexity(src.term.kind, aset) == 0


def test_a_complexity_of_basic_example():
    src = source("assume x : P. assume w : P -> Q. term efq[Q] (a x) |a:P| w a")
    aset = term_a_set(src.ctx, src.term)
    assert a_complexity(src.term, aset) == AComplexity(1, 0, 0, 2)


def test_a_complexity_counts_inner_parallels():
    src = source("assume x : P. assume w : P -> Q. assume v : P -> Q. term efq[Q] (a x) |a:P| (w a || v a)")
    cx = a_complexity(src.term, term_a_set(src.ctx, src.term))
    assert cx.c == 1 and cx.d == 1 and cx.l == 0 and cx.o == 3


def test_a_complexity_counts_intuitionistic_work():
    src = source(r"assume x : P. assume w : P -> Q. term efq[Q] (a ((\y:P. y) x)) |a:P| w a")
    cx = a_complexity(src.term, term_a_set(src.ctx, src.term))
    assert cx == AComplexity(1, 0, 1, 2)


def test_measures_order_lexicographically():
    assert MasterMeasure(1, 0, 9, 9) > MasterMeasure(0, 5, 5, 5)
    assert MasterMeasure(2, 1, 1, 3) < MasterMeasure(2, 1, 2, 0)
    assert AComplexity(1, 0, 0, 0) > AComplexity(0, 9, 9, 9)


def test_side_strategy_permutes_before_communicating():
    src = source("assume x : P. assume w : P -> Q. assume v : P -> Q. term efq[Q] (a x) |a:P| (w a || v a)")
    out = side_reduce(src.ctx, src.term)
    assert alpha_eq(out, parse_term("(efq[Q] (a x) |a:P| w a) || (efq[Q] (a x) |a:P| v a)"))


def test_side_strategy_communicates_once_simply_typed():
    src = source("assume x : P. assume w : P -> Q. term efq[Q] (a x) |a:P| w a")
    assert side_reduce(src.ctx, src.term) == parse_term("w x")


def test_side_strategy_reduces_sides_before_communicating():
    src = source(r"assume x : P. assume w : P -> Q. term efq[Q] (a ((\y:P. y) x)) |a:P| w a")
    assert side_reduce(src.ctx, src.term) == parse_term("efq[Q] (a x) |a:P| w a")


def test_parallel_form_lifts_parallels():
    src = source(r"assume u : P -> Q. assume v : P -> Q. assume w : P. term \z:R. (u || v) w")
    out = to_parallel_form(src.ctx, src.term)
    assert is_parallel_form(out)
    assert alpha_eq(out, parse_term(r"(\z:R. u w) || (\z:R. v w)"))


def test_communication_is_followed_by_enabled_drops():
    src = load_source(CORPUS_FILES[[p.stem for p in CORPUS_FILES].index("cross_closure")])
    rules = [e.rule for e in normalize_traced(src.ctx, src.term).trace]
    assert rules == [RuleId.CROSS, RuleId.DROP_LEFT, RuleId.PROJ_PAIR, RuleId.DROP_RIGHT]


def test_trace_events_carry_measures_for_strategy_steps():
    src = load_source(CORPUS_FILES[[p.stem for p in CORPUS_FILES].index("closure_transmission")])
    result = normalize_traced(src.ctx, src.term)
    assert result.term == parse_term("s")
    for e in result.trace:
        if e.rule in COMMUNICATIONS:
            assert e.measure is not None and e.complexity is not None and e.complexity.c > 0


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_normalizes_with_decreasing_measures(path):
    src = load_source(path)
    result = normalize_traced(src.ctx, src.term)
    assert not find_redexes(src.ctx, result.term)
    assert classify(result.term) is not Shape.OTHER
    assert typecheck(src.ctx, result.term) == typecheck(src.ctx, src.term)
    assert result.measures, "the master strategy records at least the root measure"
    for m in result.measures:
        assert m.bound is None or m.measure < m.bound, m
    if src.expect is not None:
        assert alpha_eq(result.term, src.expect), show(result.term)


def test_step_budget_is_enforced():
    src = load_source(CORPUS_FILES[[p.stem for p in CORPUS_FILES].index("parallel_or_ff")])
    with pytest.raises(BudgetError):
        normalize(src.ctx, src.term, step_budget=3)


def test_budget_from_environment(monkeypatch):
    src = load_source(CORPUS_FILES[[p.stem for p in CORPUS_FILES].index("parallel_or_ff")])
    monkeypatch.setenv("LAMCL_BUDGET", "2")
    with pytest.raises(BudgetError):
        normalize(src.ctx, src.term)


def test_leftmost_and_seeded_random_reductions():
    src = source(r"term (\x:top & top. <x p0, x p1>) <tt, tt>")
    left = reduce_simple(src.ctx, src.term, "leftmost")
    assert left.term == parse_term("<tt, tt>")
    runs = [reduce_simple(src.ctx, src.term, "random", seed=7) for _ in range(2)]
    assert [e.path for e in runs[0].trace] == [e.path for e in runs[1].trace]
    with pytest.raises(ValueError):
        reduce_simple(src.ctx, src.term, "greedy")


@given(small_samples)
@settings(max_examples=60, deadline=None)
def test_random_terms_normalize(sample):
    result = normalize_traced(sample.ctx, sample.term)
    assert not find_redexes(sample.ctx, result.term)
    assert typecheck(sample.ctx, result.term) == sample.type
    assert set(free_vars(result.term)) <= set(free_vars(sample.term))
    assert all(m.bound is None or m.measure < m.bound for m in result.measures)
