"""Behavioral acceptance checks, one marked group per criterion.

Run with `pytest tests/test_acceptance.py`; a pass/fail line per criterion is
printed in the terminal summary.
"""
import io
import time

import pytest

from lamcl.generate import random_term
from lamcl.normalize import BudgetError, Normalizer, normalize_traced
from lamcl.reduction import COMMUNICATIONS, DROPS, RuleId, enumerate_normal_forms, find_redexes, step
from lamcl.syntax import parse_term, show
from lamcl.term import Shape, alpha_eq, classify, free_vars
from lamcl.trace import write_trace
from lamcl.typecheck import typecheck
from lamcl.verify import check_subformula_property, is_normal
from lamcl import formula as F

from conftest import CORPUS_DIR, CORPUS_FILES, load_source
from test_formula import UP_TO_7, oracle_strong

criterion = pytest.mark.criterion


def corpus(stem):
    return load_source(CORPUS_DIR / f"{stem}.lamcl")


def exchanges(src, result):
    """(before, after) for every cross or drop step of a trace."""
    before, out = src.term, []
    for e in result.trace:
        if e.rule in COMMUNICATIONS or e.rule in DROPS:
            out.append((before, e.term_after))
        before = e.term_after
    return out


def advance(ctx, t, expected):
    """The single step from t whose result is alpha-equal to expected."""
    hits = [r for r in find_redexes(ctx, t) if alpha_eq(step(ctx, t, r), expected)]
    assert hits, f"no step from {show(t)} to {show(expected)}"
    return step(ctx, t, hits[0])


# -- 1. parallel OR

FF_DISPLAY = [
    ("efq[Bool] (a <F, s>) |a:Bool & S| a p0", "<F, s> p0"),
]
XT_DISPLAY = [("(if x then T else efq[Bool] (a <F, s>)) |a:Bool & S| T", "T")]
TX_DISPLAY = [("T |a:Bool & S| (if x then T else a p0)", "T")]


@criterion(1, "parallel OR: O F F -> F, O x T -> T, O T x -> T with the displayed communication steps")
@pytest.mark.parametrize("stem, final, display", [
    ("parallel_or_ff", "F", FF_DISPLAY),
    ("parallel_or_xt", "T", XT_DISPLAY),
    ("parallel_or_tx", "T", TX_DISPLAY),
])
def test_parallel_or(stem, final, display):
    src = corpus(stem)
    t0 = time.perf_counter()
    result = normalize_traced(src.ctx, src.term)
    elapsed = time.perf_counter() - t0
    assert result.term == parse_term(final)
    seen = exchanges(src, result)
    assert len(seen) == len(display)
    for (before, after), (want_before, want_after) in zip(seen, display):
        assert alpha_eq(before, parse_term(want_before)), show(before)
        assert alpha_eq(after, parse_term(want_after)), show(after)
    if stem == "parallel_or_ff":
        # the last displayed step is the projection of the received pair
        assert [e.rule for e in result.trace[-2:]] == [RuleId.BASIC_CROSS, RuleId.PROJ_PAIR]
    assert len(result.trace) < 200
    assert elapsed < 1.0


# -- 2. loop guard

@criterion(2, "loop guard: the guarded excluded-middle term has zero redexes")
def test_loop_guard_is_normal():
    src = corpus("em_loop")
    assert src.term == parse_term(r"\y:B. a y |a:B| x a")
    assert find_redexes(src.ctx, src.term) == []
    assert normalize_traced(src.ctx, src.term).trace == []


# -- 3. classical disjunction

@criterion(3, "classical disjunction: left and right injections select their branch")
@pytest.mark.parametrize("stem", [f"disjunction_{side}_{i}" for side in ("left", "right") for i in (1, 2, 3)])
def test_classical_disjunction(stem):
    src = corpus(stem)
    out = normalize_traced(src.ctx, src.term).term
    assert alpha_eq(out, src.expect), show(out)


# -- 4. closure transmission

@criterion(4, "closure transmission: master strategy and the basic-cross-first order both reach s")
def test_closure_transmission_master():
    src = corpus("closure_transmission")
    result = normalize_traced(src.ctx, src.term)
    assert result.term == parse_term("s")


@criterion(4, "closure transmission: master strategy and the basic-cross-first order both reach s")
def test_closure_transmission_basic_cross_first():
    src = corpus("closure_transmission")
    m = r"efq[S] (a (\x:~T. x t))"
    q = r"efq[S] (a (\y:T. b <s, y>))"
    displayed = [
        rf"({m} |a:~~T| {q}) |b:S & T| ({m} |a:~~T| b p0)",
        rf"({m} |a:~~T| {q}) |b:S & T| b p0",
        r"efq[S] ((\x:~T. x t) (\y:T. b <s, y>)) |b:S & T| b p0",
        r"efq[S] ((\y:T. b <s, y>) t) |b:S & T| b p0",
        r"efq[S] (b <s, t>) |b:S & T| b p0",
        "<s, t> p0",
        "s",
    ]
    t = src.term
    for text in displayed:
        t = advance(src.ctx, t, parse_term(text))
    assert t == parse_term("s")


# -- 5. subject reduction

def assert_steps_preserve(ctx, start, events):
    ty, fvs = typecheck(ctx, start), set(free_vars(start))
    for e in events:
        assert typecheck(ctx, e.term_after) == ty, (e.step, e.rule)
        now = set(free_vars(e.term_after))
        assert now <= fvs, (e.step, e.rule, now - fvs)
        fvs = now


@criterion(5, "subject reduction on every traced step of the corpus and 200 seeded random terms")
@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_subject_reduction_corpus(path):
    src = load_source(path)
    assert_steps_preserve(src.ctx, src.term, normalize_traced(src.ctx, src.term).trace)


@criterion(5, "subject reduction on every traced step of the corpus and 200 seeded random terms")
def test_subject_reduction_random_terms():
    steps = truncated = 0
    for seed in range(200):
        sample = random_term(seed)
        # unchecked run: the test re-checks every step itself
        n = Normalizer(sample.ctx, sample.term, step_budget=1000, check=False)
        try:
            n.master()
        except BudgetError:
            truncated += 1
        assert_steps_preserve(sample.ctx, sample.term, n.trace)
        steps += len(n.trace)
    print(f"random terms: {steps} steps checked, {truncated} trace(s) cut at the step budget")
    assert steps > 0


# -- 6. normalization and metatheory

@criterion(6, "corpus normalizes; outputs are normal, in parallel form, with the subformula property; measures decrease")
def test_corpus_normalization_and_metatheory():
    t0 = time.perf_counter()
    for path in CORPUS_FILES:
        src = load_source(path)
        result = normalize_traced(src.ctx, src.term)
        assert is_normal(src.ctx, result.term), path.name
        assert classify(result.term) is not Shape.OTHER, path.name
        assert check_subformula_property(src.ctx, result.term).ok, path.name
        for m in result.measures:
            assert m.bound is None or m.measure < m.bound, (path.name, m)
    assert time.perf_counter() - t0 < 60


# -- 7. strong subformulas

@criterion(7, "strong-subformula oracle agrees exhaustively up to size 7 and both characterization bullets hold")
def test_strong_subformula_oracle():
    assert len(UP_TO_7) == 3477
    for a in UP_TO_7:
        strong = F.strong_subformulas(a)
        assert strong == oracle_strong(a), F.show(a)
        for b in strong:
            assert F.is_strong_subformula(b, a)
            assert any(b in F.proper_subformulas(x) for x in F.prime_factors(a))
            if isinstance(a, F.Arrow):
                factors = F.prime_factors(a.left) + F.prime_factors(a.right)
                assert any(b in F.proper_subformulas(x) for x in factors)


# -- 8. races and broadcast

@criterion(8, "race: exactly {w x, w y}; broadcast: both receivers in one step")
def test_race_enumerates_two_normal_forms():
    src = corpus("race")
    found = enumerate_normal_forms(src.ctx, src.term, depth=20)
    assert not found.truncated
    assert sorted(show(t) for t in found.normal_forms) == ["w x", "w y"]


@criterion(8, "race: exactly {w x, w y}; broadcast: both receivers in one step")
def test_broadcast_in_one_step():
    src = corpus("broadcast")
    [r] = [r for r in find_redexes(src.ctx, src.term) if r.rule is RuleId.BASIC_CROSS]
    assert step(src.ctx, src.term, r) == parse_term("w x || v x")


# -- 9. determinism

def trace_bytes(src):
    buf = io.StringIO()
    write_trace(normalize_traced(src.ctx, src.term).trace, buf)
    return buf.getvalue().encode()


@criterion(9, "identical inputs give byte-identical trace files")
@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_traces_are_deterministic(path):
    src = load_source(path)
    assert trace_bytes(src) == trace_bytes(load_source(path))


@criterion(9, "identical inputs give byte-identical trace files")
def test_cli_trace_files_are_identical(tmp_path):
    from lamcl.cli import main
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.jsonl"
        assert main(["reduce", str(CORPUS_DIR / "closure_transmission.lamcl"), "--strategy", "random", "--seed", "5",
                     "--trace", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[0]
