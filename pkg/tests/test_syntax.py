import pytest
from hypothesis import given, settings

from lamcl.formula import Arrow, Atom, BOT
from lamcl.syntax import ParseError, parse_formula, parse_source, parse_term, show
from lamcl.term import Lam, Var, alpha_eq
from lamcl.typecheck import typecheck

from conftest import CORPUS_FILES, load_source
from strategies import samples

P, A = Atom("P"), Atom("A")


def test_parse_assume_and_term():
    src = parse_source("assume x : P. term x")
    assert src.ctx == {"x": P}
    assert src.term == Var("x")


def test_negation_desugars():
    src = parse_source(r"term \x:~A. x")
    assert src.ctx == {}
    assert src.term == Lam("x", Arrow(A, BOT), Var("x"))


def test_closure_transmission_source_typechecks():
    src = load_source(next(p for p in CORPUS_FILES if p.stem == "closure_transmission"))
    assert typecheck(src.ctx, src.term) == Atom("S")


def test_formula_precedence():
    assert parse_formula("A -> B -> C") == parse_formula("A -> (B -> C)")
    assert parse_formula("A & B -> C") == parse_formula("(A & B) -> C")
    assert parse_formula("~A -> bot") == Arrow(Arrow(A, BOT), BOT)


@pytest.mark.parametrize("text, line, col", [
    ("assume x : P.\nterm (x", 2, 8),
    ("assume x : P.\nassume x : Q.\nterm x", 2, 8),
    ("term x y )", 1, 10),
])
def test_parse_errors_carry_location(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_source(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_boolean_terms_need_the_extension():
    with pytest.raises(ParseError):
        parse_source("term if T then T else F")
    assert parse_source("extension bool. term if T then T else F").extension


def test_missing_term():
    with pytest.raises(ParseError):
        parse_source("assume x : P.")


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    src = load_source(path)
    for t in (src.term, src.expect):
        if t is not None:
            assert alpha_eq(parse_term(show(t)), t)


@given(samples)
@settings(max_examples=200, deadline=None)
def test_random_round_trip(sample):
    assert parse_term(show(sample.term)) == sample.term
