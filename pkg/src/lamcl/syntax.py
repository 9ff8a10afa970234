"""Concrete syntax for formulas, terms and `.lamcl` source files."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import formula as F
from .formula import Formula
from .term import (
    FALSE, TRUE, UNIT, App, BoolLit, Efq, If, Lam, Pair, ParCh, ParPlain, Proj, TT,
    Term, Var, tuple_term,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg, self.line, self.col = msg, line, col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\n)
  | (?P<comment>--[^\n]*|\#[^\n]*)
  | (?P<sym>->|\|\||[\\λ:.()<>,&~|\[\]])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

TERM_KEYWORDS = {"tt", "efq", "p0", "p1", "T", "F", "if", "then", "else",
                 "assume", "term", "expect", "extension"}
FORMULA_KEYWORDS = {"bot", "top"}
BOOL_KEYWORDS = {"T", "F", "if"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'sym', 'ident' or 'eof'
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws" and m.group() == "\n":
            line, line_start = line + 1, m.end()
        elif kind in ("sym", "ident"):
            text = "\\" if m.group() == "λ" else m.group()
            out.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class Parser:
    def __init__(self, src: str, extension: bool = True):
        self.toks = tokenize(src)
        self.i = 0
        self.extension = extension
        self.uses_extension = False

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def take(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def name(self, what: str = "identifier") -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in TERM_KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok.text

    # -- formulas
    def formula(self) -> Formula:
        left = self.conj()
        if self.at("->"):
            self.i += 1
            return F.Arrow(left, self.formula())
        return left

    def conj(self) -> Formula:
        left = self.fatom()
        if self.at("&"):
            self.i += 1
            return F.And(left, self.conj())
        return left

    def fatom(self) -> Formula:
        tok = self.tok
        if self.at("~"):
            self.i += 1
            return F.neg(self.fatom())
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "bot":
                return F.BOT
            if tok.text == "top":
                return F.TOP
            return F.Atom(tok.text)
        raise self.error(f"expected formula, found {tok.text or 'end of input'!r}")

    # -- terms
    def term(self) -> Term:
        left = self.seq()
        while True:
            if self.at("||"):
                self.i += 1
                left = ParPlain(left, self.seq())
            elif self.at("|"):
                self.i += 1
                a = self.name("channel name")
                self.take(":")
                kind = self.formula()
                self.take("|")
                left = ParCh(a, kind, left, self.seq())
            else:
                return left

    def seq(self) -> Term:
        if self.at("\\"):
            self.i += 1
            x = self.name("binder")
            self.take(":")
            ty = self.formula()
            self.take(".")
            return Lam(x, ty, self.seq())
        if self.at("if"):
            self.bool_used()
            self.i += 1
            c = self.term()
            self.take("then")
            a = self.term()
            self.take("else")
            return If(c, a, self.seq())
        return self.app()

    def bool_used(self) -> None:
        if not self.extension:
            raise self.error("boolean term used without `extension bool`")
        self.uses_extension = True

    def app(self) -> Term:
        t = self.head()
        while True:
            if self.at("p0") or self.at("p1"):
                t = Proj(t, int(self.tok.text[1]))
                self.i += 1
            elif self.at("\\") or self.at("if"):
                return App(t, self.seq())
            elif self.starts_atom():
                t = App(t, self.atom())
            else:
                return t

    def head(self) -> Term:
        if self.at("efq"):
            self.i += 1
            self.take("[")
            p = self.formula()
            self.take("]")
            return Efq(p, self.atom())
        return self.atom()

    def starts_atom(self) -> bool:
        tok = self.tok
        if tok.kind == "ident":
            return tok.text not in TERM_KEYWORDS or tok.text in ("tt", "T", "F", "efq")
        return tok.text in ("(", "<")

    def atom(self) -> Term:
        tok = self.tok
        if self.at("("):
            self.i += 1
            t = self.term()
            self.take(")")
            return t
        if self.at("<"):
            self.i += 1
            items = [self.term()]
            while self.at(","):
                self.i += 1
                items.append(self.term())
            self.take(">")
            if len(items) < 2:
                raise self.error("a pair needs at least two components", tok)
            return tuple_term(items)
        if self.at("tt"):
            self.i += 1
            return UNIT
        if self.at("T") or self.at("F"):
            self.bool_used()
            self.i += 1
            return TRUE if tok.text == "T" else FALSE
        if self.at("efq"):
            return self.head()
        return Var(self.name("term"))

    def eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")


def parse_formula(src: str) -> Formula:
    p = Parser(src)
    f = p.formula()
    p.eof()
    return f


def parse_term(src: str, extension: bool = True) -> Term:
    p = Parser(src, extension)
    t = p.term()
    p.eof()
    return t


@dataclass
class SourceFile:
    ctx: dict[str, Formula]
    term: Term
    extension: bool = False
    expect: Term | None = None
    name: str = "<source>"
    options: dict = field(default_factory=dict)


def parse_source(src: str, name: str = "<source>") -> SourceFile:
    """Parse `assume x : A.` lines, optional `extension bool`, `term e`, `expect e`."""
    extension = bool(re.search(r"^\s*extension\s+bool\b", src, re.M))
    p = Parser(src, extension)
    ctx: dict[str, Formula] = {}
    body = expect = None
    while p.tok.kind != "eof":
        tok = p.tok
        if p.at("assume"):
            p.i += 1
            name_tok = p.tok
            x = p.name("assumption name")
            if x in ctx:
                raise p.error(f"duplicate assumption {x!r}", name_tok)
            p.take(":")
            ctx[x] = p.formula()
            p.take(".")
        elif p.at("extension"):
            p.i += 1
            if p.tok.text != "bool":
                raise p.error("only `extension bool` is supported")
            p.i += 1
            if p.at("."):
                p.i += 1
        elif p.at("term") or p.at("expect"):
            p.i += 1
            if tok.text == "term" and body is not None:
                raise p.error("more than one `term`", tok)
            if tok.text == "expect" and expect is not None:
                raise p.error("more than one `expect`", tok)
            t = p.term()
            if p.at("."):
                p.i += 1
            if tok.text == "term":
                body = t
            else:
                expect = t
        else:
            raise p.error(f"expected `assume`, `extension`, `term` or `expect`, found {tok.text!r}")
    if body is None:
        raise ParseError("missing `term`", p.tok.line, p.tok.col)
    return SourceFile(ctx, body, extension, expect, name)


# -- printing -------------------------------------------------------------------

_PAR, _SEQ, _APP, _ATOM = range(4)


def show(t: Term) -> str:
    return _show(t, _PAR)


def _wrap(text: str, own: int, need: int) -> str:
    return f"({text})" if own < need else text


def _show(t: Term, need: int) -> str:
    match t:
        case Var(x):
            return x
        case TT():
            return "tt"
        case BoolLit(v):
            return "T" if v else "F"
        case Pair(a, b):
            return f"<{_show(a, _PAR)}, {_show(b, _PAR)}>"
        case App(f, a):
            return _wrap(f"{_show(f, _APP)} {_show(a, _ATOM)}", _APP, need)
        case Proj(u, i):
            return _wrap(f"{_show(u, _APP)} p{i}", _APP, need)
        case Efq(p, u):
            return _wrap(f"efq[{F.show(p)}] {_show(u, _ATOM)}", _APP, need)
        case Lam(x, ty, b):
            return _wrap(f"\\{x}:{F.show(ty)}. {_show(b, _SEQ)}", _SEQ, need)
        case If(c, a, b):
            text = f"if {_show(c, _PAR)} then {_show(a, _PAR)} else {_show(b, _SEQ)}"
            return _wrap(text, _SEQ, need)
        case ParPlain(l, r):
            return _wrap(f"{_show(l, _PAR)} || {_show(r, _SEQ)}", _PAR, need)
        case ParCh(a, k, l, r):
            return _wrap(f"{_show(l, _PAR)} |{a}:{F.show(k)}| {_show(r, _SEQ)}", _PAR, need)
    raise TypeError(f"not a term: {t!r}")


def show_source(src: SourceFile) -> str:
    lines = []
    if src.extension:
        lines.append("extension bool")
    lines += [f"assume {x} : {F.show(a)}." for x, a in src.ctx.items()]
    lines.append(f"term {show(src.term)}")
    if src.expect is not None:
        lines.append(f"expect {show(src.expect)}")
    return "\n".join(lines) + "\n"
