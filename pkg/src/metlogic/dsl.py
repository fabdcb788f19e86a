"""Text syntax for formulas (``.cl`` files): parser and canonical printer.

Grammar::

    expr      := primary (("-." | "+.") primary)*        left-associative
    primary   := rational | "d(" term "," term ")" | ident "(" terms ")"
               | "half(" expr ")" | "not(" expr ")" | "absdiff(" expr "," expr ")"
               | "min(" exprs ")" | "max(" exprs ")"
               | "cmin[" n "](" exprs ")" | "cmax[" n "](" exprs ")"
               | ("sup" | "inf") var ":" sort "." expr | "(" expr ")"
    term      := ident | ident "(" terms ")"
    condition := expr "<=" rational | expr "=" "0"
    file      := [name ":="] (condition | expr) (";" ...)*

A binder body extends as far right as possible.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArityError, DSLSyntaxError, UnknownSymbolError
from .logic.formula import (
    AbsDiff,
    App,
    CMax,
    CMin,
    Const,
    Dist,
    Half,
    Inf,
    Max,
    Min,
    Neg,
    Pred,
    Sup,
    TruncAdd,
    TruncSub,
    Var,
)
from .rationals import rational_str

KEYWORDS = frozenset({"d", "half", "not", "absdiff", "min", "max", "cmin", "cmax", "sup", "inf"})

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>-\.|\+\.|<=|:=|[(),:.=;\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class Condition:
    """``expr <= bound``; ``expr = 0`` is stored with bound 0."""

    expr: object
    bound: Fraction


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text, signature):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = signature

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise DSLSyntaxError(msg, tok.line, tok.col)

    def at(self, text):
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def eat(self, text):
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        self.i += 1

    def ident(self):
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.fail(f"expected an identifier, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def rational(self):
        tok = self.tok
        if tok.kind != "num":
            self.fail(f"expected a rational literal, found {tok.text or 'end of input'!r}")
        self.i += 1
        return Fraction(tok.text)

    # -- expressions
    def expr(self):
        left = self.primary()
        while self.at("-.") or self.at("+."):
            op = self.tok.text
            self.i += 1
            right = self.primary()
            left = TruncSub(left, right) if op == "-." else TruncAdd(left, right)
        return left

    def args(self, item, close=")"):
        out = []
        if self.at(close):
            self.i += 1
            return tuple(out)
        out.append(item())
        while self.at(","):
            self.i += 1
            out.append(item())
        self.eat(close)
        return tuple(out)

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            return Const(self.rational())
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if tok.kind != "ident":
            self.fail(f"unexpected {tok.text or 'end of input'!r}")
        word = tok.text
        if word in ("sup", "inf"):
            self.i += 1
            var = self.ident().text
            self.eat(":")
            sort = self.ident().text
            self.eat(".")
            body = self.expr()
            return Sup(var, sort, body) if word == "sup" else Inf(var, sort, body)
        if word in ("cmin", "cmax"):
            self.i += 1
            self.eat("[")
            ntok = self.tok
            n = self.rational()
            if n.denominator != 1 or n < 0:
                self.fail("truncation bound must be a natural number", ntok)
            self.eat("]")
            self.eat("(")
            fam = self.args(self.expr)
            if len(fam) != n:
                self.fail(f"{word}[{n}] has {len(fam)} members", tok)
            return CMin(fam) if word == "cmin" else CMax(fam)
        if word in KEYWORDS:
            self.i += 1
            self.eat("(")
            if word == "d":
                a = self.term()
                self.eat(",")
                b = self.term()
                self.eat(")")
                return Dist(a, b)
            if word in ("half", "not"):
                e = self.expr()
                self.eat(")")
                return Half(e) if word == "half" else Neg(e)
            if word == "absdiff":
                a = self.expr()
                self.eat(",")
                b = self.expr()
                self.eat(")")
                return AbsDiff(a, b)
            fam = self.args(self.expr)
            return Min(fam) if word == "min" else Max(fam)
        # predicate application
        self.i += 1
        if not self.at("("):
            self.fail(f"expected '(' after predicate {word!r}")
        self.i += 1
        terms = self.args(self.term)
        self.check_symbol(tok, "predicate", len(terms))
        return Pred(word, terms)

    def term(self):
        tok = self.ident()
        if self.at("("):
            self.i += 1
            args = self.args(self.term)
            self.check_symbol(tok, "function", len(args))
            return App(tok.text, args)
        if self.sig is not None and self.sig.get(tok.text, (None,))[0] == "function":
            self.check_symbol(tok, "function", 0)
            return App(tok.text, ())
        return Var(tok.text)

    def check_symbol(self, tok, kind, arity):
        if self.sig is None:
            return
        entry = self.sig.get(tok.text)
        if entry is None or entry[0] != kind:
            raise UnknownSymbolError(
                f"unknown {kind} symbol {tok.text!r} at line {tok.line}, column {tok.col}",
                {"symbol": tok.text, "line": tok.line, "column": tok.col},
            )
        if entry[1] != arity:
            raise ArityError(
                f"{tok.text} takes {entry[1]} argument(s), got {arity} "
                f"at line {tok.line}, column {tok.col}",
                {"symbol": tok.text, "expected": entry[1], "got": arity},
            )

    def condition_or_expr(self):
        e = self.expr()
        if self.at("<="):
            self.i += 1
            return Condition(e, self.rational())
        if self.at("="):
            self.i += 1
            ztok = self.tok
            if self.rational() != 0:
                self.fail("only '= 0' conditions are allowed", ztok)
            return Condition(e, Fraction(0))
        return e

    def end(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected trailing input {self.tok.text!r}")


def parse(text: str, signature: dict | None = None):
    """Parse a single formula.  ``signature`` maps symbol -> (kind, arity)."""
    p = _Parser(text, signature)
    e = p.expr()
    p.end()
    return e


def parse_condition(text: str, signature: dict | None = None) -> Condition:
    p = _Parser(text, signature)
    c = p.condition_or_expr()
    p.end()
    if not isinstance(c, Condition):
        raise DSLSyntaxError("expected '<=' or '= 0'", p.tok.line, p.tok.col)
    return c


def parse_file(text: str, signature: dict | None = None) -> list[tuple[str | None, object]]:
    """Items of a ``.cl`` file as ``(name or None, formula or Condition)`` pairs."""
    p = _Parser(text, signature)
    items = []
    while p.tok.kind != "eof":
        name = None
        if p.tok.kind == "ident" and p.toks[p.i + 1].text == ":=":
            name = p.ident().text
            p.eat(":=")
        items.append((name, p.condition_or_expr()))
        if p.at(";"):
            p.i += 1
        else:
            p.end()
    return items


# ---------------------------------------------------------------- printer


def print_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    return f"{t.symbol}({', '.join(print_term(a) for a in t.args)})"


def _operand(f, right_side):
    text = print_formula(f)
    if isinstance(f, (Sup, Inf)) or (right_side and isinstance(f, (TruncSub, TruncAdd))):
        return f"({text})"
    return text


def print_formula(f) -> str:
    """Canonical text; ``parse(print_formula(f)) == f``."""
    if isinstance(f, Const):
        return rational_str(f.value)
    if isinstance(f, Dist):
        return f"d({print_term(f.left)}, {print_term(f.right)})"
    if isinstance(f, Pred):
        return f"{f.symbol}({', '.join(print_term(a) for a in f.args)})"
    if isinstance(f, Half):
        return f"half({print_formula(f.arg)})"
    if isinstance(f, Neg):
        return f"not({print_formula(f.arg)})"
    if isinstance(f, AbsDiff):
        return f"absdiff({print_formula(f.left)}, {print_formula(f.right)})"
    if isinstance(f, (TruncSub, TruncAdd)):
        op = "-." if isinstance(f, TruncSub) else "+."
        return f"{_operand(f.left, False)} {op} {_operand(f.right, True)}"
    if isinstance(f, (Min, Max)):
        name = "min" if isinstance(f, Min) else "max"
        return f"{name}({', '.join(print_formula(a) for a in f.args)})"
    if isinstance(f, (CMin, CMax)):
        name = "cmin" if isinstance(f, CMin) else "cmax"
        return f"{name}[{f.bound}]({', '.join(print_formula(a) for a in f.family)})"
    if isinstance(f, (Sup, Inf)):
        name = "sup" if isinstance(f, Sup) else "inf"
        return f"{name} {f.var}:{f.sort} . {print_formula(f.body)}"
    raise TypeError(f"not a formula node: {f!r}")


def print_condition(c: Condition) -> str:
    if c.bound == 0:
        return f"{print_formula(c.expr)} = 0"
    return f"{print_formula(c.expr)} <= {rational_str(c.bound)}"


def print_file(items) -> str:
    lines = []
    for name, item in items:
        body = print_condition(item) if isinstance(item, Condition) else print_formula(item)
        lines.append(f"{name} := {body};" if name else f"{body};")
    return "\n".join(lines) + "\n"
