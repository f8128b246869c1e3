"""Recursive-descent parser for system-definition files.

Grammar (one statement per line, ``#`` starts a comment)::

    file       := {param_line | eq_line | comment | blank}
    param_line := "param" IDENT "=" NUMBER
    eq_line    := ("dx" | "dy" | "dz") "=" expr
    expr       := term {("+" | "-") term}
    term       := factor {("*" | "/") factor}
    factor     := ["+" | "-"] base ["^" INTEGER]
    base       := NUMBER | IDENT | "x" | "y" | "z" | "(" expr ")"

A leading sign on a factor is accepted so that printed polynomials such as
``-0.5*x^2 + 1`` parse back. Division requires a constant right operand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .field import PolyVectorField
from .polynomial import TriPolynomial

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()=])
    """,
    re.VERBOSE,
)

_VARIABLES = {"x": 0, "y": 1, "z": 2}
_EQ_TARGETS = ("dx", "dy", "dz")
_RESERVED = set(_VARIABLES) | set(_EQ_TARGETS) | {"param"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnknownIdentifierError(ParseError):
    pass


class ExponentError(ParseError):
    pass


class ParameterOrderError(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def _tokenize(line: str, lineno: int) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("eol", "", len(line) + 1))
    return tokens


class _LineParser:
    def __init__(self, tokens, lineno, params, later_params):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.params = params
        self.later_params = later_params

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, self.lineno, tok.column)

    def expect(self, kind, text=None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of line"
            raise self.error(f"expected {want!r}, got {got!r}")
        self.pos += 1
        return tok

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def expr(self) -> TriPolynomial:
        value = self.term()
        while self.at_op("+", "-"):
            op = self.expect("op").text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> TriPolynomial:
        value = self.factor()
        while self.at_op("*", "/"):
            op_tok = self.expect("op")
            rhs = self.factor()
            if op_tok.text == "*":
                value = value * rhs
            else:
                if not rhs.is_constant():
                    raise self.error("'/' requires a numeric right operand", op_tok)
                if rhs.is_zero():
                    raise self.error("division by zero", op_tok)
                value = value / rhs.constant_value()
        return value

    def factor(self) -> TriPolynomial:
        if self.at_op("-"):
            self.pos += 1
            return -self.factor()
        if self.at_op("+"):
            self.pos += 1
            return self.factor()
        value = self.base()
        if self.at_op("^"):
            self.pos += 1
            tok = self.tok
            if tok.kind != "number":
                raise self.error("exponent must be a non-negative integer literal", tok,
                                 ExponentError)
            num = float(tok.text)
            if not num.is_integer():
                raise self.error(f"non-integer exponent {tok.text!r}", tok, ExponentError)
            self.pos += 1
            try:
                value = value ** int(num)
            except ValueError as exc:
                raise self.error(str(exc), tok, ExponentError) from None
        return value

    def base(self) -> TriPolynomial:
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return TriPolynomial.constant(float(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if tok.text in _VARIABLES:
                return TriPolynomial.variable(_VARIABLES[tok.text])
            if tok.text in self.params:
                return TriPolynomial.constant(self.params[tok.text])
            if tok.text in self.later_params:
                raise self.error(f"parameter {tok.text!r} used before its definition", tok,
                                 ParameterOrderError)
            raise self.error(f"unknown identifier {tok.text!r}", tok, UnknownIdentifierError)
        if self.at_op("("):
            self.pos += 1
            value = self.expr()
            self.expect("op", ")")
            return value
        raise self.error(f"unexpected token {tok.text or 'end of line'!r}")


def _strip_comment(line: str) -> str:
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def parse_system(text: str, params: Mapping[str, float] | None = None,
                 name: str = "custom") -> PolyVectorField:
    """Parse a system definition into a canonical PolyVectorField.

    ``params`` supplies values for parameters; they override ``param`` lines in
    the text, and are visible from the first line on.
    """
    overrides = {k: float(v) for k, v in (params or {}).items()}
    lines = [_strip_comment(raw) for raw in text.splitlines()]
    tokenized = [(_tokenize(line, n), n) for n, line in enumerate(lines, start=1)]

    declared_at: dict[str, int] = {}
    for toks, n in tokenized:
        if toks[0].kind == "ident" and toks[0].text == "param" and toks[1].kind == "ident":
            declared_at.setdefault(toks[1].text, n)

    known = dict(overrides)
    used_params: dict[str, float] = {}
    comps: dict[str, TriPolynomial] = {}
    for toks, n in tokenized:
        if toks[0].kind == "eol":
            continue
        later = {p for p, at in declared_at.items() if at > n and p not in known}
        p = _LineParser(toks, n, known, later)
        head = p.expect("ident")
        if head.text == "param":
            ident = p.expect("ident")
            if ident.text in _RESERVED:
                raise p.error(f"{ident.text!r} is reserved", ident)
            p.expect("op", "=")
            sign = 1.0
            if p.at_op("-", "+"):
                sign = -1.0 if p.expect("op").text == "-" else 1.0
            num = p.expect("number")
            p.expect("eol")
            if ident.text not in overrides:
                known[ident.text] = sign * float(num.text)
            used_params[ident.text] = known[ident.text]
        elif head.text in _EQ_TARGETS:
            if head.text in comps:
                raise p.error(f"duplicate equation for {head.text}", head)
            p.expect("op", "=")
            comps[head.text] = p.expr()
            p.expect("eol")
        else:
            raise p.error(f"expected 'param', 'dx', 'dy' or 'dz', got {head.text!r}", head,
                          UnknownIdentifierError if head.kind == "ident" else ParseError)

    missing = [t for t in _EQ_TARGETS if t not in comps]
    if missing:
        raise ParseError(f"missing equation(s) for {', '.join(missing)}", len(lines) + 1, 1)
    for k, v in overrides.items():
        used_params.setdefault(k, v)
    return PolyVectorField(tuple(comps[t] for t in _EQ_TARGETS), name=name,
                           parameters=used_params)
