"""Recursive-descent parser for the operator input language.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := ['-'] power ('*' power)*
    power   := atom ['^' INT]
    atom    := INT ['/' INT] | 'N' | 'hbar' | 'Tr' '(' letters ')' | '(' expr ')'
    letters := letter ([','] letter)*
    letter  := ['d^' INT | '∂'] FIELD

Products of traces are graded-commutative, scalars are multiples of the unit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional

from .operators import FieldSymbol, Letter, OperatorSum, letter
from .scalars import HBAR, LAMBDA, N


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, src: str):
        self.pos = pos
        self.src = src
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {src}\n  {pointer}")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<deriv>(?:d|∂)\^\d+|∂(?=\s*[A-Za-z]))
  | (?P<name>[A-Za-z_ħλ][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


_SCALARS = {"N": N, "hbar": HBAR, "ħ": HBAR, "lambda": LAMBDA, "λ": LAMBDA}


class _Parser:
    def __init__(self, src: str, fields: Mapping[str, FieldSymbol]):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.fields = fields

    # -- helpers ------------------------------------------------------------
    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None) -> ParseError:
        tok = tok or self.cur
        return ParseError(msg, tok.pos, self.src)

    def accept(self, text: str) -> Optional[_Tok]:
        if self.cur.kind == "op" and self.cur.text == text:
            tok = self.cur
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> _Tok:
        tok = self.accept(text)
        if tok is None:
            what = "end of input" if self.cur.kind == "end" else repr(self.cur.text)
            raise self.error(f"expected {text!r}, found {what}")
        return tok

    def expect_int(self) -> int:
        if self.cur.kind != "int":
            raise self.error("expected an integer")
        v = int(self.cur.text)
        self.i += 1
        return v

    # -- grammar ------------------------------------------------------------
    def parse(self) -> OperatorSum:
        out = self.expr()
        if self.cur.kind != "end":
            raise self.error(f"unexpected {self.cur.text!r}")
        return out

    def expr(self) -> OperatorSum:
        out = self.term()
        while True:
            if self.accept("+"):
                out = out + self.term()
            elif self.accept("-"):
                out = out - self.term()
            else:
                return out

    def term(self) -> OperatorSum:
        neg = bool(self.accept("-"))
        out = self.power()
        while self.accept("*"):
            out = out * self.power()
        return -out if neg else out

    def power(self) -> OperatorSum:
        base = self.atom()
        if self.accept("^"):
            k = self.expect_int()
            out = OperatorSum.unit()
            for _ in range(k):
                out = out * base
            return out
        return base

    def atom(self) -> OperatorSum:
        tok = self.cur
        if tok.kind == "int":
            self.i += 1
            num = int(tok.text)
            if self.accept("/"):
                den = self.expect_int()
                if den == 0:
                    raise self.error("division by zero", tok)
                return OperatorSum.unit(Fraction(num, den))
            return OperatorSum.unit(num)
        if tok.kind == "name" and tok.text == "Tr":
            self.i += 1
            self.expect("(")
            letters = self.letters()
            self.expect(")")
            return OperatorSum.trace(*letters)
        if tok.kind == "name" and tok.text in _SCALARS:
            self.i += 1
            return OperatorSum.unit(_SCALARS[tok.text])
        if tok.kind == "name" and tok.text in self.fields:
            raise self.error(f"field {tok.text!r} must appear inside Tr(...)")
        if tok.kind == "name":
            raise self.error(f"unknown symbol {tok.text!r}")
        if self.accept("("):
            out = self.expr()
            self.expect(")")
            return out
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"unexpected {what}")

    def letters(self) -> List[Letter]:
        out = []
        if self.cur.kind == "op" and self.cur.text == ")":
            raise self.error("empty trace")
        while True:
            out.append(self.letter())
            self.accept(",")
            if self.cur.kind == "op" and self.cur.text == ")":
                return out
            if self.cur.kind == "end":
                raise self.error("unbalanced parenthesis: expected ')'")

    def letter(self) -> Letter:
        deriv = 0
        tok = self.cur
        if tok.kind == "deriv":
            self.i += 1
            deriv = int(tok.text.split("^")[1]) if "^" in tok.text else 1
            tok = self.cur
        if tok.kind != "name":
            raise self.error("expected a field name")
        if tok.text not in self.fields:
            raise self.error(f"unknown field {tok.text!r}")
        self.i += 1
        return letter(self.fields[tok.text], deriv)


def parse_expression(src: str, fields: Mapping[str, FieldSymbol]) -> OperatorSum:
    """Parse ``src`` into a canonical :class:`OperatorSum` over the given fields."""
    return _Parser(src, fields).parse()
