"""Tokenizer shared by the formula and set-formula parsers."""
from __future__ import annotations

import re
from typing import NamedTuple

from .errors import FormulaSyntaxError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>[0-9]+)
  | (?P<op><->|->|!=|[()\[\],.:!&|=])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def at(self, text: str) -> bool:
        return self.current.text == text and self.current.kind != "eof"

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.current.text or 'end of input'!r}")
        return self.advance()

    def expect_id(self, what: str = "identifier") -> Token:
        if self.current.kind != "id":
            self.error(f"expected {what}, found {self.current.text or 'end of input'!r}")
        return self.advance()

    def error(self, message: str, pos: int | None = None):
        raise FormulaSyntaxError(message, self.current.pos if pos is None else pos, self.text)
