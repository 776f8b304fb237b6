"""Tokenizer shared by the plain and guarded dialects."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import KEYWORDS
from .diagnostics import ParseError

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<nl>\n)
    | (?P<comment>//[^\n]*)
    | (?P<int>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>->|==|!=|<=|[{}()\[\];,.&*+\-<>=])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # kw | ident | int | punct | eof
    value: str
    line: int
    col: int

    def __repr__(self) -> str:
        return "Token(%s %r @%d:%d)" % (self.kind, self.value, self.line, self.col)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    line_start = 0
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(
                "unexpected character %r" % source[pos], line, pos - line_start + 1
            )
        pos = m.end()
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = pos
            continue
        if kind in ("ws", "comment"):
            continue
        value = m.group()
        col = m.start() - line_start + 1
        if kind == "ident" and value in KEYWORDS:
            kind = "kw"
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens
