"""Tokenizer for canonical VectorSQL."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SqlSyntaxError

KEYWORDS = frozenset(
    """
    SELECT FROM WHERE GROUP BY HAVING ORDER LIMIT WITH AS JOIN INNER LEFT OUTER ON
    AND OR NOT IN IS NULL BETWEEN LIKE TRUE FALSE DISTINCT ASC DESC
    UNION INTERSECT EXCEPT RIGHT FULL CROSS NATURAL OVER RECURSIVE INSERT UPDATE
    DELETE OFFSET EXISTS CASE WINDOW PARTITION USING
    """.split()
)

# Recognized by the lexer but rejected by the parser wherever they appear.
UNSUPPORTED_KEYWORDS = frozenset(
    "UNION INTERSECT EXCEPT RIGHT FULL CROSS NATURAL OVER RECURSIVE INSERT UPDATE "
    "DELETE OFFSET EXISTS CASE WINDOW PARTITION USING".split()
)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT QIDENT KEYWORD STRING NUMBER PARAM OP EOF
    value: str
    line: int
    col: int

    def is_kw(self, *names: str) -> bool:
        return self.kind == "KEYWORD" and self.value in names

    def is_op(self, *ops: str) -> bool:
        return self.kind == "OP" and self.value in ops


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<param>\$\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<qident>"(?:[^"]|"")*")
  | (?P<string>'(?:[^']|'')*')
  | (?P<op><>|!=|<=|>=|\|\||[=<>+\-*/%(),.;\[\]])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text[pos] in "'\"":
                raise SqlSyntaxError("unterminated quoted literal", line, col)
            raise SqlSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        if kind == "ident":
            upper = raw.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, line, col))
            else:
                tokens.append(Token("IDENT", raw.lower(), line, col))
        elif kind == "qident":
            tokens.append(Token("QIDENT", raw[1:-1].replace('""', '"'), line, col))
        elif kind == "string":
            tokens.append(Token("STRING", raw[1:-1].replace("''", "'"), line, col))
        elif kind == "number":
            tokens.append(Token("NUMBER", raw, line, col))
        elif kind == "param":
            tokens.append(Token("PARAM", raw[1:], line, col))
        elif kind == "op":
            tokens.append(Token("OP", raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            line_start = pos + raw.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens
