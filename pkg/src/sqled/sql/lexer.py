"""SQL tokenizer.

Keywords are matched case-insensitively.  ``GROUP BY`` and ``ORDER BY`` are
each emitted as one keyword token (terminals ``GROUP_BY_`` / ``ORDER_BY_``)
whose text keeps the original spelling and spacing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset(
    """
    SELECT FROM WHERE GROUP ORDER BY HAVING LIMIT OFFSET DISTINCT ALL AS JOIN
    INNER LEFT RIGHT FULL OUTER CROSS NATURAL ON USING AND OR NOT IN LIKE GLOB
    BETWEEN IS NULL EXISTS UNION INTERSECT EXCEPT ASC DESC CASE WHEN THEN ELSE
    END CAST ESCAPE
    """.split()
)

KEYWORD = "keyword"
IDENTIFIER = "identifier"
NUMBER = "number"
STRING = "string"
OPERATOR = "operator"
PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class SqlToken:
    text: str
    kind: str
    span: tuple[int, int]
    index: int = -1

    @property
    def terminal(self) -> str:
        """Grammar terminal name, e.g. ``SELECT_`` or ``GROUP_BY_``."""
        if self.kind == KEYWORD:
            return "_".join(self.text.upper().split()) + "_"
        return self.kind.upper()

    @property
    def value(self) -> str:
        """Keyword in canonical upper case; other tokens verbatim."""
        if self.kind == KEYWORD:
            return " ".join(self.text.upper().split())
        return self.text

    def key(self) -> tuple[str, str]:
        return (self.kind, self.value)

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text}"


_SPACE = re.compile(r"\s+|--[^\n]*|/\*.*?\*/", re.S)
_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_BY_AFTER = re.compile(r"(?:\s|--[^\n]*\n|/\*.*?\*/)+BY\b", re.S | re.I)
_OPERATORS = ("||", "<<", ">>", "<=", ">=", "==", "!=", "<>", "<", ">", "=", "+", "-", "*", "/", "%", "&", "|", "~")
_PUNCT = "(),.;"
_QUOTE_CLOSE = {"'": "'", '"': '"', "`": "`", "[": "]"}


def tokenize(sql: str) -> list[SqlToken]:
    out: list[SqlToken] = []
    i, n = 0, len(sql)

    def emit(start: int, end: int, kind: str) -> None:
        out.append(SqlToken(sql[start:end], kind, (start, end), len(out)))

    while i < n:
        m = _SPACE.match(sql, i)
        if m:
            i = m.end()
            continue
        c = sql[i]
        if c in _QUOTE_CLOSE:
            close = _QUOTE_CLOSE[c]
            j = i + 1
            while True:
                j = sql.find(close, j)
                if j < 0:
                    raise LexError(i, "unterminated quoted token")
                # doubled quote is an escaped quote (not for [...] identifiers)
                if c != "[" and sql.startswith(close * 2, j):
                    j += 2
                    continue
                break
            # double-quoted text is a string value in Spider-style SQL
            emit(i, j + 1, STRING if c in "'\"" else IDENTIFIER)
            i = j + 1
            continue
        m = _NUMBER.match(sql, i)
        if m and not (c == "." and out and out[-1].kind == IDENTIFIER):
            emit(i, m.end(), NUMBER)
            i = m.end()
            continue
        m = _WORD.match(sql, i)
        if m:
            word = m.group().upper()
            end = m.end()
            if word in ("GROUP", "ORDER"):
                by = _BY_AFTER.match(sql, end)
                if by:
                    emit(i, by.end(), KEYWORD)
                    i = by.end()
                    continue
            emit(i, end, KEYWORD if word in KEYWORDS else IDENTIFIER)
            i = end
            continue
        for op in _OPERATORS:
            if sql.startswith(op, i):
                emit(i, i + len(op), OPERATOR)
                i += len(op)
                break
        else:
            if c in _PUNCT:
                emit(i, i + 1, PUNCTUATION)
                i += 1
            else:
                raise LexError(i)
    return out


def render_tokens(tokens: list[SqlToken]) -> str:
    return " ".join(t.text for t in tokens)
