from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .lexer import SqlToken


@dataclass(frozen=True)
class SqlNode:
    """Internal parse-tree node labeled by a grammar non-terminal."""

    label: str
    children: tuple["Child", ...]

    def tokens(self) -> list[SqlToken]:
        return [t for t in self.walk_tokens()]

    def walk_tokens(self) -> Iterator[SqlToken]:
        for c in self.children:
            if isinstance(c, SqlNode):
                yield from c.walk_tokens()
            else:
                yield c

    def walk(self) -> Iterator["SqlNode"]:
        """Pre-order traversal over internal nodes."""
        yield self
        for c in self.children:
            if isinstance(c, SqlNode):
                yield from c.walk()

    def child(self, label: str) -> "SqlNode | None":
        for c in self.children:
            if isinstance(c, SqlNode) and c.label == label:
                return c
        return None

    def nodes(self, label: str) -> list["SqlNode"]:
        return [c for c in self.children if isinstance(c, SqlNode) and c.label == label]

    def key(self) -> tuple:
        """Structural identity ignoring token spans and keyword case."""
        return (self.label,) + tuple(c.key() for c in self.children)

    def render(self) -> str:
        return " ".join(t.text for t in self.walk_tokens())

    def sexpr(self) -> str:
        parts = [self.label]
        for c in self.children:
            parts.append(c.sexpr() if isinstance(c, SqlNode) else _atom(c))
        return "(" + " ".join(parts) + ")"

    def replace(self, old: "SqlNode", new: "SqlNode | None") -> "SqlNode":
        """Copy with the subtree ``old`` (by identity) swapped for ``new`` (or dropped)."""
        if self is old:
            return new
        kids = []
        changed = False
        for c in self.children:
            if isinstance(c, SqlNode):
                r = c.replace(old, new)
                changed |= r is not c
                if r is not None:
                    kids.append(r)
            else:
                kids.append(c)
        return SqlNode(self.label, tuple(kids)) if changed else self


Child = Union[SqlNode, SqlToken]

SqlAst = SqlNode


def _atom(t: SqlToken) -> str:
    text = t.value
    if any(ch in text for ch in ' ()"\\') or text == "":
        text = '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return text
