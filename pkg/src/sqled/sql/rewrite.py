"""AST queries and rewrites used by the execution-based labeler."""

from __future__ import annotations

from .ast import SqlNode
from .lexer import IDENTIFIER, KEYWORD, NUMBER, STRING, SqlToken


def has_top_level_order_by(ast: SqlNode) -> bool:
    """True iff the outermost statement (not a subquery) has ORDER BY."""
    return ast.child("order_by_clause") is not None


def limit_argument(ast: SqlNode) -> tuple | None:
    clause = ast.child("limit_clause")
    if clause is None:
        return None
    return tuple(_norm_token(t) for t in clause.tokens()[1:])


def drop_equal_limits(gold: SqlNode, pred: SqlNode) -> tuple[SqlNode, SqlNode]:
    """Remove the top-level LIMIT from both queries when the arguments agree.

    Arguments are compared as normalized token sequences, so ``LIMIT 3`` and
    ``limit 3`` agree while ``LIMIT 1+2`` and ``LIMIT 3`` do not.
    """
    ga, pa = limit_argument(gold), limit_argument(pred)
    if ga is None or pa is None or ga != pa:
        return gold, pred
    return (
        gold.replace(gold.child("limit_clause"), None),
        pred.replace(pred.child("limit_clause"), None),
    )


def _norm_token(t: SqlToken) -> tuple[str, str]:
    if t.kind in (KEYWORD, IDENTIFIER):
        text = t.value.lower()
        if t.kind == IDENTIFIER and text[:1] in "`[":
            text = text[1:-1]
        return ("w", text)
    if t.kind == STRING:
        q = t.text[0]
        return ("s", t.text[1:-1].replace(q * 2, q))
    if t.kind == NUMBER:
        try:
            v = float(t.text)
        except ValueError:
            return ("n", t.text)
        return ("n", repr(int(v)) if v.is_integer() else repr(v))
    return ("o", t.text)


def normalize_for_set_match(ast: SqlNode):
    """Canonical form for the simplified exact-set-match comparison.

    Keywords and identifiers are lower-cased, table aliases are replaced by
    the table they name (scoped per SELECT), and the select list, the
    top-level WHERE conjuncts and the GROUP BY keys are sorted.  Nested
    structure is otherwise compared as-is.
    """
    return _canon(ast, {})


def set_match(a: SqlNode, b: SqlNode) -> bool:
    return normalize_for_set_match(a) == normalize_for_set_match(b)


def _aliases(core: SqlNode) -> dict[str, str]:
    out = {}
    frm = core.child("from_clause")
    if frm is None:
        return out
    stack = [frm]
    while stack:
        node = stack.pop()
        if node.label == "table_or_subquery":
            table, alias = node.child("table_name"), node.child("table_alias")
            if table is not None and alias is not None:
                out[_norm_token(alias.children[0])[1]] = _norm_token(table.children[0])[1]
        stack.extend(c for c in node.children if isinstance(c, SqlNode) and c.label != "select_stmt")
    return out


def _sorted(items):
    return tuple(sorted(items, key=repr))


def _conjuncts(e: SqlNode) -> list[SqlNode]:
    kids = e.children
    if (len(kids) == 3 and isinstance(kids[1], SqlToken) and kids[1].kind == KEYWORD
            and kids[1].value == "AND"):
        return _conjuncts(kids[0]) + _conjuncts(kids[2])
    return [e]


def _canon(node, scope: dict[str, str]):
    if isinstance(node, SqlToken):
        return _norm_token(node)
    label = node.label
    if label == "select_core":
        scope = {**scope, **_aliases(node)}
    if label == "table_or_subquery":
        # alias declarations vanish once references are inlined
        kids = [c for c in node.children
                if not (isinstance(c, SqlNode) and c.label == "table_alias")
                and not (isinstance(c, SqlToken) and c.kind == KEYWORD and c.value == "AS")]
        return (label,) + tuple(_canon(c, scope) for c in kids)
    if label == "table_name" and len(node.children) == 1:
        name = _norm_token(node.children[0])[1]
        return (label, ("w", scope.get(name, name)))
    if label == "result_clause":
        return (label, _sorted(_canon(c, scope) for c in node.nodes("result_column")))
    if label == "where_clause":
        return (label, _sorted(_canon(c, scope) for c in _conjuncts(node.children[1])))
    if label == "group_by_clause":
        keys, having, seen_having = [], None, False
        for c in node.children[1:]:
            if isinstance(c, SqlToken):
                seen_having |= c.kind == KEYWORD and c.value == "HAVING"
            elif seen_having:
                having = _canon(c, scope)
            else:
                keys.append(_canon(c, scope))
        return (label, _sorted(keys), having)
    return (label,) + tuple(_canon(c, scope) for c in node.children)
