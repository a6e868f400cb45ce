"""Recursive-descent parser for the Spider subset of SQLite.

The clause structure follows the restructured ``select_core``::

    select_core     : SELECT_ (DISTINCT_ | ALL_)? result_clause from_clause?
                      where_clause? group_by_clause?
    result_clause   : result_column (COMMA result_column)*
    from_clause     : FROM_ table_or_subquery (COMMA table_or_subquery)*
                    | FROM_ join_clause
    where_clause    : WHERE_ expr
    group_by_clause : GROUP_BY_ expr (COMMA expr)* (HAVING_ expr)?

around which sit ``select_stmt`` (compound + ORDER BY + LIMIT) and
``compound_select`` (binary UNION / INTERSECT / EXCEPT).  Expressions are
all labeled ``expr``; names get ``table_name`` / ``column_name`` /
``function_name`` / alias wrappers as in the ANTLR grammar.
"""

from __future__ import annotations

from ..errors import SQLSyntaxError
from .ast import SqlNode
from .lexer import IDENTIFIER, KEYWORD, NUMBER, OPERATOR, PUNCTUATION, STRING, SqlToken, tokenize

_EQUALITY_OPS = {"=", "==", "!=", "<>"}
_COMPARISON_OPS = {"<", "<=", ">", ">="}
_ADDITIVE_OPS = {"+", "-"}
_MULT_OPS = {"*", "/", "%"}
_JOIN_WORDS = {"JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL"}


class Parser:
    def __init__(self, tokens: list[SqlToken]):
        self.toks = tokens
        self.i = 0

    # -- token helpers -------------------------------------------------
    def peek(self, offset: int = 0) -> SqlToken | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def at_kw(self, *words: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind == KEYWORD and t.value in words

    def at(self, *texts: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind in (OPERATOR, PUNCTUATION) and t.text in texts

    def fail(self, *expected: str):
        t = self.peek()
        raise SQLSyntaxError(self.i, set(expected), t.text if t else "<end>")

    def take(self) -> SqlToken:
        t = self.peek()
        if t is None:
            self.fail("<token>")
        self.i += 1
        return t

    def expect_kw(self, word: str) -> SqlToken:
        if not self.at_kw(word):
            self.fail(word)
        return self.take()

    def expect(self, text: str) -> SqlToken:
        if not self.at(text):
            self.fail(text)
        return self.take()

    def name(self, label: str) -> SqlNode:
        t = self.peek()
        if t is None or t.kind not in (IDENTIFIER, STRING):
            self.fail(label)
        return SqlNode(label, (self.take(),))

    # -- statements ----------------------------------------------------
    def parse(self) -> SqlNode:
        stmt = self.select_stmt()
        if self.at(";"):
            stmt = SqlNode(stmt.label, stmt.children + (self.take(),))
        if self.peek() is not None:
            self.fail("<end>", ";")
        return stmt

    def select_stmt(self) -> SqlNode:
        kids = [self.compound()]
        if self.at_kw("ORDER BY"):
            kids.append(self.order_by_clause())
        if self.at_kw("LIMIT"):
            kids.append(self.limit_clause())
        return SqlNode("select_stmt", tuple(kids))

    def compound(self) -> SqlNode:
        left = self.select_core()
        while self.at_kw("UNION", "INTERSECT", "EXCEPT"):
            op = [self.take()]
            if op[0].value == "UNION" and self.at_kw("ALL"):
                op.append(self.take())
            right = self.select_core()
            left = SqlNode("compound_select", (left, SqlNode("compound_operator", tuple(op)), right))
        return left

    def select_core(self) -> SqlNode:
        kids: list = [self.expect_kw("SELECT")]
        if self.at_kw("DISTINCT", "ALL"):
            kids.append(self.take())
        kids.append(self.result_clause())
        if self.at_kw("FROM"):
            kids.append(self.from_clause())
        if self.at_kw("WHERE"):
            kids.append(SqlNode("where_clause", (self.take(), self.expr())))
        if self.at_kw("GROUP BY"):
            kids.append(self.group_by_clause())
        return SqlNode("select_core", tuple(kids))

    def result_clause(self) -> SqlNode:
        kids = [self.result_column()]
        while self.at(","):
            kids.append(self.take())
            kids.append(self.result_column())
        return SqlNode("result_clause", tuple(kids))

    def result_column(self) -> SqlNode:
        if self.at("*"):
            return SqlNode("result_column", (self.take(),))
        t, dot, star = self.peek(), self.peek(1), self.peek(2)
        if (t is not None and t.kind == IDENTIFIER and dot is not None and dot.text == "."
                and star is not None and star.text == "*"):
            return SqlNode("result_column", (SqlNode("table_name", (self.take(),)), self.take(), self.take()))
        kids: list = [self.expr()]
        kids.extend(self.alias("column_alias"))
        return SqlNode("result_column", tuple(kids))

    def alias(self, label: str) -> list:
        out = []
        if self.at_kw("AS"):
            out.append(self.take())
            out.append(self.name(label))
        elif (t := self.peek()) is not None and t.kind == IDENTIFIER:
            out.append(self.name(label))
        return out

    def from_clause(self) -> SqlNode:
        from_kw = self.take()
        first = self.table_or_subquery()
        items: list = [first]
        is_join = False
        while True:
            if self.at(","):
                items.append(SqlNode("join_operator", (self.take(),)) if is_join else self.take())
                items.append(self.table_or_subquery())
            elif self.at_kw(*_JOIN_WORDS):
                if not is_join:
                    items = [SqlNode("join_operator", (c,)) if isinstance(c, SqlToken) else c for c in items]
                    is_join = True
                items.append(self.join_operator())
                items.append(self.table_or_subquery())
                if self.at_kw("ON", "USING"):
                    items.append(self.join_constraint())
            else:
                break
        if is_join:
            return SqlNode("from_clause", (from_kw, SqlNode("join_clause", tuple(items))))
        return SqlNode("from_clause", (from_kw, *items))

    def join_operator(self) -> SqlNode:
        kids = []
        if self.at_kw("NATURAL"):
            kids.append(self.take())
        if self.at_kw("LEFT", "RIGHT", "FULL"):
            kids.append(self.take())
            if self.at_kw("OUTER"):
                kids.append(self.take())
        elif self.at_kw("INNER", "CROSS"):
            kids.append(self.take())
        kids.append(self.expect_kw("JOIN"))
        return SqlNode("join_operator", tuple(kids))

    def join_constraint(self) -> SqlNode:
        if self.at_kw("ON"):
            return SqlNode("join_constraint", (self.take(), self.expr()))
        kids: list = [self.take(), self.expect("(")]
        kids.append(self.name("column_name"))
        while self.at(","):
            kids.append(self.take())
            kids.append(self.name("column_name"))
        kids.append(self.expect(")"))
        return SqlNode("join_constraint", tuple(kids))

    def table_or_subquery(self) -> SqlNode:
        if self.at("("):
            kids: list = [self.take(), self.select_stmt(), self.expect(")")]
        else:
            t = self.peek()
            if t is None or t.kind != IDENTIFIER:
                self.fail("table name", "(")
            kids = [SqlNode("table_name", (self.take(),))]
        kids.extend(self.alias("table_alias"))
        return SqlNode("table_or_subquery", tuple(kids))

    def group_by_clause(self) -> SqlNode:
        kids: list = [self.take(), self.expr()]
        while self.at(","):
            kids.append(self.take())
            kids.append(self.expr())
        if self.at_kw("HAVING"):
            kids.append(self.take())
            kids.append(self.expr())
        return SqlNode("group_by_clause", tuple(kids))

    def order_by_clause(self) -> SqlNode:
        kids: list = [self.take(), self.ordering_term()]
        while self.at(","):
            kids.append(self.take())
            kids.append(self.ordering_term())
        return SqlNode("order_by_clause", tuple(kids))

    def ordering_term(self) -> SqlNode:
        kids: list = [self.expr()]
        if self.at_kw("ASC", "DESC"):
            kids.append(self.take())
        return SqlNode("ordering_term", tuple(kids))

    def limit_clause(self) -> SqlNode:
        kids: list = [self.take(), self.expr()]
        if self.at_kw("OFFSET") or self.at(","):
            kids.append(self.take())
            kids.append(self.expr())
        return SqlNode("limit_clause", tuple(kids))

    # -- expressions ---------------------------------------------------
    def expr(self) -> SqlNode:
        left = self.and_expr()
        while self.at_kw("OR"):
            op = self.take()
            left = SqlNode("expr", (left, op, self.and_expr()))
        return left

    def and_expr(self) -> SqlNode:
        left = self.not_expr()
        while self.at_kw("AND"):
            op = self.take()
            left = SqlNode("expr", (left, op, self.not_expr()))
        return left

    def not_expr(self) -> SqlNode:
        if self.at_kw("NOT") and not self.at_kw("EXISTS", offset=1):
            op = self.take()
            return SqlNode("expr", (op, self.not_expr()))
        return self.equality()

    def equality(self) -> SqlNode:
        left = self.comparison()
        while True:
            if self.at(*_EQUALITY_OPS):
                op = self.take()
                left = SqlNode("expr", (left, op, self.comparison()))
            elif self.at_kw("IS"):
                ops = [self.take()]
                if self.at_kw("NOT"):
                    ops.append(self.take())
                left = SqlNode("expr", (left, *ops, self.comparison()))
            elif self.at_kw("IN", "LIKE", "GLOB", "BETWEEN") or (
                self.at_kw("NOT") and self.at_kw("IN", "LIKE", "GLOB", "BETWEEN", offset=1)
            ):
                ops = []
                if self.at_kw("NOT"):
                    ops.append(self.take())
                word = self.take()
                ops.append(word)
                if word.value == "IN":
                    left = SqlNode("expr", (left, *ops, *self.in_rhs()))
                elif word.value == "BETWEEN":
                    low = self.comparison()
                    and_kw = self.expect_kw("AND")
                    left = SqlNode("expr", (left, *ops, low, and_kw, self.comparison()))
                else:
                    kids = [left, *ops, self.comparison()]
                    if self.at_kw("ESCAPE"):
                        kids += [self.take(), self.comparison()]
                    left = SqlNode("expr", tuple(kids))
            else:
                return left

    def in_rhs(self) -> list:
        open_ = self.expect("(")
        if self.at_kw("SELECT"):
            return [open_, self.select_stmt(), self.expect(")")]
        kids: list = [open_]
        if not self.at(")"):
            kids.append(self.expr())
            while self.at(","):
                kids.append(self.take())
                kids.append(self.expr())
        kids.append(self.expect(")"))
        return kids

    def _binary(self, ops: set[str], sub) -> SqlNode:
        left = sub()
        while self.at(*ops):
            op = self.take()
            left = SqlNode("expr", (left, op, sub()))
        return left

    def comparison(self) -> SqlNode:
        return self._binary(_COMPARISON_OPS, self.additive)

    def additive(self) -> SqlNode:
        return self._binary(_ADDITIVE_OPS, self.multiplicative)

    def multiplicative(self) -> SqlNode:
        return self._binary(_MULT_OPS, self.concat)

    def concat(self) -> SqlNode:
        return self._binary({"||"}, self.unary)

    def unary(self) -> SqlNode:
        if self.at("-", "+", "~"):
            op = self.take()
            return SqlNode("expr", (op, self.unary()))
        return self.primary()

    def primary(self) -> SqlNode:
        t = self.peek()
        if t is None:
            self.fail("expression")
        if t.kind in (NUMBER, STRING) or (t.kind == KEYWORD and t.value == "NULL"):
            return SqlNode("expr", (SqlNode("literal_value", (self.take(),)),))
        if self.at("("):
            open_ = self.take()
            if self.at_kw("SELECT"):
                return SqlNode("expr", (open_, self.select_stmt(), self.expect(")")))
            inner = self.expr()
            return SqlNode("expr", (open_, inner, self.expect(")")))
        if self.at_kw("EXISTS") or (self.at_kw("NOT") and self.at_kw("EXISTS", offset=1)):
            kids: list = []
            if self.at_kw("NOT"):
                kids.append(self.take())
            kids += [self.take(), self.expect("(")]
            if not self.at_kw("SELECT"):
                self.fail("SELECT")
            kids += [self.select_stmt(), self.expect(")")]
            return SqlNode("expr", tuple(kids))
        if self.at_kw("CASE"):
            return self.case_expr()
        if self.at_kw("CAST"):
            kids = [self.take(), self.expect("("), self.expr(), self.expect_kw("AS")]
            kids.append(self.name("type_name"))
            kids.append(self.expect(")"))
            return SqlNode("expr", tuple(kids))
        if t.kind == IDENTIFIER:
            nxt = self.peek(1)
            if nxt is not None and nxt.text == "(":
                return self.function_call()
            if nxt is not None and nxt.text == ".":
                table = SqlNode("table_name", (self.take(),))
                dot = self.take()
                return SqlNode("expr", (table, dot, self.name("column_name")))
            return SqlNode("expr", (SqlNode("column_name", (self.take(),)),))
        self.fail("expression")

    def function_call(self) -> SqlNode:
        kids: list = [SqlNode("function_name", (self.take(),)), self.take()]
        if self.at("*"):
            kids.append(self.take())
        elif not self.at(")"):
            if self.at_kw("DISTINCT"):
                kids.append(self.take())
            kids.append(self.expr())
            while self.at(","):
                kids.append(self.take())
                kids.append(self.expr())
        kids.append(self.expect(")"))
        return SqlNode("expr", tuple(kids))

    def case_expr(self) -> SqlNode:
        kids: list = [self.take()]
        if not self.at_kw("WHEN"):
            kids.append(self.expr())
        if not self.at_kw("WHEN"):
            self.fail("WHEN")
        while self.at_kw("WHEN"):
            kids += [self.take(), self.expr(), self.expect_kw("THEN"), self.expr()]
        if self.at_kw("ELSE"):
            kids += [self.take(), self.expr()]
        kids.append(self.expect_kw("END"))
        return SqlNode("expr", tuple(kids))


def parse(tokens: list[SqlToken]) -> SqlNode:
    """Parse a token list into a ``select_stmt`` tree; raises SQLSyntaxError."""
    return Parser(tokens).parse()


def parse_sql(sql: str) -> SqlNode:
    return parse(tokenize(sql))


def roundtrip_equal(sql: str) -> bool:
    """parse -> render -> parse gives a structurally identical tree."""
    a = parse_sql(sql)
    return parse_sql(a.render()).key() == a.key()
