from .ast import SqlAst, SqlNode
from .lexer import SqlToken, render_tokens, tokenize
from .parser import parse, parse_sql, roundtrip_equal
from .rewrite import (
    drop_equal_limits,
    has_top_level_order_by,
    normalize_for_set_match,
    set_match,
)
from .to_graph import ast_to_graph, prune_join_constraints, sql_graph

__all__ = [
    "SqlAst",
    "SqlNode",
    "SqlToken",
    "ast_to_graph",
    "drop_equal_limits",
    "has_top_level_order_by",
    "normalize_for_set_match",
    "parse",
    "parse_sql",
    "prune_join_constraints",
    "render_tokens",
    "roundtrip_equal",
    "set_match",
    "sql_graph",
    "tokenize",
]
