from __future__ import annotations

from ..graph import Edge, EdgeType, Graph, Node, add_sequential_edges, simplify_tree
from .ast import SqlNode
from .lexer import tokenize
from .parser import parse


def prune_join_constraints(ast: SqlNode) -> SqlNode:
    """Drop every ON/USING subtree; joined table names stay."""
    kids = []
    for c in ast.children:
        if isinstance(c, SqlNode):
            if c.label == "join_constraint":
                continue
            c = prune_join_constraints(c)
        kids.append(c)
    return SqlNode(ast.label, tuple(kids))


def ast_to_graph(ast: SqlNode, prune_joins: bool = True, simplify: bool = True) -> Graph:
    """Parse tree -> Graph.

    Internal nodes keep their non-terminal label; each token becomes a leaf
    whose token_position is the token's index in the original token list.
    Sequential edges between consecutive leaves are always added.
    """
    if prune_joins:
        ast = prune_join_constraints(ast)
    nodes: list[Node] = []
    edges: list[Edge] = []
    stack: list[tuple[object, int | None]] = [(ast, None)]
    while stack:
        item, parent = stack.pop()
        i = len(nodes)
        if isinstance(item, SqlNode):
            nodes.append(Node.internal(i, item.label))
            stack.extend((c, i) for c in reversed(item.children))
        else:
            nodes.append(Node.leaf(i, item.index))
        if parent is not None:
            edges.append(Edge(parent, i, EdgeType.CHILD))
    g = Graph(tuple(nodes), tuple(edges))
    if simplify:
        g = simplify_tree(g)
    return add_sequential_edges(g)


def sql_graph(sql: str, prune_joins: bool = True, simplify: bool = True) -> tuple[Graph, list[str]]:
    """Tokenize, parse and convert; returns the graph and the token texts."""
    tokens = tokenize(sql)
    g = ast_to_graph(parse(tokens), prune_joins=prune_joins, simplify=simplify)
    return g, [t.text for t in tokens]
