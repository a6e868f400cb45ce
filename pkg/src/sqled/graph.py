"""Typed-node, typed-edge graphs shared by question and SQL parse trees.

A :class:`Graph` is an immutable value. Tree structure lives in ``CHILD``
edges (parent -> child); ``DEPENDENCY`` and ``SEQUENTIAL`` edges connect
leaves; ``SELF_LOOP`` edges only appear after
:func:`symmetrize_with_self_loops`, which prepares a graph for message
passing.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CycleError, EmptyGraph, GraphError


class EdgeType(enum.IntEnum):
    CHILD = 0
    DEPENDENCY = 1
    SEQUENTIAL = 2
    SELF_LOOP = 3


@dataclass(frozen=True, order=True)
class Node:
    id: int
    token_position: int | None = None
    label: str | None = None

    def __post_init__(self):
        if (self.token_position is None) == (self.label is None):
            raise GraphError(f"node {self.id} must be exactly one of leaf or internal")

    @property
    def is_leaf(self) -> bool:
        return self.token_position is not None

    @classmethod
    def leaf(cls, id: int, token_position: int) -> "Node":
        return cls(id, token_position=token_position)

    @classmethod
    def internal(cls, id: int, label: str) -> "Node":
        return cls(id, label=label)


@dataclass(frozen=True, order=True)
class Edge:
    src: int
    dst: int
    etype: EdgeType


@dataclass(frozen=True)
class Graph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def leaf_order(self) -> tuple[int, ...]:
        leaves = [nd for nd in self.nodes if nd.is_leaf]
        leaves.sort(key=lambda nd: nd.token_position)
        return tuple(nd.id for nd in leaves)

    def leaves(self) -> list[Node]:
        return [self.nodes[i] for i in self.leaf_order]

    def internals(self) -> list[Node]:
        return [nd for nd in self.nodes if not nd.is_leaf]

    def edges_of(self, etype: EdgeType) -> list[Edge]:
        return [e for e in self.edges if e.etype == etype]

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for e in self.edges:
            if e.etype == EdgeType.CHILD:
                out[e.src].append(e.dst)
        return out

    def parents(self) -> dict[int, int]:
        out = {}
        for e in self.edges:
            if e.etype == EdgeType.CHILD:
                if e.dst in out:
                    raise GraphError(f"node {e.dst} has two parents")
                out[e.dst] = e.src
        return out

    def roots(self) -> list[int]:
        par = self.parents()
        return [nd.id for nd in self.nodes if nd.id not in par]

    def validate(self, *, message_passing: bool = False) -> None:
        """Check the structural invariants; raise :class:`GraphError` on violation.

        With ``message_passing`` set, reversed Child edges and self-loops are
        allowed (the output of :func:`symmetrize_with_self_loops`).
        """
        for i, nd in enumerate(self.nodes):
            if nd.id != i:
                raise GraphError(f"node ids are not dense: position {i} holds id {nd.id}")
        positions = [nd.token_position for nd in self.nodes if nd.is_leaf]
        if len(set(positions)) != len(positions):
            raise GraphError("duplicate leaf token positions")
        seen = set()
        for e in self.edges:
            if not (0 <= e.src < self.n and 0 <= e.dst < self.n):
                raise GraphError(f"edge {e} references a missing node")
            if e.src == e.dst and not (message_passing and e.etype == EdgeType.SELF_LOOP):
                raise GraphError(f"self edge {e}")
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
        if not message_passing:
            self.parents()
            _topological_order(self)

    def to_text(self) -> str:
        """Line-oriented dump: a node table followed by an edge table."""
        lines = [f"nodes {self.n}"]
        for nd in self.nodes:
            if nd.is_leaf:
                lines.append(f"{nd.id}\tleaf\t{nd.token_position}")
            else:
                lines.append(f"{nd.id}\tinternal\t{nd.label}")
        lines.append(f"edges {len(self.edges)}")
        for e in self.edges:
            lines.append(f"{e.src}\t{e.dst}\t{e.etype.name}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = text.splitlines()
        n = int(lines[0].split()[1])
        nodes = []
        for line in lines[1 : 1 + n]:
            i, kind, val = line.split("\t")
            if kind == "leaf":
                nodes.append(Node.leaf(int(i), int(val)))
            else:
                nodes.append(Node.internal(int(i), val))
        m = int(lines[1 + n].split()[1])
        edges = []
        for line in lines[2 + n : 2 + n + m]:
            s, d, t = line.split("\t")
            edges.append(Edge(int(s), int(d), EdgeType[t]))
        return cls(tuple(nodes), tuple(edges))


def _topological_order(g: Graph) -> list[int]:
    """Nodes ordered parents-first along Child edges (roots in id order)."""
    kids = g.children()
    par = g.parents()
    order = []
    stack = sorted((i for i in range(g.n) if i not in par), reverse=True)
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(reversed(kids.get(u, [])))
    if len(order) != g.n:
        raise CycleError("Child edges contain a cycle")
    return order


def _dedup(edges: Iterable[Edge]) -> tuple[Edge, ...]:
    return tuple(dict.fromkeys(edges))


def build_tree(labels_and_parents: Sequence[tuple[str | int, int | None]]) -> Graph:
    """Convenience constructor used by tests and fixtures.

    Each entry is ``(payload, parent_index)``; an ``int`` payload is a leaf's
    token position, a ``str`` payload an internal label.
    """
    nodes, edges = [], []
    for i, (payload, parent) in enumerate(labels_and_parents):
        if isinstance(payload, str):
            nodes.append(Node.internal(i, payload))
        else:
            nodes.append(Node.leaf(i, int(payload)))
        if parent is not None:
            edges.append(Edge(parent, i, EdgeType.CHILD))
    return Graph(tuple(nodes), tuple(edges))


def simplify_tree(g: Graph) -> Graph:
    """Remove every internal node that has exactly one child, top-down.

    The removed node's child takes its place under the removed node's parent
    (or becomes a root).  Non-Child edges touching a removed node move to the
    surviving descendant.  Surviving nodes keep their relative order and are
    renumbered densely.
    """
    if g.n == 0:
        raise EmptyGraph("cannot simplify an empty graph")
    order = _topological_order(g)
    kids = g.children()
    par = g.parents()

    # A removed node forwards to whatever its only child forwards to;
    # resolved bottom-up so whole unary chains collapse.
    removed = {
        u for u in order
        if not g.nodes[u].is_leaf and len(kids.get(u, ())) == 1
    }
    target: dict[int, int] = {}
    for u in reversed(order):
        target[u] = target[kids[u][0]] if u in removed else u

    def new_parent(v: int) -> int | None:
        p = par.get(v)
        while p is not None and p in removed:
            p = par.get(p)
        return p

    keep = [u for u in range(g.n) if u not in removed]
    remap = {old: new for new, old in enumerate(keep)}
    nodes = []
    for old in keep:
        nd = g.nodes[old]
        nodes.append(Node(remap[old], nd.token_position, nd.label))

    edges = []
    for e in g.edges:
        if e.etype == EdgeType.CHILD:
            if e.dst in removed:
                continue
            p = new_parent(e.dst)
            if p is not None:
                edges.append(Edge(remap[p], remap[e.dst], EdgeType.CHILD))
        else:
            s, d = remap[target[e.src]], remap[target[e.dst]]
            if s != d or e.etype == EdgeType.SELF_LOOP:
                edges.append(Edge(s, d, e.etype))
    return Graph(tuple(nodes), _dedup(edges))


def add_sequential_edges(g: Graph) -> Graph:
    """Link consecutive leaves (by token position) with Sequential edges."""
    order = g.leaf_order
    if not order:
        raise EmptyGraph("graph has no leaves")
    new = [Edge(a, b, EdgeType.SEQUENTIAL) for a, b in zip(order, order[1:])]
    return Graph(g.nodes, _dedup(list(g.edges) + new))


def symmetrize_with_self_loops(g: Graph, *, reverse: bool = True) -> Graph:
    """Message-passing view: add reversed copies of every edge plus self-loops.

    Edge order is deterministic: sorted by (dst, src, type).  With
    ``reverse=False`` only self-loops are added (original-direction ablation).
    """
    edges = set(g.edges)
    if reverse:
        edges.update(Edge(e.dst, e.src, e.etype) for e in g.edges)
    edges.update(Edge(i, i, EdgeType.SELF_LOOP) for i in range(g.n))
    return Graph(g.nodes, tuple(sorted(edges, key=lambda e: (e.dst, e.src, e.etype))))


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Return the isomorphic graph where old node ``i`` gets id ``perm[i]``."""
    nodes = [None] * g.n
    for old, nd in enumerate(g.nodes):
        nodes[perm[old]] = Node(perm[old], nd.token_position, nd.label)
    edges = [Edge(perm[e.src], perm[e.dst], e.etype) for e in g.edges]
    return Graph(tuple(nodes), tuple(edges))


def canonical_form(g: Graph) -> tuple:
    """A relabeling-invariant key for trees with leaf positions.

    Each node is identified by (depth, smallest leaf position below it,
    label-or-position); this is unique for forests whose internal nodes all
    dominate at least one leaf.  Used by tests as a structural-equality oracle
    and by the encoder to fix a summation order independent of node ids.
    """
    order = canonical_order(g)
    rank = {u: r for r, u in enumerate(order)}
    nodes = tuple(
        ("L", g.nodes[u].token_position) if g.nodes[u].is_leaf else ("I", g.nodes[u].label)
        for u in order
    )
    edges = tuple(sorted((rank[e.src], rank[e.dst], int(e.etype)) for e in g.edges))
    return nodes, edges


def canonical_order(g: Graph) -> list[int]:
    """Node ids sorted by a key that does not depend on the ids themselves."""
    kids = defaultdict(list)
    par = {}
    for e in g.edges:
        if e.etype == EdgeType.CHILD:
            kids[e.src].append(e.dst)
            par.setdefault(e.dst, e.src)
    depth: dict[int, int] = {}

    def get_depth(u: int) -> int:
        path = []
        while u not in depth and u in par:
            path.append(u)
            u = par[u]
            if len(path) > g.n:
                raise CycleError("Child edges contain a cycle")
        d = depth.setdefault(u, 0)
        for v in reversed(path):
            d += 1
            depth[v] = d
        return d

    inf = float("inf")
    minpos: dict[int, float] = {}

    def get_minpos(u: int) -> float:
        stack = [(u, False)]
        while stack:
            v, done = stack.pop()
            if v in minpos:
                continue
            if done:
                nd = g.nodes[v]
                m = nd.token_position if nd.is_leaf else inf
                for c in kids.get(v, ()):
                    m = min(m, minpos.get(c, inf))
                minpos[v] = m
            else:
                stack.append((v, True))
                stack.extend((c, False) for c in kids.get(v, ()) if c not in minpos)
        return minpos[u]

    def key(u: int):
        nd = g.nodes[u]
        return (
            get_minpos(u),
            -get_depth(u) if nd.is_leaf else get_depth(u),
            0 if nd.is_leaf else 1,
            nd.label or "",
        )

    return sorted(range(g.n), key=key)
