"""Random structure generators shared by several test modules."""

import random

from sqled.graph import Edge, EdgeType, Graph, Node


def random_tree(rng: random.Random, max_nodes: int = 30, n_leaves: int | None = None) -> Graph:
    """Random rooted tree; every internal node dominates at least one leaf."""
    labels = ["S", "NP", "VP", "expr", "select_core", "X"]
    parents: list[int | None] = [None]
    is_leaf = [False]
    target = rng.randint(2, max_nodes)
    while len(parents) < target:
        internals = [i for i, lf in enumerate(is_leaf) if not lf]
        parents.append(rng.choice(internals))
        is_leaf.append(rng.random() < 0.45)
    for i in range(len(parents)):
        if not is_leaf[i] and i not in parents:
            parents.append(i)
            is_leaf.append(True)
    if n_leaves is not None:
        while sum(is_leaf) < n_leaves:
            internals = [i for i, lf in enumerate(is_leaf) if not lf]
            parents.append(rng.choice(internals))
            is_leaf.append(True)
    leaf_ids = [i for i, lf in enumerate(is_leaf) if lf]
    positions = list(range(len(leaf_ids)))
    rng.shuffle(positions)
    pos_of = dict(zip(leaf_ids, positions))
    nodes = [
        Node.leaf(i, pos_of[i]) if is_leaf[i] else Node.internal(i, rng.choice(labels))
        for i in range(len(parents))
    ]
    edges = [Edge(p, i, EdgeType.CHILD) for i, p in enumerate(parents) if p is not None]
    return Graph(tuple(nodes), tuple(edges))


def shuffle_ids(g: Graph, rng: random.Random) -> tuple[Graph, list[int]]:
    from sqled.graph import relabel

    perm = list(range(g.n))
    rng.shuffle(perm)
    h = relabel(g, perm)
    edges = list(h.edges)
    rng.shuffle(edges)
    return Graph(h.nodes, tuple(edges)), perm
