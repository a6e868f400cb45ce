import random
from collections import Counter

import pytest

from sqled.errors import CycleError, EmptyGraph
from sqled.graph import (
    Edge,
    EdgeType,
    Graph,
    Node,
    add_sequential_edges,
    build_tree,
    canonical_form,
    relabel,
    simplify_tree,
    symmetrize_with_self_loops,
)

from helpers import random_tree


def fixed_point_simplify(g: Graph, rng: random.Random) -> Graph:
    """Oracle: delete an arbitrary unary internal node until none remain."""
    nodes = {nd.id: nd for nd in g.nodes}
    child_edges = {(e.src, e.dst) for e in g.edges if e.etype == EdgeType.CHILD}
    other = [(e.src, e.dst, e.etype) for e in g.edges if e.etype != EdgeType.CHILD]
    while True:
        kids = Counter(s for s, _ in child_edges)
        unary = [u for u, nd in nodes.items() if not nd.is_leaf and kids[u] == 1]
        if not unary:
            break
        u = rng.choice(unary)
        (c,) = [d for s, d in child_edges if s == u]
        p = [s for s, d in child_edges if d == u]
        child_edges = {(s, d) for s, d in child_edges if u not in (s, d)}
        if p:
            child_edges.add((p[0], c))
        other = [(c if s == u else s, c if d == u else d, t) for s, d, t in other]
        other = [(s, d, t) for s, d, t in other if s != d]
        del nodes[u]
    keep = sorted(nodes)
    remap = {old: i for i, old in enumerate(keep)}
    out_nodes = tuple(Node(remap[o], nodes[o].token_position, nodes[o].label) for o in keep)
    edges = [Edge(remap[s], remap[d], EdgeType.CHILD) for s, d in child_edges]
    edges += [Edge(remap[s], remap[d], t) for s, d, t in other]
    return Graph(out_nodes, tuple(dict.fromkeys(edges)))


def unary_internals(g: Graph) -> list[int]:
    kids = g.children()
    return [nd.id for nd in g.nodes if not nd.is_leaf and len(kids.get(nd.id, ())) == 1]


def test_unary_chain_collapses_to_leaf():
    g = build_tree([("root", None), ("A", 0), ("B", 1), (0, 2)])
    s = simplify_tree(g)
    assert s.nodes == (Node.leaf(0, 0),)
    assert s.edges == ()
    assert s.roots() == [0]


def test_only_unary_internals_removed():
    g = build_tree([("root", None), ("A", 0), (0, 1), (1, 0)])
    s = simplify_tree(g)
    assert [nd.label for nd in s.internals()] == ["root"]
    assert sorted((e.src, e.dst) for e in s.edges) == [(0, 1), (0, 2)]
    assert [s.nodes[i].token_position for i in s.leaf_order] == [0, 1]


def test_non_child_edges_follow_survivor():
    g = build_tree([("root", None), ("A", 0), (0, 1), (1, 0)])
    g = Graph(g.nodes, g.edges + (Edge(1, 3, EdgeType.DEPENDENCY),))
    s = simplify_tree(g)
    (dep,) = s.edges_of(EdgeType.DEPENDENCY)
    assert s.nodes[dep.src].token_position == 0
    assert s.nodes[dep.dst].token_position == 1


def test_simplify_errors():
    with pytest.raises(EmptyGraph):
        simplify_tree(Graph(()))
    cyc = Graph(
        (Node.internal(0, "A"), Node.internal(1, "B"), Node.leaf(2, 0)),
        (Edge(0, 1, EdgeType.CHILD), Edge(1, 0, EdgeType.CHILD), Edge(1, 2, EdgeType.CHILD)),
    )
    with pytest.raises(CycleError):
        simplify_tree(cyc)


@pytest.mark.parametrize("seed", range(100))
def test_simplify_matches_fixed_point_oracle(seed):
    rng = random.Random(seed)
    g = random_tree(rng, max_nodes=30)
    got = simplify_tree(g)
    want = fixed_point_simplify(g, rng)
    assert canonical_form(got) == canonical_form(want)
    assert unary_internals(got) == []
    assert Counter(nd.token_position for nd in got.leaves()) == Counter(
        nd.token_position for nd in g.leaves()
    )
    got.validate()
    assert simplify_tree(got) == got


def test_simplify_is_relabeling_invariant():
    rng = random.Random(7)
    for _ in range(20):
        g = random_tree(rng)
        perm = list(range(g.n))
        rng.shuffle(perm)
        assert canonical_form(simplify_tree(relabel(g, perm))) == canonical_form(simplify_tree(g))


def test_sequential_edges_small():
    one = Graph((Node.leaf(0, 0),))
    assert add_sequential_edges(one).edges == ()
    g = build_tree([("root", None), (0, 0), (1, 0), (2, 0)])
    seq = add_sequential_edges(g).edges_of(EdgeType.SEQUENTIAL)
    assert [(e.src, e.dst) for e in seq] == [(1, 2), (2, 3)]
    with pytest.raises(EmptyGraph):
        add_sequential_edges(Graph((Node.internal(0, "x"),)))


def test_sequential_edges_count_on_random_tree():
    rng = random.Random(17)
    g = random_tree(rng, max_nodes=2, n_leaves=17)
    assert len(g.leaf_order) == 17
    out = add_sequential_edges(g)
    seq = out.edges_of(EdgeType.SEQUENTIAL)
    assert len(seq) == 16
    positions = [(out.nodes[e.src].token_position, out.nodes[e.dst].token_position) for e in seq]
    assert all(b == a + 1 for a, b in positions)
    assert add_sequential_edges(out) == out
    assert set(out.edges) - set(seq) == set(g.edges)


def test_symmetrize_examples():
    g = Graph((Node.internal(0, "a"), Node.internal(1, "b"), Node.internal(2, "c")))
    s = symmetrize_with_self_loops(g)
    assert sorted((e.src, e.dst, e.etype) for e in s.edges) == [
        (i, i, EdgeType.SELF_LOOP) for i in range(3)
    ]
    g = Graph((Node.internal(0, "a"), Node.leaf(1, 0)), (Edge(0, 1, EdgeType.CHILD),))
    s = symmetrize_with_self_loops(g)
    assert set(s.edges) == {
        Edge(0, 1, EdgeType.CHILD),
        Edge(1, 0, EdgeType.CHILD),
        Edge(0, 0, EdgeType.SELF_LOOP),
        Edge(1, 1, EdgeType.SELF_LOOP),
    }
    s.validate(message_passing=True)


@pytest.mark.parametrize("seed", range(10))
def test_symmetrize_set_oracle(seed):
    rng = random.Random(seed)
    g = add_sequential_edges(random_tree(rng))
    s = symmetrize_with_self_loops(g)
    want = {(e.src, e.dst, e.etype) for e in g.edges}
    want |= {(e.dst, e.src, e.etype) for e in g.edges}
    want |= {(i, i, EdgeType.SELF_LOOP) for i in range(g.n)}
    got = [(e.src, e.dst, e.etype) for e in s.edges]
    assert len(got) == len(set(got))
    assert set(got) == want
    assert symmetrize_with_self_loops(g) == s


def test_text_round_trip():
    rng = random.Random(3)
    g = add_sequential_edges(simplify_tree(random_tree(rng)))
    assert Graph.from_text(g.to_text()) == g
