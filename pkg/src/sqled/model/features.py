"""Graphs -> index arrays the encoder consumes, and disjoint-union batches."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DimensionError, EmptyGraph
from ..graph import Graph, canonical_order, relabel, symmetrize_with_self_loops
from .vocab import Vocab, norm_token


@dataclass(frozen=True, eq=False)
class GraphInput:
    """One message-passing graph in canonical node order.

    ``tok``/``lab`` hold vocabulary ids (-1 where not applicable); edges are
    sorted by (dst, src, type) and include self-loops.  ``external`` has one
    row per token position when precomputed leaf vectors are supplied.
    """

    tok: np.ndarray
    lab: np.ndarray
    pos: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    etype: np.ndarray
    external: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.tok)

    def key(self) -> tuple:
        ext = None if self.external is None else self.external.tobytes()
        return (self.tok.tobytes(), self.lab.tobytes(), self.pos.tobytes(), self.src.tobytes(),
                self.dst.tobytes(), self.etype.tobytes(), ext)


def graph_words(g: Graph, tokens: Sequence[str]) -> tuple[list[str], list[str]]:
    """Normalized leaf words and internal labels of a graph, for vocabulary building."""
    words = [norm_token(tokens[nd.token_position]) for nd in g.nodes if nd.is_leaf]
    labels = [nd.label for nd in g.nodes if not nd.is_leaf]
    return words, labels


def featurize(g: Graph, tokens: Sequence[str], tok_vocab: Vocab, lab_vocab: Vocab, *,
              symmetric: bool = True, external: np.ndarray | None = None) -> GraphInput:
    if g.n == 0:
        raise EmptyGraph("cannot encode an empty graph")
    order = canonical_order(g)
    perm = [0] * g.n
    for new, old in enumerate(order):
        perm[old] = new
    mp = symmetrize_with_self_loops(relabel(g, perm), reverse=symmetric)
    tok = np.full(g.n, -1, dtype=np.int64)
    lab = np.full(g.n, -1, dtype=np.int64)
    pos = np.full(g.n, -1, dtype=np.int64)
    for nd in mp.nodes:
        if nd.is_leaf:
            tok[nd.id] = tok_vocab[norm_token(tokens[nd.token_position])]
            pos[nd.id] = nd.token_position
        else:
            lab[nd.id] = lab_vocab[nd.label]
    src = np.array([e.src for e in mp.edges], dtype=np.int64)
    dst = np.array([e.dst for e in mp.edges], dtype=np.int64)
    et = np.array([int(e.etype) for e in mp.edges], dtype=np.int64)
    if external is not None:
        external = np.asarray(external, dtype=np.float64)
        if external.ndim != 2 or external.shape[0] != len(tokens):
            raise DimensionError(f"external vectors need {len(tokens)} rows, got shape {external.shape}")
    return GraphInput(tok, lab, pos, src, dst, et, external)


@dataclass
class Segments:
    """Disjoint union of several GraphInputs plus the index helpers the layers need."""

    n: int
    tok: np.ndarray
    lab: np.ndarray
    ext_rows: np.ndarray | None  # (n, ext_dim) with zeros on non-external rows
    ext_mask: np.ndarray  # bool (n,), rows taken from external vectors
    src: np.ndarray
    dst: np.ndarray
    etype: np.ndarray
    dst_starts: np.ndarray
    src_perm: np.ndarray
    src_starts: np.ndarray
    graph_starts: np.ndarray
    graph_sizes: np.ndarray


def union(graphs: Sequence[GraphInput]) -> Segments:
    if not graphs:
        raise EmptyGraph("empty batch")
    sizes = np.array([g.n for g in graphs], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    n = int(sizes.sum())
    tok = np.concatenate([g.tok for g in graphs])
    lab = np.concatenate([g.lab for g in graphs])
    src = np.concatenate([g.src + o for g, o in zip(graphs, offsets)])
    dst = np.concatenate([g.dst + o for g, o in zip(graphs, offsets)])
    et = np.concatenate([g.etype for g in graphs])
    ext_dims = {g.external.shape[1] for g in graphs if g.external is not None}
    if len(ext_dims) > 1:
        raise DimensionError(f"mixed external widths {sorted(ext_dims)}")
    ext_mask = np.zeros(n, dtype=bool)
    ext_rows = None
    if ext_dims:
        ext_rows = np.zeros((n, ext_dims.pop()))
        for g, o in zip(graphs, offsets):
            if g.external is not None:
                leaves = np.nonzero(g.pos >= 0)[0]
                ext_rows[o + leaves] = g.external[g.pos[leaves]]
                ext_mask[o + leaves] = True
    ids = np.arange(n)
    dst_starts = np.searchsorted(dst, ids)
    src_perm = np.argsort(src, kind="stable")
    src_starts = np.searchsorted(src[src_perm], ids)
    return Segments(n, tok, lab, ext_rows, ext_mask, src, dst, et, dst_starts, src_perm, src_starts,
                    offsets.astype(np.int64), sizes)


@dataclass
class Batch:
    questions: Segments
    sqls: Segments
    q_index: np.ndarray  # pair -> question graph
    size: int


def make_batch(pairs: Iterable[tuple[GraphInput, GraphInput]]) -> Batch:
    """Pairs sharing the same question GraphInput object reuse one encoding."""
    q_graphs: list[GraphInput] = []
    q_seen: dict[int, int] = {}
    q_index, s_graphs = [], []
    for q, s in pairs:
        k = id(q)
        if k not in q_seen:
            q_seen[k] = len(q_graphs)
            q_graphs.append(q)
        q_index.append(q_seen[k])
        s_graphs.append(s)
    return Batch(union(q_graphs), union(s_graphs), np.array(q_index, dtype=np.int64), len(s_graphs))
