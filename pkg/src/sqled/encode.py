"""Beam records + question annotations -> encoder inputs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .dataset import BeamRecord
from .errors import DataError, MismatchError
from .execeval import Label
from .graph import Edge, EdgeType, Graph, Node, add_sequential_edges
from .model.features import GraphInput, featurize, graph_words
from .model.train import TrainBeam
from .model.vocab import Vocab
from .nl import QuestionAnnotation, build_question_graph
from .sql import sql_graph
from .sql.lexer import tokenize


@dataclass(frozen=True)
class GraphOptions:
    simplify: bool = True
    prune_joins: bool = True
    symmetric: bool = True


def _flat_graph(label: str, tokens: Sequence[str]) -> Graph:
    nodes = [Node.internal(0, label)] + [Node.leaf(i + 1, i) for i in range(len(tokens))]
    edges = [Edge(0, i + 1, EdgeType.CHILD) for i in range(len(tokens))]
    return add_sequential_edges(Graph(tuple(nodes), tuple(edges)))


def sql_graph_or_flat(sql: str, opts: GraphOptions) -> tuple[Graph, list[str]]:
    """SQL parse graph; strings outside the grammar get a flat one-level tree."""
    try:
        return sql_graph(sql, prune_joins=opts.prune_joins, simplify=opts.simplify)
    except DataError:
        pass
    try:
        toks = [t.text for t in tokenize(sql)]
    except DataError:
        toks = sql.split()
    return _flat_graph("unparsed", toks or ["<empty>"]), toks or ["<empty>"]


def question_graph(ann: QuestionAnnotation, opts: GraphOptions) -> tuple[Graph, list[str]]:
    return build_question_graph(ann, simplify=opts.simplify), list(ann.tokens)


def _annotation(annotations: Mapping[str, QuestionAnnotation], beam: BeamRecord) -> QuestionAnnotation:
    try:
        return annotations[beam.question_id]
    except KeyError:
        raise MismatchError(beam.question_id, "no annotation for question") from None


def build_vocabs(beams: Sequence[BeamRecord], annotations: Mapping[str, QuestionAnnotation],
                 opts: GraphOptions = GraphOptions(), min_count: int = 1) -> tuple[Vocab, Vocab]:
    words, labels = [], []
    for b in beams:
        w, lab = graph_words(*question_graph(_annotation(annotations, b), opts))
        words += w
        labels += lab
        for p in b.predictions:
            w, lab = graph_words(*sql_graph_or_flat(p.sql, opts))
            words += w
            labels += lab
    return Vocab.build(words, min_count), Vocab.build(labels)


def encode_beams(beams: Sequence[BeamRecord], annotations: Mapping[str, QuestionAnnotation],
                 tok_vocab: Vocab, lab_vocab: Vocab, opts: GraphOptions = GraphOptions(),
                 embeddings=None) -> list[TrainBeam]:
    """One TrainBeam per record; labels are 1 for Correct, 0 for Wrong/Unexecutable, -1 when absent."""
    cache: dict[str, tuple[Graph, list[str]]] = {}
    out = []
    for b in beams:
        qg, qt = question_graph(_annotation(annotations, b), opts)
        qext = embeddings.question(b.question_id, len(qt)) if embeddings is not None else None
        q = featurize(qg, qt, tok_vocab, lab_vocab, symmetric=opts.symmetric, external=qext)
        sqls: list[GraphInput] = []
        labels: list[int] = []
        for rank, p in enumerate(b.predictions):
            if p.sql not in cache:
                cache[p.sql] = sql_graph_or_flat(p.sql, opts)
            sg, st = cache[p.sql]
            sext = embeddings.sql(b.question_id, rank, len(st)) if embeddings is not None else None
            sqls.append(featurize(sg, st, tok_vocab, lab_vocab, symmetric=opts.symmetric, external=sext))
            labels.append(-1 if p.label is None else int(p.label is Label.CORRECT))
        out.append(TrainBeam(b.question_id, b.db_id, q, sqls, labels))
    return out
