"""Question annotations (dependency + constituency parses) and question graphs.

Annotation file format, one record per line, UTF-8, tab separated::

    question_id <TAB> tokens <TAB> heads <TAB> relations <TAB> bracketed tree

``tokens``, ``heads`` and ``relations`` are space separated.  Heads are
1-based token indices with 0 marking the root.  Tree leaves use the PTB
escapes ``-LRB-``/``-RRB-`` (and friends) for bracket tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import FormatError, MismatchError
from .graph import Edge, EdgeType, Graph, Node, add_sequential_edges, simplify_tree

_PTB_ESCAPES = {"-LRB-": "(", "-RRB-": ")", "-LSB-": "[", "-RSB-": "]", "-LCB-": "{", "-RCB-": "}"}
_PTB_UNESCAPE = {v: k for k, v in _PTB_ESCAPES.items()}


@dataclass(frozen=True)
class QuestionAnnotation:
    question_id: str
    tokens: tuple[str, ...]
    dep_heads: tuple[int, ...]
    dep_rels: tuple[str, ...]
    constituency: str

    def validate(self) -> None:
        n = len(self.tokens)
        if not (n == len(self.dep_heads) == len(self.dep_rels)):
            raise MismatchError(
                self.question_id,
                f"{n} tokens, {len(self.dep_heads)} heads, {len(self.dep_rels)} relations",
            )
        if n == 0:
            raise MismatchError(self.question_id, "no tokens")
        tree = parse_bracketed(self.constituency)
        leaves = [w for _, w in tree_leaves(tree)]
        if leaves != list(self.tokens):
            raise MismatchError(self.question_id, f"tree leaves {leaves} != tokens {list(self.tokens)}")
        _check_dependency_tree(self.question_id, self.dep_heads)


def _check_dependency_tree(qid: str, heads: tuple[int, ...]) -> None:
    n = len(heads)
    roots = [i for i, h in enumerate(heads) if h == 0]
    if len(roots) != 1:
        raise MismatchError(qid, f"dependency tree has {len(roots)} roots")
    for h in heads:
        if not 0 <= h <= n:
            raise MismatchError(qid, f"head index {h} out of range")
    for i in range(n):
        seen = set()
        j = i
        while heads[j] != 0:
            if j in seen:
                raise MismatchError(qid, "dependency heads contain a cycle")
            seen.add(j)
            j = heads[j] - 1


# A parsed constituency tree is (label, children) for internal nodes and a
# plain string for a leaf.
Tree = tuple


def parse_bracketed(text: str) -> Tree:
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def node():
        nonlocal pos
        if toks[pos] != "(":
            raise ValueError(f"expected '(' at item {pos}")
        pos += 1
        label = toks[pos] if toks[pos] not in "()" else ""
        if label:
            pos += 1
        kids = []
        while toks[pos] != ")":
            if toks[pos] == "(":
                kids.append(node())
            else:
                kids.append(_PTB_ESCAPES.get(toks[pos], toks[pos]))
                pos += 1
        pos += 1
        return (label, kids)

    try:
        tree = node()
        if pos != len(toks):
            raise ValueError("trailing material after tree")
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad bracketed tree: {exc}") from None
    # an unlabeled outer wrapper "( (S ...) )" is common in PTB-style output
    if tree[0] == "" and len(tree[1]) == 1 and isinstance(tree[1][0], tuple):
        tree = tree[1][0]
    return tree


def tree_leaves(tree: Tree) -> list[tuple[int, str]]:
    out = []

    def walk(t):
        for k in t[1]:
            if isinstance(k, tuple):
                walk(k)
            else:
                out.append((len(out), k))

    walk(tree)
    return out


def format_bracketed(tree: Tree) -> str:
    parts = []
    for k in tree[1]:
        parts.append(format_bracketed(k) if isinstance(k, tuple) else _PTB_UNESCAPE.get(k, k))
    return "(" + " ".join([tree[0] or ""] + parts).strip() + ")"


def _parse_line(lineno: int, line: str) -> QuestionAnnotation:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 5:
        raise FormatError(lineno, f"expected 5 tab-separated fields, got {len(fields)}")
    qid, toks, heads, rels, tree = fields
    if not qid:
        raise FormatError(lineno, "empty question_id")
    try:
        head_ids = tuple(int(h) for h in heads.split())
    except ValueError:
        raise FormatError(lineno, "non-integer dependency head") from None
    try:
        parse_bracketed(tree)
    except ValueError as exc:
        raise FormatError(lineno, str(exc)) from None
    return QuestionAnnotation(qid, tuple(toks.split(" ")) if toks else (), head_ids, tuple(rels.split()), tree)


def read_annotations(path: str | Path) -> dict[str, QuestionAnnotation]:
    """Load and validate an annotation file into ``question_id -> annotation``."""
    out: dict[str, QuestionAnnotation] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            ann = _parse_line(lineno, line)
            if ann.question_id in out:
                raise FormatError(lineno, f"duplicate question_id {ann.question_id!r}")
            ann.validate()
            out[ann.question_id] = ann
    return out


def write_annotations(path: str | Path, annotations: Iterable[QuestionAnnotation]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write("\t".join([
                a.question_id,
                " ".join(a.tokens),
                " ".join(map(str, a.dep_heads)),
                " ".join(a.dep_rels),
                a.constituency,
            ]) + "\n")


def build_question_graph(a: QuestionAnnotation, simplify: bool = True) -> Graph:
    """Merge the constituency tree and the dependency arcs into one graph.

    Constituents become internal nodes (Child edges); every non-root
    dependency arc becomes a head -> dependent Dependency edge between the two
    token leaves.  Sequential edges are always added.
    """
    a.validate()
    tree = parse_bracketed(a.constituency)
    nodes: list[Node] = []
    edges: list[Edge] = []
    leaf_id: dict[int, int] = {}
    stack: list[tuple[object, int | None]] = [(tree, None)]
    while stack:
        item, parent = stack.pop()
        i = len(nodes)
        if isinstance(item, tuple):
            nodes.append(Node.internal(i, item[0] or "ROOT"))
            stack.extend((k, i) for k in reversed(item[1]))
        else:
            pos = len(leaf_id)
            leaf_id[pos] = i
            nodes.append(Node.leaf(i, pos))
        if parent is not None:
            edges.append(Edge(parent, i, EdgeType.CHILD))
    for dep, head in enumerate(a.dep_heads):
        if head != 0:
            edges.append(Edge(leaf_id[head - 1], leaf_id[dep], EdgeType.DEPENDENCY))
    g = Graph(tuple(nodes), tuple(edges))
    if simplify:
        g = simplify_tree(g)
    return add_sequential_edges(g)


def from_conllu(conllu: str, trees: list[str], ids: list[str] | None = None) -> list[QuestionAnnotation]:
    """Convert CoNLL-U sentences plus one bracketed tree per sentence.

    Multi-word token ranges (``3-4``) and empty nodes (``5.1``) are skipped.
    Question ids come from ``# sent_id = ...`` comments unless ``ids`` is
    given; sentences without either are numbered from 0.
    """
    sentences: list[tuple[str | None, list[list[str]]]] = []
    sid, rows = None, []
    for line in conllu.splitlines() + [""]:
        if not line.strip():
            if rows:
                sentences.append((sid, rows))
            sid, rows = None, []
        elif line.startswith("#"):
            key, _, val = line[1:].partition("=")
            if key.strip() == "sent_id":
                sid = val.strip()
        else:
            cols = line.split("\t")
            if len(cols) != 10:
                raise FormatError(len(rows) + 1, "CoNLL-U rows need 10 columns")
            if "-" in cols[0] or "." in cols[0]:
                continue
            rows.append(cols)
    if len(trees) != len(sentences):
        raise FormatError(0, f"{len(sentences)} sentences but {len(trees)} trees")
    out = []
    for k, ((sid, rows), tree) in enumerate(zip(sentences, trees)):
        qid = ids[k] if ids is not None else (sid or str(k))
        ann = QuestionAnnotation(
            qid,
            tuple(r[1] for r in rows),
            tuple(int(r[6]) for r in rows),
            tuple(r[7] for r in rows),
            tree.strip(),
        )
        ann.validate()
        out.append(ann)
    return out
