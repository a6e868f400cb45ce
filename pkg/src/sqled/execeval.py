"""Execution-based labeling of predicted SQL against gold SQL.

``label_prediction`` is the corrected pipeline:

1. both queries are parsed; a LIMIT with the same argument on both sides is
   removed from both,
2. both are executed on a read-only connection that decodes text
   tolerantly (invalid UTF-8 becomes U+FFFD instead of raising),
3. when the gold result is empty the decision falls back to the simplified
   exact set match,
4. otherwise results are compared column-wise, sorted per column when the
   gold query has no top-level ORDER BY.

``label_naive`` is the uncorrected comparison kept for disagreement
accounting.
"""

from __future__ import annotations

import enum
import hashlib
import json
import sqlite3
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import quote

from .errors import DataError, SqledError
from .sql import drop_equal_limits, has_top_level_order_by, parse_sql, set_match
from .sql.ast import SqlNode

PIPELINE_VERSION = "fixed-1"
DEFAULT_TIMEOUT_MS = 5000
NULL_SENTINEL = "\x00NULL"


class Label(str, enum.Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    UNEXECUTABLE = "unexecutable"


@dataclass(frozen=True)
class LabelResult:
    label: Label
    path: str  # execution | order_insensitive | tie_aware | set_match | unexecutable

    @property
    def correct(self) -> bool:
        return self.label is Label.CORRECT


class ExecError(SqledError):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind  # syntax | runtime | timeout


@dataclass(frozen=True)
class ExecResult:
    columns: tuple[tuple, ...]
    row_count: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int) -> "ExecResult":
        cols = tuple(tuple(r[j] for r in rows) for j in range(ncols))
        return cls(cols, len(rows))

    def rows(self) -> list[tuple]:
        return list(zip(*self.columns)) if self.columns else [()] * self.row_count


def db_path_for(db_root: str | Path, db_id: str) -> Path:
    return Path(db_root) / db_id / f"{db_id}.sqlite"


def _tolerant_text(raw: bytes) -> str:
    return raw.decode("utf-8", errors="replace")


def execute(db_path: str | Path, sql: str, timeout_ms: int = DEFAULT_TIMEOUT_MS,
            tolerant: bool = True) -> ExecResult:
    """Run ``sql`` on a read-only connection and materialize the result."""
    path = Path(db_path)
    if not path.exists():
        raise DataError(f"database not found: {path}")
    conn = sqlite3.connect(f"file:{quote(str(path.resolve()))}?mode=ro", uri=True)
    if tolerant:
        conn.text_factory = _tolerant_text
    deadline = time.monotonic() + timeout_ms / 1000.0
    timed_out = False

    def progress():
        nonlocal timed_out
        if time.monotonic() > deadline:
            timed_out = True
            return 1
        return 0

    conn.set_progress_handler(progress, 1000)
    try:
        cur = conn.execute(sql)
        rows = cur.fetchall()
        ncols = len(cur.description or ())
    except (sqlite3.Error, sqlite3.Warning) as exc:
        msg = str(exc)
        if timed_out:
            raise ExecError("timeout", f"exceeded {timeout_ms} ms") from None
        if "syntax error" in msg or "incomplete input" in msg or "one statement" in msg:
            raise ExecError("syntax", msg) from None
        raise ExecError("runtime", msg) from None
    finally:
        conn.close()
    return ExecResult.from_rows(rows, ncols)


def render_scalar(v) -> str:
    """Canonical string for one cell: ints plain, reals to 6 significant digits."""
    if v is None:
        return NULL_SENTINEL
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, bytes):
        return "x'" + v.hex() + "'"
    return str(v)


def _sort_key(s: str) -> tuple[int, str]:
    return (0, "") if s == NULL_SENTINEL else (1, s)


def compare_results(gold: ExecResult, pred: ExecResult, order_sensitive: bool,
                    tie_groups: Sequence[int] | None = None) -> bool:
    """Column/row-count check, then cell comparison on canonical renderings.

    Order-insensitive mode sorts every column independently (this can pair
    values from different rows; see ``row_paired_equal`` for the audit
    variant).  ``tie_groups`` relaxes order-sensitive mode: rows inside each
    run of tied gold sort keys may appear in any order.
    """
    if len(gold.columns) != len(pred.columns) or gold.row_count != pred.row_count:
        return False
    g = [[render_scalar(v) for v in col] for col in gold.columns]
    p = [[render_scalar(v) for v in col] for col in pred.columns]
    if not order_sensitive:
        return all(sorted(a, key=_sort_key) == sorted(b, key=_sort_key) for a, b in zip(g, p))
    if tie_groups is None:
        return g == p
    g_rows, p_rows = list(zip(*g)), list(zip(*p))
    start = 0
    for size in tie_groups:
        if sorted(g_rows[start:start + size]) != sorted(p_rows[start:start + size]):
            return False
        start += size
    return start == gold.row_count


def row_paired_equal(gold: ExecResult, pred: ExecResult) -> bool:
    """Multiset-of-rows comparison; used to flag where per-column sorting differs."""
    if len(gold.columns) != len(pred.columns) or gold.row_count != pred.row_count:
        return False
    render = lambda rows: sorted(tuple(render_scalar(v) for v in r) for r in rows)  # noqa: E731
    return render(gold.rows()) == render(pred.rows())


def _try_parse(sql: str) -> SqlNode | None:
    try:
        return parse_sql(sql)
    except DataError:
        return None


def _order_by_token_scan(sql: str) -> bool:
    """Fallback ORDER BY detection at parenthesis depth 0 for unparseable gold."""
    from .sql.lexer import tokenize

    depth = 0
    for t in tokenize(sql):
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        elif depth == 0 and t.terminal == "ORDER_BY_":
            return True
    return False


def _tie_groups(db_path, gold_ast: SqlNode, gold_res: ExecResult, timeout_ms: int) -> list[int] | None:
    """Run lengths of equal ORDER BY keys in the gold result, or None.

    The keys come from re-running the gold query with its ordering
    expressions appended to the select list.  Only plain (non-compound,
    non-DISTINCT) selects qualify, and the augmented run must reproduce the
    gold rows exactly.
    """
    core = gold_ast.children[0]
    order = gold_ast.child("order_by_clause")
    if core.label != "select_core" or order is None:
        return None
    if any(getattr(c, "value", None) == "DISTINCT" for c in core.children):
        return None
    terms = [t.children[0].render() for t in order.nodes("ordering_term")]
    parts = []
    for c in core.children:
        if isinstance(c, SqlNode) and c.label == "result_clause":
            parts.append(c.render() + " , " + " , ".join(terms))
        else:
            parts.append(c.render() if isinstance(c, SqlNode) else c.text)
    sql = " ".join(parts) + " " + order.render()
    try:
        aug = execute(db_path, sql, timeout_ms)
    except ExecError:
        return None
    k = len(gold_res.columns)
    if aug.row_count != gold_res.row_count or len(aug.columns) != k + len(terms):
        return None
    base = ExecResult(aug.columns[:k], aug.row_count)
    if not compare_results(gold_res, base, order_sensitive=True):
        return None
    keys = list(zip(*[[render_scalar(v) for v in col] for col in aug.columns[k:]]))
    groups: list[int] = []
    for i, key in enumerate(keys):
        if i and key == keys[i - 1]:
            groups[-1] += 1
        else:
            groups.append(1)
    return groups


def label_prediction(db_path: str | Path, gold_sql: str, pred_sql: str,
                     timeout_ms: int = DEFAULT_TIMEOUT_MS) -> LabelResult:
    gold_ast, pred_ast = _try_parse(gold_sql), _try_parse(pred_sql)
    gold_run, pred_run = gold_sql, pred_sql
    limits_dropped = False
    if gold_ast is not None and pred_ast is not None:
        g2, p2 = drop_equal_limits(gold_ast, pred_ast)
        if g2 is not gold_ast:
            limits_dropped = True
            gold_ast, pred_ast = g2, p2
            gold_run, pred_run = g2.render(), p2.render()
    try:
        gold_res = execute(db_path, gold_run, timeout_ms)
    except ExecError as exc:
        raise DataError(f"gold query failed to execute: {exc}") from None
    try:
        pred_res = execute(db_path, pred_run, timeout_ms)
    except ExecError:
        return LabelResult(Label.UNEXECUTABLE, "unexecutable")

    if gold_res.row_count == 0:
        ok = pred_ast is not None and gold_ast is not None and set_match(gold_ast, pred_ast)
        return LabelResult(Label.CORRECT if ok else Label.WRONG, "set_match")

    if gold_ast is not None:
        ordered = has_top_level_order_by(gold_ast)
    else:
        ordered = _order_by_token_scan(gold_sql)
    groups = None
    if ordered and limits_dropped:
        groups = _tie_groups(db_path, gold_ast, gold_res, timeout_ms)
    ok = compare_results(gold_res, pred_res, order_sensitive=ordered, tie_groups=groups)
    path = "tie_aware" if groups is not None else ("execution" if ordered else "order_insensitive")
    return LabelResult(Label.CORRECT if ok else Label.WRONG, path)


def label_naive(db_path: str | Path, gold_sql: str, pred_sql: str,
                timeout_ms: int = DEFAULT_TIMEOUT_MS) -> LabelResult:
    """Strict UTF-8 decoding, no LIMIT removal, no empty-result fallback,
    always order-sensitive.  A gold query that cannot run counts as Wrong."""
    try:
        pred_res = execute(db_path, pred_sql, timeout_ms, tolerant=False)
    except ExecError:
        return LabelResult(Label.UNEXECUTABLE, "unexecutable")
    try:
        gold_res = execute(db_path, gold_sql, timeout_ms, tolerant=False)
    except ExecError:
        return LabelResult(Label.WRONG, "execution")
    ok = compare_results(gold_res, pred_res, order_sensitive=True)
    return LabelResult(Label.CORRECT if ok else Label.WRONG, "execution")


def _digest(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


class LabelCache:
    """Append-only JSON-lines cache keyed by (db_id, gold hash, pred hash, pipeline version)."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self.entries: dict[str, dict] = {}
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self.entries[rec["key"]] = rec

    @staticmethod
    def key(db_id: str, gold_sql: str, pred_sql: str, version: str = PIPELINE_VERSION) -> str:
        return "|".join([db_id, _digest(gold_sql), _digest(pred_sql), version])

    def get(self, db_id: str, gold_sql: str, pred_sql: str) -> LabelResult | None:
        rec = self.entries.get(self.key(db_id, gold_sql, pred_sql))
        return None if rec is None else LabelResult(Label(rec["label"]), rec["path"])

    def put(self, db_id: str, gold_sql: str, pred_sql: str, result: LabelResult) -> None:
        k = self.key(db_id, gold_sql, pred_sql)
        rec = {"key": k, "label": result.label.value, "path": result.path}
        self.entries[k] = rec
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec) + "\n")


def evaluate_parser(beams: Iterable, db_root: str | Path, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> dict:
    """Top-1 accuracy under the fixed and the naive pipelines, plus disagreements.

    ``beams`` are BeamRecord-like objects (``db_id``, ``gold_sql``,
    ``predictions[0].sql``).
    """
    n = fixed_ok = naive_ok = disagree = 0
    for beam in beams:
        db = db_path_for(db_root, beam.db_id)
        top = beam.predictions[0].sql
        fixed = label_prediction(db, beam.gold_sql, top, timeout_ms)
        naive = label_naive(db, beam.gold_sql, top, timeout_ms)
        n += 1
        fixed_ok += fixed.correct
        naive_ok += naive.correct
        disagree += fixed.label != naive.label
    if n == 0:
        return {"n": 0, "accuracy": 0.0, "accuracy_naive": 0.0, "disagreement": 0}
    return {"n": n, "accuracy": fixed_ok / n, "accuracy_naive": naive_ok / n, "disagreement": disagree}
