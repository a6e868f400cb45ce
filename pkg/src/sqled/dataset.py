"""Beam records, their JSON-lines interchange format, splits and corpus statistics.

One JSON object per line::

    {"question_id": "q1", "db_id": "concert_singer", "question": "...",
     "gold_sql": "...", "difficulty": "easy",
     "predictions": [{"sql": "...", "parser_score": -0.1,
                      "dropout_scores": [...], "label": "correct", "score": 0.93}]}

``difficulty``, ``dropout_scores``, ``label`` and ``score`` are optional.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError, DuplicateQuestion, FormatError, MissingLabels, TooFewDatabases
from .execeval import Label
from .sql.lexer import tokenize
from .sql.rewrite import _norm_token

DROPOUT_PASSES = 10


@dataclass(frozen=True)
class Prediction:
    sql: str
    parser_score: float
    dropout_scores: tuple[float, ...] | None = None
    label: Label | None = None
    score: float | None = None  # detector output, filled in by scoring

    def __post_init__(self):
        if self.dropout_scores is not None and len(self.dropout_scores) != DROPOUT_PASSES:
            raise DataError(f"dropout_scores needs {DROPOUT_PASSES} values, got {len(self.dropout_scores)}")

    def to_json(self) -> dict:
        out = {"sql": self.sql, "parser_score": self.parser_score}
        if self.dropout_scores is not None:
            out["dropout_scores"] = list(self.dropout_scores)
        if self.label is not None:
            out["label"] = self.label.value
        if self.score is not None:
            out["score"] = self.score
        return out


@dataclass(frozen=True)
class BeamRecord:
    question_id: str
    db_id: str
    question: str
    gold_sql: str
    predictions: tuple[Prediction, ...]
    difficulty: str | None = None

    def __post_init__(self):
        if not self.predictions:
            raise DataError(f"{self.question_id}: empty beam")

    @property
    def top(self) -> Prediction:
        return self.predictions[0]

    def with_predictions(self, preds: Iterable[Prediction]) -> "BeamRecord":
        return replace(self, predictions=tuple(preds))

    def to_json(self) -> dict:
        out = {
            "question_id": self.question_id,
            "db_id": self.db_id,
            "question": self.question,
            "gold_sql": self.gold_sql,
        }
        if self.difficulty is not None:
            out["difficulty"] = self.difficulty
        out["predictions"] = [p.to_json() for p in self.predictions]
        return out


def _prediction(lineno: int, obj) -> Prediction:
    if not isinstance(obj, dict) or "sql" not in obj or "parser_score" not in obj:
        raise FormatError(lineno, "prediction needs 'sql' and 'parser_score'")
    drop = obj.get("dropout_scores")
    label = obj.get("label")
    try:
        return Prediction(
            sql=str(obj["sql"]),
            parser_score=float(obj["parser_score"]),
            dropout_scores=None if drop is None else tuple(float(x) for x in drop),
            label=None if label is None else Label(label),
            score=None if obj.get("score") is None else float(obj["score"]),
        )
    except (TypeError, ValueError, DataError) as exc:
        raise FormatError(lineno, str(exc)) from None


def parse_beam_line(lineno: int, line: str) -> BeamRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise FormatError(lineno, "expected an object")
    for key in ("question_id", "db_id", "question", "gold_sql", "predictions"):
        if key not in obj:
            raise FormatError(lineno, f"missing field {key!r}")
    preds = obj["predictions"]
    if not isinstance(preds, list) or not preds:
        raise FormatError(lineno, "predictions must be a non-empty list")
    return BeamRecord(
        question_id=str(obj["question_id"]),
        db_id=str(obj["db_id"]),
        question=str(obj["question"]),
        gold_sql=str(obj["gold_sql"]),
        predictions=tuple(_prediction(lineno, p) for p in preds),
        difficulty=obj.get("difficulty"),
    )


def load_beams(path: str | Path) -> list[BeamRecord]:
    out: list[BeamRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = parse_beam_line(lineno, line)
            if rec.question_id in seen:
                raise DuplicateQuestion(rec.question_id)
            seen.add(rec.question_id)
            out.append(rec)
    return out


def write_beams(path: str | Path, beams: Iterable[BeamRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for b in beams:
            fh.write(json.dumps(b.to_json(), ensure_ascii=False) + "\n")


def sql_key(sql: str) -> tuple:
    """Dedup key: token sequence with keyword/identifier case and spacing ignored."""
    try:
        return tuple(_norm_token(t) for t in tokenize(sql) if t.text != ";")
    except DataError:
        return ("raw",) + tuple(sql.lower().split())


def dedup_and_cap(beam: BeamRecord, cap: int = 5) -> BeamRecord:
    """Merge duplicate predictions at the earliest rank with the best score, keep ``cap``."""
    slots: dict[tuple, int] = {}
    kept: list[Prediction] = []
    for p in beam.predictions:
        k = sql_key(p.sql)
        if k in slots:
            i = slots[k]
            if p.parser_score > kept[i].parser_score:
                kept[i] = replace(kept[i], parser_score=p.parser_score)
        else:
            slots[k] = len(kept)
            kept.append(p)
    return beam.with_predictions(kept[:cap])


@dataclass(frozen=True)
class SplitSpec:
    """Database id -> partition name."""

    assignment: dict[str, str] = field(default_factory=dict)

    def parts(self) -> list[str]:
        return sorted(set(self.assignment.values()))

    def members(self, part: str) -> list[str]:
        return sorted(db for db, p in self.assignment.items() if p == part)

    def select(self, beams: Iterable[BeamRecord], part: str) -> list[BeamRecord]:
        return [b for b in beams if self.assignment.get(b.db_id) == part]

    def write_manifests(self, out_dir: str | Path, prefix: str = "") -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {}
        for part in self.parts():
            path = out_dir / f"{prefix}{part}.txt"
            path.write_text("".join(db + "\n" for db in self.members(part)), encoding="utf-8")
            paths[part] = path
        return paths


def read_manifest(path: str | Path) -> list[str]:
    return [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def _shuffled(db_ids: Iterable[str], seed: int) -> list[str]:
    dbs = sorted(set(db_ids))
    random.Random(seed).shuffle(dbs)
    return dbs


def cross_domain_halves(db_ids: Iterable[str], seed: int = 0) -> SplitSpec:
    dbs = _shuffled(db_ids, seed)
    if len(dbs) < 2:
        raise TooFewDatabases(f"need at least 2 databases, got {len(dbs)}")
    half = len(dbs) // 2
    return SplitSpec({db: ("half_a" if i < half else "half_b") for i, db in enumerate(dbs)})


def train_dev_split(examples: Iterable, seed: int = 0, dev_fraction: float = 0.2) -> SplitSpec:
    """80:20 split over the databases of ``examples`` (anything with ``db_id``) or db id strings."""
    ids = [e if isinstance(e, str) else e.db_id for e in examples]
    dbs = _shuffled(ids, seed)
    if len(dbs) < 2:
        raise TooFewDatabases(f"need at least 2 databases, got {len(dbs)}")
    n_dev = min(len(dbs) - 1, max(1, math.floor(len(dbs) * dev_fraction + 0.5)))
    return SplitSpec({db: ("dev" if i < n_dev else "train") for i, db in enumerate(dbs)})


def filter_executable(beams: Iterable[BeamRecord]) -> list[BeamRecord]:
    """Drop beams whose top prediction cannot run, then unexecutable members of the rest."""
    out = []
    for b in beams:
        if any(p.label is None for p in b.predictions):
            raise MissingLabels(f"{b.question_id}: predictions without labels")
        if b.top.label is Label.UNEXECUTABLE:
            continue
        out.append(b.with_predictions(p for p in b.predictions if p.label is not Label.UNEXECUTABLE))
    return out


def stats(beams: Sequence[BeamRecord]) -> dict:
    n = len(beams)
    hits = sum(p.label is Label.CORRECT for b in beams for p in b.predictions)
    misses = sum(p.label is Label.WRONG for b in beams for p in b.predictions)
    return {
        "beam_count": n,
        "hits_total": hits,
        "hits_avg_per_beam": hits / n if n else 0.0,
        "misses_total": misses,
        "misses_avg_per_beam": misses / n if n else 0.0,
    }


def format_stats(rows: dict[str, dict]) -> str:
    """Plain-text table, one row per named split: beams, hits total/avg, misses total/avg."""
    head = f"{'split':<12}{'#beams':>8}{'beam hits':>14}{'beam misses':>14}"
    lines = [head, "-" * len(head)]
    for name, s in rows.items():
        hits = f"{s['hits_total']}/{s['hits_avg_per_beam']:.1f}"
        misses = f"{s['misses_total']}/{s['misses_avg_per_beam']:.1f}"
        lines.append(f"{name:<12}{s['beam_count']:>8}{hits:>14}{misses:>14}")
    return "\n".join(lines)
