"""Small bundled SQLite databases used by the toy corpus and the test suites."""

from __future__ import annotations

import math
import random
import sqlite3
from pathlib import Path

SCHEMAS: dict[str, str] = {
    "department_management": """
CREATE TABLE department (
  Department_ID INTEGER PRIMARY KEY, Name TEXT, Creation TEXT, Ranking INTEGER,
  Budget_in_Billions REAL, Num_Employees REAL);
CREATE TABLE head (head_ID INTEGER PRIMARY KEY, name TEXT, born_state TEXT, age REAL);
CREATE TABLE management (
  department_ID INTEGER, head_ID INTEGER, temporary_acting TEXT,
  PRIMARY KEY (department_ID, head_ID));
INSERT INTO department VALUES
  (1, 'State', '1789', 1, 9.96, 30266),
  (2, 'Treasury', '1789', 2, 11.1, 115897),
  (3, 'Defense', '1947', 3, 439.3, 3000000),
  (4, 'Justice', '1870', 4, 23.4, 112557),
  (5, 'Interior', '1849', 5, 10.7, 71436),
  (6, 'Agriculture', '1889', 6, 77.6, 109832),
  (7, 'Commerce', '1903', 7, 6.2, 36000),
  (8, 'Labor', '1913', 8, 59.7, 17347);
INSERT INTO head VALUES
  (1, 'Tiger Woods', 'Alabama', 67),
  (2, 'Sergio Garcia', 'California', 68),
  (3, 'K. J. Choi', 'Alabama', 69),
  (4, 'Dudley Hart', 'California', 52),
  (5, 'Jeff Maggert', 'Delaware', 53),
  (6, 'Billy Mayfair', 'California', 69),
  (7, 'Stewart Cink', 'Florida', 50),
  (8, 'Nick Faldo', 'California', 56),
  (9, 'Padraig Harrington', 'Connecticut', 43),
  (10, 'Franklin Langham', 'Connecticut', 67);
INSERT INTO management VALUES
  (2, 5, 'Yes'), (15, 4, 'Yes'), (2, 6, 'Yes'), (7, 3, 'No'), (11, 10, 'No');
""",
    "music_festival": """
CREATE TABLE festival_detail (
  Festival_ID INTEGER PRIMARY KEY, Festival_Name TEXT, Chair_Name TEXT,
  Location TEXT, Year INTEGER, Num_of_Audience INTEGER);
INSERT INTO festival_detail VALUES
  (1, 'Panasonic Awards', 'Raymond Floyd', 'United States', 2006, 152),
  (2, 'Flower Awards', 'Charles Coody', 'United States', 2007, 155),
  (3, 'Cherry Awards', 'Doug Ford', 'United States', 2007, 160),
  (4, 'Gobel Awards', 'Arnold Palmer', 'United States', 2008, 160),
  (5, 'LA Awards', 'Lucy Lu', 'United States', 2010, 161);
""",
    "town_life": """
CREATE TABLE people (id INTEGER PRIMARY KEY, name TEXT, age INTEGER, city TEXT, height REAL);
CREATE TABLE cafes (id INTEGER PRIMARY KEY, name TEXT, city TEXT, seats INTEGER);
INSERT INTO people VALUES
  (1, 'alice', 40, 'Oslo', 1.70),
  (2, 'bob', 40, 'Bergen', 1.82),
  (3, 'carl', 30, 'Oslo', 1.75),
  (4, 'dana', 25, 'Tromso', 1.60),
  (5, 'erin', 35, 'Bergen', 1.68);
INSERT INTO cafes VALUES
  (1, 'Kaffebar', 'Oslo', 20),
  (2, CAST(X'436166E9204E6F7264' AS TEXT), 'Bergen', 35),
  (3, 'Java', 'Oslo', 12);
""",
}


def build_database(path: str | Path, script: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    try:
        conn.executescript(script)
        conn.commit()
    finally:
        conn.close()
    return path


def build_toy_databases(db_root: str | Path) -> dict[str, Path]:
    """Write every toy database as ``<db_root>/<db_id>/<db_id>.sqlite``."""
    root = Path(db_root)
    return {db: build_database(root / db / f"{db}.sqlite", sql) for db, sql in SCHEMAS.items()}


# -- toy corpus ---------------------------------------------------------------

HEAD_QUESTION = "How many heads of the departments are older than 56?"
HEAD_GOLD = "SELECT COUNT(*) FROM head WHERE head.age > 56"
HEAD_TREE = ("(ROOT (SBARQ (WHNP (WHADJP (WRB How) (JJ many)) (NNS heads) (PP (IN of) (NP (DT the) "
             "(NNS departments)))) (SQ (VBP are) (ADJP (JJR older) (PP (IN than) (NP (CD 56))))) (. ?)))")
HEAD_DEPS = ((2, "advmod"), (3, "amod"), (8, "nsubj"), (6, "case"), (6, "det"), (3, "nmod"), (8, "cop"),
             (0, "root"), (10, "case"), (8, "obl"), (8, "punct"))
HEAD_BEAMS = {
    "smbop": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56",
        "SELECT head.name FROM head WHERE head.age > 56",
        "SELECT MAX(head.age) FROM head WHERE head.age > 56",
        "SELECT head.age FROM head WHERE head.age > 56",
        "SELECT * FROM head WHERE head.age > 56",
    ],
    "resdsql": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56",
        "SELECT COUNT(DISTINCT head.name) FROM head WHERE head.age > 56",
        "SELECT COUNT(head.head_id) FROM head WHERE head.age > 56",
        "SELECT COUNT(*) , department.name FROM management JOIN head ON management.head_ID = head.head_ID "
        "JOIN department ON management.department_ID = department.Department_ID WHERE head.age > 56 "
        "GROUP BY department.name",
        "SELECT ( DISTINCT department.department_id) from management JOIN head ON management.head_ID = "
        "head.head_ID JOIN department ON management.department_ID = department.Department_ID where head.age > 56",
    ],
    "natsql": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56",
        "SELECT COUNT(*) FROM department WHERE department.department_id in (SELECT management.department_ID "
        "FROM management, head WHERE head.age = 56)",
        "SELECT COUNT(*) FROM head WHERE head.age = 56",
        "SELECT COUNT(*) FROM head WHERE head.age < 56",
        "SELECT COUNT(*) FROM head WHERE head.age >= 56",
    ],
}

FESTIVAL_QUESTION = "Show the names of the three most recent festivals."
FESTIVAL_GOLD = ("SELECT festival_detail.festival_name FROM festival_detail "
                 "ORDER BY festival_detail.year DESC LIMIT 3")
FESTIVAL_TREE = ("(ROOT (S (VP (VB Show) (NP (NP (DT the) (NNS names)) (PP (IN of) (NP (DT the) (CD three) "
                 "(ADJP (RBS most) (JJ recent)) (NNS festivals))))) (. .)))")
FESTIVAL_DEPS = ((0, "root"), (3, "det"), (1, "obj"), (9, "case"), (9, "det"), (9, "nummod"), (8, "advmod"),
                 (9, "amod"), (3, "nmod"), (1, "punct"))
_F = "festival_detail"
FESTIVAL_BEAMS = {
    "smbop": [
        FESTIVAL_GOLD,
        f"SELECT {_F}.festival_name FROM {_F} WHERE {_F}.year = (SELECT MAX( {_F}.year ) FROM {_F})",
        f"SELECT 3 FROM {_F} WHERE {_F}.year = (SELECT MAX( {_F}.year ) FROM {_F})",
        f"SELECT MAX( {_F}.year ) FROM {_F} ORDER BY {_F}.year DESC LIMIT 3",
        f"SELECT MAX( {_F}.year ) FROM {_F} ORDER BY {_F}.year DESC",
    ],
    "resdsql": [
        FESTIVAL_GOLD,
        f"SELECT {_F}.festival_name FROM {_F} ORDER BY {_F}.year ASC LIMIT 3",
        f"SELECT DISTINCT {_F}.festival_name FROM {_F} ORDER BY {_F}.year DESC LIMIT 3",
    ],
    "natsql": [
        FESTIVAL_GOLD,
        f"SELECT {_F}.festival_name FROM {_F} ORDER BY {_F}.year ASC LIMIT 3",
        f"SELECT {_F}.festival_name , {_F}.year FROM {_F} ORDER BY {_F}.year DESC LIMIT 3",
        f"SELECT {_F}.festival_name FROM {_F}",
        f"SELECT {_F}.festival_name FROM {_F} GROUP BY {_F}.festival_name ORDER BY {_F}.year DESC LIMIT 3",
    ],
}


def _template_schemas():
    from .synthetic import Schema

    return [
        (Schema("department_management", "department", ("Ranking", "Budget_in_Billions", "Num_Employees"),
                name_col="Name", noun="departments",
                words={"Ranking": "ranking", "Budget_in_Billions": "budget", "Num_Employees": "employees"},
                ranges={"Ranking": (1, 8), "Budget_in_Billions": (5, 100), "Num_Employees": (20000, 200000)}), 24),
        (Schema("music_festival", "festival_detail", ("Year", "Num_of_Audience"), name_col="Festival_Name",
                noun="festivals", words={"Year": "year", "Num_of_Audience": "audience"},
                ranges={"Year": (2005, 2010), "Num_of_Audience": (150, 162)}), 24),
        (Schema("town_life", "people", ("age", "id"), noun="people", ranges={"age": (24, 41), "id": (1, 5)}), 12),
        (Schema("town_life", "cafes", ("seats", "id"), noun="cafes", ranges={"seats": (10, 36), "id": (1, 3)}), 12),
    ]


def _hand_annotation(qid: str, tree: str, deps):
    from .nl import QuestionAnnotation, parse_bracketed, tree_leaves

    words = tuple(w for _, w in tree_leaves(parse_bracketed(tree)))
    return QuestionAnnotation(qid, words, tuple(h for h, _ in deps), tuple(r for _, r in deps), tree)


def _predictions(rng, sqls):
    from .dataset import DROPOUT_PASSES, Prediction

    out = []
    for r, sql in enumerate(sqls):
        score = -0.35 * r - 0.25 * rng.random()
        p = math.exp(score)
        drops = tuple(round(min(1.0, max(0.0, rng.gauss(p, 0.04 + 0.06 * r))), 6) for _ in range(DROPOUT_PASSES))
        out.append(Prediction(sql, round(score, 6), drops))
    return tuple(out)


def toy_corpus(seed: int = 0, beam_size: int = 5, hit_rate: float = 0.8):
    """Unlabeled toy beams and their annotations.

    Six hand-annotated beams for two questions (one per base parser) plus
    template questions over the toy tables; labels come from execution.
    """
    from .dataset import BeamRecord
    from .synthetic import assemble_beam, make_question

    rng = random.Random(seed)
    beams, anns = [], {}
    for parser in ("smbop", "resdsql", "natsql"):
        for qid, db, q, gold, tree, deps, table in (
                (f"head_{parser}", "department_management", HEAD_QUESTION, HEAD_GOLD, HEAD_TREE, HEAD_DEPS,
                 HEAD_BEAMS),
                (f"festival_{parser}", "music_festival", FESTIVAL_QUESTION, FESTIVAL_GOLD, FESTIVAL_TREE,
                 FESTIVAL_DEPS, FESTIVAL_BEAMS)):
            beams.append(BeamRecord(qid, db, q, gold, _predictions(rng, table[parser])))
            anns[qid] = _hand_annotation(qid, tree, deps)
    i = 0
    for schema, count in _template_schemas():
        for _ in range(count):
            qid = f"toy{i:03d}"
            i += 1
            ann, gold, errors = make_question(schema, qid, rng)
            members = [sql for sql, _ in assemble_beam(rng, gold, errors, beam_size, hit_rate)]
            beams.append(BeamRecord(qid, schema.db_id, " ".join(ann.tokens), gold, _predictions(rng, members)))
            anns[qid] = ann
    return beams, anns


TOY_CONFIG = """\
[paths]
beams = beams.jsonl
annotations = annotations.tsv
db_root = databases
output = out

[model]
hidden_dim = 32
attention_heads = 2

[train]
epochs = 20
learning_rate = 3e-3

[run]
cv_folds = 3
"""


def write_toy_corpus(out_dir: str | Path, seed: int = 0) -> dict[str, Path]:
    """Databases, unlabeled beams, annotations and a run config under ``out_dir``."""
    from .dataset import write_beams
    from .nl import write_annotations

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    build_toy_databases(out / "databases")
    beams, anns = toy_corpus(seed)
    write_beams(out / "beams.jsonl", beams)
    write_annotations(out / "annotations.tsv", anns.values())
    (out / "toy.ini").write_text(TOY_CONFIG, encoding="utf-8")
    return {"beams": out / "beams.jsonl", "annotations": out / "annotations.tsv",
            "db_root": out / "databases", "config": out / "toy.ini"}
