"""Template-generated question/SQL beams with known labels.

Every question comes with a bracketed constituency tree and dependency heads
so the full graph pipeline runs on it.  Wrong beam members are produced by
swapping the aggregate, the comparison operator, the column, or the sort
direction of the gold query, the error families seen in real parser beams.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .dataset import BeamRecord, Prediction
from .execeval import Label
from .nl import QuestionAnnotation, format_bracketed, tree_leaves

TABLES = [
    "singer", "stadium", "school", "airport", "museum", "ship", "hotel", "player", "city", "movie",
    "bridge", "farm", "river", "train", "library", "church", "court", "market", "station", "theater",
    "company", "island", "planet", "camera", "garden",
]
COLUMNS = ["age", "year", "height", "price", "capacity", "rating", "budget", "population", "salary",
           "weight", "length", "score"]

COMPARISONS = {">": ("more", "than"), "<": ("less", "than"), ">=": ("at", "least"), "<=": ("at", "most")}
AGGREGATES = {"MAX": "maximum", "MIN": "minimum", "AVG": "average", "SUM": "total"}
DIRECTIONS = {"DESC": "highest", "ASC": "lowest"}


@dataclass(frozen=True)
class Schema:
    db_id: str
    table: str
    columns: tuple[str, ...]  # numeric columns
    name_col: str = "name"
    noun: str = ""  # plural used in questions; defaults to table + "s"
    words: dict = field(default_factory=dict)  # column -> question word
    ranges: dict = field(default_factory=dict)  # column -> (lo, hi) for comparison values

    @property
    def plural(self) -> str:
        return self.noun or self.table + "s"

    def word(self, col: str) -> str:
        return self.words.get(col, col)

    def value(self, col: str, rng: random.Random) -> int:
        lo, hi = self.ranges.get(col, (2, 99))
        return rng.randint(lo, hi)


def make_schemas(n: int, rng: random.Random) -> list[Schema]:
    tables = rng.sample(TABLES, n) if n <= len(TABLES) else [f"{TABLES[i % len(TABLES)]}{i}" for i in range(n)]
    return [Schema(f"{t}_db", t, tuple(rng.sample(COLUMNS, 4))) for t in tables]


# -- question construction ---------------------------------------------------

def _np(*words_tags):
    return ("NP", [(tag, [w]) for w, tag in words_tags])


def dependency_heads(tree) -> list[int]:
    """Heads from a right-headed reading of the tree (1-based, 0 = root)."""
    n = len(tree_leaves(tree))
    heads = [0] * n
    counter = [0]

    def walk(t) -> int:
        kid_heads = []
        for k in t[1]:
            if isinstance(k, tuple):
                kid_heads.append(walk(k))
            else:
                kid_heads.append(counter[0])
                counter[0] += 1
        h = kid_heads[-1]
        for other in kid_heads[:-1]:
            heads[other] = h + 1
        return h

    walk(tree)
    return heads


def annotation(qid: str, tree) -> QuestionAnnotation:
    words = tuple(w for _, w in tree_leaves(tree))
    heads = dependency_heads(tree)
    rels = tuple("root" if h == 0 else "dep" for h in heads)
    return QuestionAnnotation(qid, words, tuple(heads), rels, format_bracketed(tree))


def _count_tree(table, col, op, val):
    w1, w2 = COMPARISONS[op]
    return ("ROOT", [("SBARQ", [
        ("WHNP", [("WRB", ["How"]), ("JJ", ["many"]), ("NNS", [table])]),
        ("SQ", [("VBP", ["have"]), _np((col, "NN")),
                ("PP", [("JJR", [w1]), ("IN", [w2]), ("CD", [str(val)])])]),
        (".", ["?"]),
    ])])


def _agg_tree(table, col, agg):
    return ("ROOT", [("SBARQ", [
        ("WHNP", [("WP", ["What"])]),
        ("SQ", [("VBZ", ["is"]),
                ("NP", [_np(("the", "DT"), (AGGREGATES[agg], "JJ"), (col, "NN")),
                        ("PP", [("IN", ["of"]), _np(("all", "DT"), (table, "NNS"))])])]),
        (".", ["?"]),
    ])])


def _list_tree(table, col, op, val):
    w1, w2 = COMPARISONS[op]
    return ("ROOT", [("S", [
        ("VB", ["Show"]),
        ("NP", [_np(("the", "DT"), ("names", "NNS")),
                ("PP", [("IN", ["of"]), _np((table, "NNS"))]),
                ("PP", [("IN", ["with"]), _np((col, "NN")),
                        ("ADJP", [("JJR", [w1]), ("IN", [w2]), ("CD", [str(val)])])])]),
        (".", ["."]),
    ])])


def _top_tree(table, col, direction, k):
    return ("ROOT", [("S", [
        ("VB", ["List"]),
        ("NP", [_np(("the", "DT"), (str(k), "CD"), (table, "NNS")),
                ("PP", [("IN", ["with"]), _np(("the", "DT"), (DIRECTIONS[direction], "JJS"), (col, "NN"))])]),
        (".", ["."]),
    ])])


# -- SQL construction and perturbation ---------------------------------------

def _count_sql(t, col, op, val, agg="COUNT"):
    head = "COUNT(*)" if agg == "COUNT" else f"{agg}({t}.{col})"
    return f"SELECT {head} FROM {t} WHERE {t}.{col} {op} {val}"


def _agg_sql(t, col, agg):
    return f"SELECT {agg}({t}.{col}) FROM {t}"


def _list_sql(t, col, op, val, sel):
    return f"SELECT {t}.{sel} FROM {t} WHERE {t}.{col} {op} {val}"


def _top_sql(t, col, direction, k, sel, limit=True):
    return f"SELECT {t}.{sel} FROM {t} ORDER BY {t}.{col} {direction}" + (f" LIMIT {k}" if limit else "")


def _other(rng, options, current):
    return rng.choice([o for o in options if o != current])


def make_question(schema: Schema, qid: str, rng: random.Random) -> tuple[QuestionAnnotation, str, list[str]]:
    t, nm, noun = schema.table, schema.name_col, schema.plural
    col = rng.choice(schema.columns)
    w = schema.word(col)
    kind = rng.randrange(4)
    errors: list[str] = []
    if kind == 0:
        op, val = rng.choice(list(COMPARISONS)), schema.value(col, rng)
        tree, gold = _count_tree(noun, w, op, val), _count_sql(t, col, op, val)
        errors = [
            _count_sql(t, col, _other(rng, list(COMPARISONS), op), val),
            _count_sql(t, _other(rng, schema.columns, col), op, val),
            _count_sql(t, col, op, val, agg=rng.choice(list(AGGREGATES))),
            _list_sql(t, col, op, val, nm),
            _count_sql(t, col, "=", val),
        ]
    elif kind == 1:
        agg = rng.choice(list(AGGREGATES))
        tree, gold = _agg_tree(noun, w, agg), _agg_sql(t, col, agg)
        others = [a for a in AGGREGATES if a != agg]
        errors = [_agg_sql(t, col, a) for a in others] + [
            _agg_sql(t, _other(rng, schema.columns, col), agg),
            f"SELECT COUNT(*) FROM {t}",
        ]
    elif kind == 2:
        op, val = rng.choice(list(COMPARISONS)), schema.value(col, rng)
        tree, gold = _list_tree(noun, w, op, val), _list_sql(t, col, op, val, nm)
        errors = [
            _list_sql(t, col, _other(rng, list(COMPARISONS), op), val, nm),
            _list_sql(t, _other(rng, schema.columns, col), op, val, nm),
            _list_sql(t, col, op, val, col),
            _list_sql(t, col, "=", val, nm),
            f"SELECT {t}.{nm} FROM {t}",
        ]
    else:
        direction, k = rng.choice(list(DIRECTIONS)), rng.randint(2, 5)
        tree, gold = _top_tree(noun, w, direction, k), _top_sql(t, col, direction, k, nm)
        errors = [
            _top_sql(t, col, _other(rng, list(DIRECTIONS), direction), k, nm),
            _top_sql(t, _other(rng, schema.columns, col), direction, k, nm),
            _top_sql(t, col, direction, k, nm, limit=False),
            _top_sql(t, col, direction, k + 1, nm),
            f"SELECT MAX({t}.{col}) FROM {t} ORDER BY {t}.{col} {direction} LIMIT {k}",
        ]
    return annotation(qid, tree), gold, errors


def assemble_beam(rng: random.Random, gold: str, errors: list[str], beam_size: int,
                  hit_rate: float) -> list[tuple[str, Label]]:
    """Shuffled distinct errors with the gold query inserted with probability ``hit_rate``."""
    wrong = list(dict.fromkeys(e for e in errors if e != gold))
    rng.shuffle(wrong)
    members = [(e, Label.WRONG) for e in wrong]
    if rng.random() < hit_rate:
        pos = 0 if rng.random() < 0.65 else rng.randrange(1, beam_size)
        members.insert(min(pos, len(members)), (gold, Label.CORRECT))
    return members[:beam_size]


def generate_corpus(n_dbs: int = 20, pairs: int = 2000, beam_size: int = 5, seed: int = 0,
                    hit_rate: float = 0.8) -> tuple[list[BeamRecord], dict[str, QuestionAnnotation], list[Schema]]:
    """``pairs // beam_size`` beams spread evenly over ``n_dbs`` databases.

    A beam contains the gold query with probability ``hit_rate`` (at rank 1
    about two times in three) and wrong queries elsewhere.  Labels are set
    by construction.
    """
    rng = random.Random(seed)
    schemas = make_schemas(n_dbs, rng)
    n_beams = pairs // beam_size
    beams, anns = [], {}
    for i in range(n_beams):
        schema = schemas[i % n_dbs]
        qid = f"syn{i:05d}"
        ann, gold, errors = make_question(schema, qid, rng)
        members = assemble_beam(rng, gold, errors, beam_size, hit_rate)
        preds = tuple(Prediction(sql, -0.3 * r - rng.random() * 0.2, label=lab) for r, (sql, lab) in enumerate(members))
        beams.append(BeamRecord(qid, schema.db_id, " ".join(ann.tokens), gold, preds))
        anns[qid] = ann
    return beams, anns, schemas


@dataclass
class SanityResult:
    test_auc: float
    dev_auc: float | None
    best_epoch: int
    checksum: str
    seconds: float
    history: list


def learning_sanity(seed: int = 0, model_cfg=None, train_cfg=None, corpus_seed: int = 0) -> SanityResult:
    """Train on the synthetic corpus and score databases never seen in training.

    Databases are split 80:20 into seen/test; the seen ones are split 80:20
    again into train/dev, dev choosing the checkpoint.  Vocabularies come
    from training beams only, so test-only words map to UNK.
    """
    import time

    from .dataset import train_dev_split
    from .encode import build_vocabs, encode_beams
    from .model import ModelConfig, TrainConfig
    from .model.train import checksum, evaluate_beams, train

    t0 = time.perf_counter()
    beams, anns, _ = generate_corpus(seed=corpus_seed)
    outer = train_dev_split(beams, seed=seed)
    seen, test = outer.select(beams, "train"), outer.select(beams, "dev")
    inner = train_dev_split(seen, seed=seed + 1)
    tr, dev = inner.select(seen, "train"), inner.select(seen, "dev")
    tv, lv = build_vocabs(tr, anns)
    model_cfg = model_cfg or ModelConfig()
    model_cfg = ModelConfig.from_dict({**model_cfg.to_dict(), "token_vocab_size": len(tv),
                                       "label_vocab_size": len(lv), "seed": seed})
    train_cfg = train_cfg or TrainConfig(seed=seed)
    res = train(encode_beams(tr, anns, tv, lv), model_cfg, train_cfg, dev=encode_beams(dev, anns, tv, lv))
    _, test_auc = evaluate_beams(res.params, model_cfg, encode_beams(test, anns, tv, lv))
    dev_auc = res.history[res.best_epoch - 1]["dev_auc"]
    return SanityResult(test_auc, dev_auc, res.best_epoch, checksum(res.params),
                        time.perf_counter() - t0, res.history)
