"""Command-line entry point: ``sqled <command> [options]``.

Settings resolve as command-line flags, then the INI file given with
``--config``, then built-in defaults.  Relative paths in the INI file are
taken relative to the file.  Exit codes: 0 ok, 1 configuration error,
2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, NumericalError, SqledError

DB_ROOT_ENV = "SQLED_DB_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

PATH_KEYS = ("beams", "annotations", "db_root", "embeddings", "checkpoint", "output", "split_dir", "cache")
MODEL_KEYS = ("hidden_dim", "attention_heads", "gat_layers", "leaky_relu_slope", "dropout_rate", "ffn_dim",
              "embed_std", "layer_ablation")
TRAIN_KEYS = ("batch_beams", "epochs", "learning_rate", "warmup_fraction", "weight_decay")
RUN_KEYS = ("simplify", "prune_joins", "split_source", "seed", "cv_folds", "workers", "min_count", "timeout_ms",
            "threshold")


@dataclass
class RunConfig:
    beams: Path | None = None
    annotations: Path | None = None
    db_root: Path | None = None
    embeddings: Path | None = None
    checkpoint: Path | None = None
    output: Path = Path("sqled_out")
    split_dir: Path | None = None
    cache: Path | None = None
    model: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    simplify: bool = True
    prune_joins: bool = True
    split_source: str = "cross"  # cross: dev databases unseen in training; in: split by question
    seed: int = 0
    cv_folds: int = 5
    workers: int = 1
    min_count: int = 1
    timeout_ms: int = 30000
    threshold: float = 0.5

    def require(self, *names: str) -> None:
        """Configuration error unless every named path is set and exists."""
        for n in names:
            v = getattr(self, n)
            if v is None:
                raise ConfigError(f"missing required setting: {n.replace('_', '-')}")
            if not Path(v).exists():
                raise ConfigError(f"{n.replace('_', '-')} does not exist: {v}")

    def graph_options(self):
        from .encode import GraphOptions

        return GraphOptions(simplify=self.simplify, prune_joins=self.prune_joins)

    def train_config(self):
        from .model import TrainConfig

        return TrainConfig(**{**self.train, "seed": self.seed})

    def ablation_row(self) -> str:
        return f"{'Simplified' if self.simplify else 'Original'} / {self.split_source}-domain"


def ablation_configs(base: RunConfig) -> list[RunConfig]:
    """The four graph-form x error-source combinations."""
    return [replace(base, simplify=s, split_source=src) for s in (True, False) for src in ("in", "cross")]


# -- configuration binding -------------------------------------------------------

def _coerce(key: str, raw, kind):
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _field_types(cls) -> dict:
    import typing

    hints = typing.get_type_hints(cls)
    out = {}
    for f in fields(cls):
        t = hints[f.name]
        args = [a for a in typing.get_args(t) if a is not type(None)]
        out[f.name] = args[0] if args else t
    return out


def _model_types():
    from .model import ModelConfig

    return _field_types(ModelConfig)


def _train_types():
    from .model import TrainConfig

    return _field_types(TrainConfig)


def read_ini(path: Path) -> dict:
    """Flat settings from the ``[paths]``, ``[model]``, ``[train]`` and ``[run]`` sections."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    known = {"paths": PATH_KEYS, "model": MODEL_KEYS, "train": TRAIN_KEYS, "run": RUN_KEYS}
    out: dict = {}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, value in cp.items(section):
            if key not in known[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            if section == "paths":
                p = Path(value).expanduser()
                out[key] = p if p.is_absolute() else path.parent / p
            else:
                out[key] = value
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    settings: dict = {}
    env_root = os.environ.get(DB_ROOT_ENV)
    if env_root:
        settings["db_root"] = Path(env_root)
    if getattr(args, "config", None):
        settings.update(read_ini(Path(args.config)))
    for key in PATH_KEYS + MODEL_KEYS + TRAIN_KEYS + RUN_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    run_types = _field_types(RunConfig)
    model_types, train_types = _model_types(), _train_types()
    cfg = RunConfig()
    for key, v in settings.items():
        if key in PATH_KEYS:
            setattr(cfg, key, Path(v))
        elif key in MODEL_KEYS:
            cfg.model[key] = _coerce(key, v, model_types[key])
        elif key in TRAIN_KEYS:
            cfg.train[key] = _coerce(key, v, train_types[key])
        else:
            setattr(cfg, key, _coerce(key, v, run_types[key]))
    if cfg.split_source not in ("in", "cross"):
        raise ConfigError(f"split-source must be 'in' or 'cross', got {cfg.split_source!r}")
    if cfg.workers < 1 or cfg.cv_folds < 2:
        raise ConfigError("workers must be >= 1 and cv-folds >= 2")
    cfg.train_config()  # validates
    return cfg


# -- shared helpers -----------------------------------------------------------------

def _out(cfg: RunConfig, name: str) -> Path:
    cfg.output.mkdir(parents=True, exist_ok=True)
    return cfg.output / name


def _load(cfg: RunConfig):
    from .dataset import load_beams

    cfg.require("beams")
    return load_beams(cfg.beams)


def _annotations(cfg: RunConfig):
    from .nl import read_annotations

    cfg.require("annotations")
    return read_annotations(cfg.annotations)


def _embeddings(cfg: RunConfig):
    if cfg.embeddings is None:
        return None
    from .model import ExternalEmbeddings

    cfg.require("embeddings")
    return ExternalEmbeddings.load(cfg.embeddings)


def _label_beam(job):
    from .execeval import db_path_for, label_naive, label_prediction

    beam, db_root, timeout_ms = job
    db = db_path_for(db_root, beam.db_id)
    if not db.exists():
        raise DataError(f"{beam.question_id}: database not found at {db}")
    preds = [replace(p, label=label_prediction(db, beam.gold_sql, p.sql, timeout_ms).label)
             for p in beam.predictions]
    naive = label_naive(db, beam.gold_sql, beam.top.sql, timeout_ms).label
    return beam.with_predictions(preds), naive


def _pool_map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _selection(cfg: RunConfig, beams) -> dict[str, set[str]]:
    """Train/dev membership (db ids or question ids) from manifests or a fresh split."""
    from .dataset import read_manifest

    if cfg.split_dir is not None:
        cfg.require("split_dir")
        out = {}
        for part in ("train", "dev"):
            p = cfg.split_dir / f"{part}.txt"
            if not p.exists():
                raise ConfigError(f"missing manifest {p}")
            out[part] = set(read_manifest(p))
        return out
    return {part: set(ids) for part, ids in _split(cfg, beams).items()}


def _split(cfg: RunConfig, beams) -> dict[str, list[str]]:
    from .dataset import train_dev_split

    if cfg.split_source == "cross":
        spec = train_dev_split(beams, seed=cfg.seed)
        return {"train": spec.members("train"), "dev": spec.members("dev")}
    qids = sorted(b.question_id for b in beams)
    random.Random(cfg.seed).shuffle(qids)
    n_dev = min(len(qids) - 1, max(1, int(len(qids) * 0.2 + 0.5)))
    if len(qids) < 2:
        raise DataError("need at least 2 questions to split")
    return {"train": sorted(qids[n_dev:]), "dev": sorted(qids[:n_dev])}


def _member(b, ids: set[str]) -> bool:
    return b.db_id in ids or b.question_id in ids


def _prepare(beams):
    from .dataset import dedup_and_cap, filter_executable

    return [dedup_and_cap(b) for b in filter_executable(beams)]


def _fold_of(cfg: RunConfig, beams) -> dict[str, int]:
    from .evaluator import assign_folds

    return assign_folds((b.db_id for b in beams), cfg.cv_folds, cfg.seed)


def _fit(cfg: RunConfig, train_beams, dev_beams, anns, emb, log_path: Path | None):
    from .encode import build_vocabs, encode_beams
    from .model import ModelConfig
    from .model.train import train, write_log

    opts = cfg.graph_options()
    tv, lv = build_vocabs(train_beams, anns, opts, cfg.min_count)
    mc = ModelConfig(**{**cfg.model, "token_vocab_size": len(tv), "label_vocab_size": len(lv), "seed": cfg.seed,
                        "external_dim": emb.dim if emb is not None else 0})
    res = train(encode_beams(train_beams, anns, tv, lv, opts, emb), mc, cfg.train_config(),
                dev=encode_beams(dev_beams, anns, tv, lv, opts, emb))
    if log_path is not None:
        write_log(log_path, res.history)
    return res, mc, tv, lv


def _graph_extra(cfg: RunConfig) -> dict:
    return {"simplify": cfg.simplify, "prune_joins": cfg.prune_joins, "split_source": cfg.split_source,
            "seed": cfg.seed}


def _scores_from_beams(beams) -> dict[str, list[float]]:
    out = {}
    for b in beams:
        if any(p.score is None for p in b.predictions):
            raise DataError(f"{b.question_id}: unscored predictions (run 'score' first)")
        out[b.question_id] = [p.score for p in b.predictions]
    return out


# -- commands -------------------------------------------------------------------------

def cmd_label(cfg: RunConfig, args) -> int:
    from .dataset import write_beams
    from .execeval import Label, LabelCache

    beams = _load(cfg)
    cfg.require("db_root")
    cache = LabelCache(cfg.cache) if cfg.cache else None
    todo, done = [], {}
    for b in beams:
        if cache is not None:
            hits = [cache.get(b.db_id, b.gold_sql, p.sql) for p in b.predictions]
            if all(hits):
                done[b.question_id] = b.with_predictions(replace(p, label=h.label)
                                                         for p, h in zip(b.predictions, hits))
                continue
        todo.append(b)
    results = _pool_map(_label_beam, [(b, cfg.db_root, cfg.timeout_ms) for b in todo], cfg.workers)
    naive = {}
    for b, nv in results:
        done[b.question_id] = b
        naive[b.question_id] = nv
        if cache is not None:
            from .execeval import LabelResult

            for p in b.predictions:
                cache.put(b.db_id, b.gold_sql, p.sql, LabelResult(p.label, "execution"))
    labeled = [done[b.question_id] for b in beams]
    path = Path(args.out) if args.out else _out(cfg, "labeled.jsonl")
    write_beams(path, labeled)
    counts = {lab.value: sum(p.label is lab for b in labeled for p in b.predictions) for lab in Label}
    top_ok = sum(b.top.label is Label.CORRECT for b in labeled)
    disagree = sum(naive[q] is not done[q].top.label for q in naive)
    print(f"labeled {len(labeled)} beams, {sum(counts.values())} predictions -> {path}")
    print("labels: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    print(f"top-1 accuracy {100 * top_ok / len(labeled):.1f}%; naive-pipeline disagreements on top-1: {disagree}"
          + (" (cached beams not re-checked)" if len(naive) < len(labeled) else ""))
    return EXIT_OK


def cmd_split(cfg: RunConfig, args) -> int:
    from .dataset import cross_domain_halves

    beams = _load(cfg)
    out_dir = cfg.split_dir or _out(cfg, "splits")
    out_dir.mkdir(parents=True, exist_ok=True)
    parts = _split(cfg, beams)
    parts.update({k: v for k, v in
                  ((p, cross_domain_halves((b.db_id for b in beams), cfg.seed).members(p))
                   for p in ("half_a", "half_b"))})
    for part, ids in parts.items():
        (out_dir / f"{part}.txt").write_text("".join(i + "\n" for i in ids), encoding="utf-8")
    print(f"split ({cfg.split_source}-domain, seed {cfg.seed}) -> {out_dir}")
    for part, ids in parts.items():
        print(f"  {part}: {len(ids)} ids")
    return EXIT_OK


def cmd_stats(cfg: RunConfig, args) -> int:
    from .dataset import filter_executable, format_stats, stats

    beams = filter_executable(_load(cfg))
    rows = {"all": stats(beams)}
    if cfg.split_dir is not None or args.by_split:
        sel = _selection(cfg, beams)
        for part in ("train", "dev"):
            rows[part] = stats([b for b in beams if _member(b, sel[part])])
    text = format_stats(rows)
    print(text)
    _out(cfg, "stats.txt").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_train(cfg: RunConfig, args) -> int:
    from .model import save_checkpoint
    from .model.train import checksum

    beams = _prepare(_load(cfg))
    anns = _annotations(cfg)
    emb = _embeddings(cfg)
    if args.crossfit:
        folds = _fold_of(cfg, beams)
        for f in range(cfg.cv_folds):
            pool = [b for b in beams if folds[b.db_id] != f]
            sel = {k: set(v) for k, v in _split(cfg, pool).items()}
            tr = [b for b in pool if _member(b, sel["train"])]
            dev = [b for b in pool if _member(b, sel["dev"])]
            res, mc, tv, lv = _fit(cfg, tr, dev, anns, emb, _out(cfg, f"train_log_fold{f}.csv"))
            path = _out(cfg, f"model_fold{f}.npz")
            save_checkpoint(path, res.params, mc, tv, lv, {**_graph_extra(cfg), "fold": f})
            print(f"fold {f}: {len(tr)} train / {len(dev)} dev beams, best epoch {res.best_epoch} -> {path}")
        return EXIT_OK
    sel = _selection(cfg, beams)
    tr = [b for b in beams if _member(b, sel["train"])]
    dev = [b for b in beams if _member(b, sel["dev"])]
    res, mc, tv, lv = _fit(cfg, tr, dev, anns, emb, _out(cfg, "train_log.csv"))
    path = cfg.checkpoint or _out(cfg, "model.npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(path, res.params, mc, tv, lv, _graph_extra(cfg))
    best = res.history[res.best_epoch - 1]
    print(f"trained on {len(tr)} beams ({cfg.ablation_row()}), dev {len(dev)} beams; best epoch {res.best_epoch} "
          f"dev acc {best['dev_acc']} dev auc {best['dev_auc']}")
    print(f"checkpoint {path} sha256 {checksum(res.params)[:16]}")
    return EXIT_OK


def _score_chunk(job):
    from .encode import GraphOptions, encode_beams
    from .model import ExternalEmbeddings, load_checkpoint, predict

    ckpt, beams, anns, emb_path = job
    params, mc, tv, lv, extra = load_checkpoint(ckpt)
    opts = GraphOptions(simplify=extra.get("simplify", True), prune_joins=extra.get("prune_joins", True))
    emb = ExternalEmbeddings.load(emb_path) if emb_path else None
    enc = encode_beams(beams, anns, tv, lv, opts, emb)
    # one batch per beam, so scores do not depend on how beams are sharded
    return [[float(s) for s in predict(params, mc, e.pairs())] for e in enc]


def cmd_score(cfg: RunConfig, args) -> int:
    from .dataset import write_beams

    beams = _load(cfg)
    anns = _annotations(cfg)
    if args.crossfit:
        folds = _fold_of(cfg, beams)
        ckpts = {f: _out(cfg, f"model_fold{f}.npz") for f in range(cfg.cv_folds)}
        for p in ckpts.values():
            if not p.exists():
                raise ConfigError(f"missing fold checkpoint {p} (run 'train --crossfit')")
        groups = [(ckpts[f], [b for b in beams if folds[b.db_id] == f]) for f in range(cfg.cv_folds)]
    else:
        ckpt = cfg.checkpoint or _out(cfg, "model.npz")
        if not ckpt.exists():
            raise ConfigError(f"checkpoint does not exist: {ckpt}")
        groups = [(ckpt, beams)]
    jobs = []
    for ckpt, members in groups:
        size = max(1, -(-len(members) // cfg.workers))
        for i in range(0, len(members), size):
            chunk = members[i:i + size]
            jobs.append((ckpt, chunk, {b.question_id: anns[b.question_id] for b in chunk if b.question_id in anns},
                         cfg.embeddings))
    results = _pool_map(_score_chunk, jobs, cfg.workers)
    scores = {b.question_id: s for (_, chunk, _, _), res in zip(jobs, results) for b, s in zip(chunk, res)}
    scored = [b.with_predictions(replace(p, score=s) for p, s in zip(b.predictions, scores[b.question_id]))
              for b in beams]
    path = Path(args.out) if args.out else _out(cfg, "scored.jsonl")
    write_beams(path, scored)
    print(f"scored {sum(len(b.predictions) for b in scored)} predictions in {len(scored)} beams -> {path}")
    return EXIT_OK


def _method_examples(beams, oracle: bool = False) -> dict[str, list]:
    """Top-1 examples per confidence method (higher score = more likely correct)."""
    from .evaluator import ScoredExample, approximate_confidence, dropout_uncertainty
    from .execeval import Label

    def ex(b, s):
        return ScoredExample(b.question_id, b.db_id, float(s), int(b.top.label is Label.CORRECT), 0)

    out = {"Parser confidence": [ex(b, approximate_confidence([p.parser_score for p in b.predictions])[0])
                                 for b in beams]}
    if all(b.top.dropout_scores is not None for b in beams):
        out["Dropout uncertainty"] = [ex(b, -dropout_uncertainty(b.top.dropout_scores)) for b in beams]
    if oracle:
        out["Oracle"] = [ex(b, float(b.top.label is Label.CORRECT)) for b in beams]
    elif all(b.top.score is not None for b in beams):
        out["Error detector"] = [ex(b, b.top.score) for b in beams]
    return out


def cmd_eval(cfg: RunConfig, args) -> int:
    from .evaluator import format_metrics_table, kfold_eval

    beams = _prepare(_load(cfg))
    rows = {name: kfold_eval(exs, k=cfg.cv_folds, seed=cfg.seed)
            for name, exs in _method_examples(beams, oracle=args.oracle).items()}
    text = format_metrics_table(rows)
    print(text)
    _out(cfg, "metrics.txt").write_text(text + "\n", encoding="utf-8")
    _out(cfg, "metrics.json").write_text(json.dumps({k: v.to_dict() for k, v in rows.items()}, indent=2,
                                                    sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_rerank(cfg: RunConfig, args) -> int:
    from .tasks import beam_hit_rate, ed_then_rerank, rerank_all, top1_accuracy

    beams = _prepare(_load(cfg))
    scores = _scores_from_beams(beams)
    rows = [("Original", top1_accuracy(beams)), ("Beam hit rate", beam_hit_rate(beams))]
    if args.mode in ("rr", "both"):
        rows.append(("RR", top1_accuracy([rerank_all(b, scores[b.question_id]) for b in beams])))
    if args.mode in ("ed_rr", "both"):
        touched = sum(scores[b.question_id][0] < cfg.threshold for b in beams)
        rows.append((f"ED+RR (touched {touched})",
                     top1_accuracy([ed_then_rerank(b, scores[b.question_id], cfg.threshold) for b in beams])))
    text = "\n".join(f"{name:<24}{100 * acc:6.1f}" for name, acc in rows)
    print(text)
    _out(cfg, "rerank.txt").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_trigger(cfg: RunConfig, args) -> int:
    from .tasks import (answer_curve, interaction_curve, interactions_for_accuracy, plot_curves,
                        questions_at_precision, write_curves_csv)

    beams = _prepare(_load(cfg))
    methods = _method_examples(beams)
    modes = ("answer", "interaction") if args.mode == "both" else (args.mode,)
    for mode in modes:
        build = answer_curve if mode == "answer" else interaction_curve
        curves = [build(exs, name) for name, exs in methods.items()]
        csv_path = _out(cfg, f"curve_{mode}.csv")
        write_curves_csv(csv_path, curves)
        labels = ("# questions answered", "precision") if mode == "answer" else ("# interactions", "accuracy")
        plotted = plot_curves(_out(cfg, f"curve_{mode}.png"), curves, *labels, title=mode)
        print(f"{mode} curves -> {csv_path}" + ("" if plotted else " (matplotlib missing, no image)"))
        for c in curves:
            if mode == "answer":
                print(f"  {c.method:<22} answered at 95% precision: {questions_at_precision(c)}")
            else:
                try:
                    need = interactions_for_accuracy(c)
                except ValueError:
                    need = None
                print(f"  {c.method:<22} interactions for 95% accuracy: {need}")
    return EXIT_OK


def cmd_parse_sql(cfg: RunConfig, args) -> int:
    from .sql import parse_sql, sql_graph, tokenize

    toks = tokenize(args.sql)
    print("tokens: " + " ".join(t.text for t in toks))
    ast = parse_sql(args.sql)
    print(ast.sexpr())
    if args.graph:
        g, leaves = sql_graph(args.sql, prune_joins=cfg.prune_joins, simplify=cfg.simplify)
        print(f"graph: {g.n} nodes, {len(g.edges)} edges, {len(leaves)} leaves")
    return EXIT_OK


def cmd_grad_check(cfg: RunConfig, args) -> int:
    from .encode import build_vocabs, encode_beams
    from .model import ModelConfig, grad_check, init_params
    from .synthetic import generate_corpus

    beams, anns, _ = generate_corpus(pairs=200, seed=cfg.seed)
    opts = cfg.graph_options()
    tv, lv = build_vocabs(beams, anns, opts)
    enc = encode_beams(beams, anns, tv, lv, opts)
    small = [(e.question, s, y) for e in enc for s, y in zip(e.sqls, e.labels) if e.question.n <= 12 and s.n <= 12]
    if not small:
        small = [(e.question, s, y) for e in enc for s, y in zip(e.sqls, e.labels)]
    rng = random.Random(cfg.seed)
    picks = rng.sample(small, min(args.pairs, len(small)))
    mc = ModelConfig(**{"hidden_dim": 16, "attention_heads": 2, **cfg.model, "dropout_rate": 0.0,
                        "token_vocab_size": len(tv), "label_vocab_size": len(lv)})
    worst = 0.0
    for i, (q, s, y) in enumerate(picks):
        rep = grad_check([(q, s)], np.array([float(y)]), init_params(replace(mc, seed=i)), mc,
                         eps=args.eps, seed=i)
        worst = max(worst, rep.worst)
        print(f"pair {i}: q {q.n} nodes, sql {s.n} nodes, max rel err {rep.worst:.2e} "
              f"({rep.checked} checked, {rep.kinks} kinks skipped)")
    print(f"worst relative error {worst:.3e}")
    if worst > args.tol:
        raise NumericalError(f"gradient check failed: {worst:.3e} > {args.tol:g}")
    return EXIT_OK


def cmd_toy(cfg: RunConfig, args) -> int:
    from .toy import write_toy_corpus

    paths = write_toy_corpus(args.dir, seed=cfg.seed)
    for k, v in paths.items():
        print(f"{k}: {v}")
    return EXIT_OK


def cmd_synthetic(cfg: RunConfig, args) -> int:
    from .dataset import write_beams
    from .nl import write_annotations
    from .synthetic import generate_corpus, learning_sanity

    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    beams, anns, _ = generate_corpus(seed=cfg.seed)
    write_beams(out / "beams.jsonl", beams)
    write_annotations(out / "annotations.tsv", anns.values())
    print(f"{len(beams)} beams over {len({b.db_id for b in beams})} databases -> {out}")
    if args.train:
        from .model import ModelConfig

        res = learning_sanity(seed=cfg.seed, model_cfg=ModelConfig(**cfg.model) if cfg.model else None,
                              train_cfg=cfg.train_config())
        print(f"held-out-database AUC {res.test_auc:.4f} (best epoch {res.best_epoch}, "
              f"{res.seconds:.0f} s, params sha256 {res.checksum[:16]})")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("paths")
    g.add_argument("--config", help="INI file with [paths] [model] [train] [run] sections")
    for key in PATH_KEYS:
        g.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    m = p.add_argument_group("model")
    m.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    m.add_argument("--heads", dest="attention_heads", type=int)
    m.add_argument("--gat-layers", dest="gat_layers", type=int)
    m.add_argument("--layer-ablation", dest="layer_ablation", action="store_true", default=None)
    m.add_argument("--dropout", dest="dropout_rate", type=float)
    m.add_argument("--ffn-dim", dest="ffn_dim", type=int)
    t = p.add_argument_group("training")
    t.add_argument("--batch-beams", dest="batch_beams", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--lr", dest="learning_rate", type=float)
    t.add_argument("--warmup", dest="warmup_fraction", type=float)
    t.add_argument("--weight-decay", dest="weight_decay", type=float)
    r = p.add_argument_group("run")
    r.add_argument("--simplify", dest="simplify", action="store_true", default=None)
    r.add_argument("--no-simplify", dest="simplify", action="store_false")
    r.add_argument("--prune-joins", dest="prune_joins", action="store_true", default=None)
    r.add_argument("--no-prune-joins", dest="prune_joins", action="store_false")
    r.add_argument("--split-source", choices=("in", "cross"))
    r.add_argument("--seed", type=int)
    r.add_argument("--cv-folds", dest="cv_folds", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--min-count", dest="min_count", type=int)
    r.add_argument("--timeout-ms", dest="timeout_ms", type=int)
    r.add_argument("--threshold", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="sqled", description="Error detection for text-to-SQL beam predictions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    add("label", cmd_label, "label beam predictions by execution").add_argument("-o", "--out")
    add("split", cmd_split, "write train/dev and cross-domain half manifests")
    add("stats", cmd_stats, "beam statistics table").add_argument("--by-split", action="store_true")
    add("train", cmd_train, "train the error detector").add_argument("--crossfit", action="store_true",
                                                                     help="one model per CV fold")
    sp = add("score", cmd_score, "score every prediction")
    sp.add_argument("-o", "--out")
    sp.add_argument("--crossfit", action="store_true", help="score each fold with the model that did not see it")
    add("eval", cmd_eval, "cross-validated error detection metrics").add_argument("--oracle", action="store_true")
    add("rerank", cmd_rerank, "re-ranking accuracy").add_argument("--mode", choices=("rr", "ed_rr", "both"),
                                                                  default="both")
    add("trigger", cmd_trigger, "interaction triggering curves").add_argument(
        "--mode", choices=("answer", "interaction", "both"), default="both")
    sp = add("parse-sql", cmd_parse_sql, "dump the parse tree of one query")
    sp.add_argument("sql")
    sp.add_argument("--graph", action="store_true")
    sp = add("grad-check", cmd_grad_check, "finite-difference check of the backward pass")
    sp.add_argument("--pairs", type=int, default=20)
    sp.add_argument("--eps", type=float, default=1e-4)
    sp.add_argument("--tol", type=float, default=1e-4)
    add("toy", cmd_toy, "write the toy corpus").add_argument("dir")
    sp = add("synthetic", cmd_synthetic, "write the synthetic corpus, optionally train on it")
    sp.add_argument("dir")
    sp.add_argument("--train", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        return args.fn(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SqledError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
