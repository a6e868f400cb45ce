"""Beam-batched training loop."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..errors import DegenerateClasses, EmptyDataset
from ..evaluator import ScoredExample, roc_auc
from .config import ModelConfig, TrainConfig
from .features import GraphInput, make_batch
from .network import init_params, loss_and_grads, predict
from .optim import AdamW, linear_schedule


@dataclass
class TrainBeam:
    question_id: str
    db_id: str
    question: GraphInput
    sqls: list[GraphInput]
    labels: list[int]

    def pairs(self) -> list[tuple[GraphInput, GraphInput]]:
        return [(self.question, s) for s in self.sqls]


@dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0


def evaluate_beams(params: dict, cfg: ModelConfig, beams: Sequence[TrainBeam]) -> tuple[float, float | None]:
    """Accuracy at 0.5 and AUC over every (question, SQL) example."""
    pairs = [pr for b in beams for pr in b.pairs()]
    labels = np.array([y for b in beams for y in b.labels])
    scores = predict(params, cfg, pairs)
    acc = float(np.mean((scores >= 0.5) == (labels == 1)))
    try:
        auc = roc_auc([ScoredExample("", "", float(s), int(y)) for s, y in zip(scores, labels)])
    except DegenerateClasses:
        auc = None
    return acc, auc


def train(beams: Sequence[TrainBeam], model_cfg: ModelConfig, train_cfg: TrainConfig,
          dev: Sequence[TrainBeam] = (), params: dict | None = None,
          on_epoch: Callable[[dict], None] | None = None) -> TrainResult:
    """Each step consumes every example of ``batch_beams`` shuffled beams.

    Returns the parameters of the epoch with the best dev accuracy (first
    such epoch on ties), or the final parameters when there is no dev set.
    """
    beams = [b for b in beams if b.sqls]
    if not beams:
        raise EmptyDataset("no training examples")
    params = init_params(model_cfg) if params is None else {k: v.copy() for k, v in params.items()}
    rng = np.random.default_rng(train_cfg.seed)
    opt = AdamW(params, train_cfg.learning_rate, train_cfg.beta1, train_cfg.beta2, train_cfg.eps,
                train_cfg.weight_decay)
    k = train_cfg.batch_beams
    per_epoch = math.ceil(len(beams) / k)
    total = per_epoch * train_cfg.epochs
    step = 0
    result = TrainResult(params)
    best_acc = -1.0
    for epoch in range(1, train_cfg.epochs + 1):
        order = rng.permutation(len(beams))
        losses = []
        for i in range(0, len(order), k):
            chunk = [beams[j] for j in order[i:i + k]]
            batch = make_batch(pr for b in chunk for pr in b.pairs())
            labels = np.array([y for b in chunk for y in b.labels], dtype=np.float64)
            loss, grads = loss_and_grads(params, model_cfg, batch, labels, rng)
            step += 1
            opt.step(params, grads, linear_schedule(step, total, train_cfg.warmup_fraction))
            losses.append(loss)
        row = {"epoch": epoch, "step": step, "loss": float(np.mean(losses)), "dev_acc": None, "dev_auc": None}
        if dev:
            row["dev_acc"], row["dev_auc"] = evaluate_beams(params, model_cfg, dev)
            if row["dev_acc"] > best_acc:
                best_acc = row["dev_acc"]
                result.params = {n: v.copy() for n, v in params.items()}
                result.best_epoch = epoch
        result.history.append(row)
        if on_epoch:
            on_epoch(row)
    if not dev:
        result.params = params
        result.best_epoch = train_cfg.epochs
    return result


def write_log(path: str | Path, history: Sequence[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "step", "loss", "dev_acc", "dev_auc"])
        for r in history:
            w.writerow([r["epoch"], r["step"], repr(r["loss"]),
                        "" if r["dev_acc"] is None else repr(r["dev_acc"]),
                        "" if r["dev_auc"] is None else repr(r["dev_auc"])])


def checksum(params: dict) -> str:
    import hashlib

    h = hashlib.sha256()
    for name in sorted(params):
        h.update(name.encode())
        h.update(np.ascontiguousarray(params[name]).tobytes())
    return h.hexdigest()
