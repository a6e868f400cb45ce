"""Error-detection metrics, baseline confidence scores, AUC and k-fold evaluation.

Positive class = the prediction is correct; every score follows the
"higher means more confident" convention.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateClasses, EmptyBeam, EmptyInput, TooFewDatabases, WrongArity

DROPOUT_PASSES = 10


@dataclass(frozen=True)
class ScoredExample:
    question_id: str
    db_id: str
    score: float
    label: int
    beam_rank: int = 0

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class MetricsReport:
    pos_precision: float
    pos_recall: float
    pos_f1: float
    neg_precision: float
    neg_recall: float
    neg_f1: float
    accuracy: float
    threshold: float
    auc: float | None = None
    auc_fold_mean: float | None = None
    undefined: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _prf(tp: int, fp: int, fn: int, prefix: str, undefined: list[str]) -> tuple[float, float, float]:
    if tp + fp == 0:
        undefined.append(prefix + "precision")
    if tp + fn == 0:
        undefined.append(prefix + "recall")
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def confusion_metrics(examples: Sequence[ScoredExample], threshold: float) -> MetricsReport:
    """Predict "correct" iff score >= threshold.  Undefined ratios are 0 and listed in ``undefined``."""
    if not examples:
        raise EmptyInput("no examples")
    tp = fp = tn = fn = 0
    for e in examples:
        pos = e.score >= threshold
        if pos and e.label:
            tp += 1
        elif pos:
            fp += 1
        elif e.label:
            fn += 1
        else:
            tn += 1
    undefined: list[str] = []
    pp, pr, pf = _prf(tp, fp, fn, "pos_", undefined)
    np_, nr, nf = _prf(tn, fn, fp, "neg_", undefined)
    return MetricsReport(pp, pr, pf, np_, nr, nf, (tp + tn) / len(examples), threshold, undefined=undefined)


def roc_auc(examples: Sequence[ScoredExample]) -> float:
    """Mann-Whitney U / (n_pos * n_neg) using mid-ranks, so ties count one half."""
    scores = np.array([e.score for e in examples], dtype=np.float64)
    labels = np.array([e.label for e in examples], dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateClasses(f"{n_pos} positives and {n_neg} negatives")
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(len(s))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i:j + 1] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = ranks[labels[order]].sum()
    u = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def approximate_confidence(parser_scores: Sequence[float]) -> list[float]:
    """Softmax over a deduplicated beam's parser scores."""
    if len(parser_scores) == 0:
        raise EmptyBeam("empty beam")
    x = np.asarray(parser_scores, dtype=np.float64)
    z = np.exp(x - x.max())
    return (z / z.sum()).tolist()


def dropout_uncertainty(dropout_scores: Sequence[float]) -> float:
    """Population standard deviation over the dropout passes (higher = less confident)."""
    if len(dropout_scores) != DROPOUT_PASSES:
        raise WrongArity(f"expected {DROPOUT_PASSES} dropout scores, got {len(dropout_scores)}")
    return statistics.pstdev(float(x) for x in dropout_scores)


def candidate_thresholds(scores: Iterable[float]) -> list[float]:
    u = sorted(set(scores))
    mids = [(a + b) / 2.0 for a, b in zip(u, u[1:])]
    return [-math.inf] + mids + [math.inf]


def best_threshold(examples: Sequence[ScoredExample]) -> float:
    """Accuracy-maximizing threshold; ties go to the highest candidate."""
    if not examples:
        raise EmptyInput("no examples")
    scores = np.array([e.score for e in examples])
    labels = np.array([e.label for e in examples], dtype=bool)
    best_t, best_acc = -math.inf, -1.0
    for t in candidate_thresholds(scores.tolist()):
        acc = float(np.mean((scores >= t) == labels))
        if acc >= best_acc:
            best_t, best_acc = t, acc
    return best_t


def assign_folds(db_ids: Iterable[str], k: int, seed: int = 0) -> dict[str, int]:
    dbs = sorted(set(db_ids))
    if len(dbs) < k:
        raise TooFewDatabases(f"{k} folds need {k} databases, got {len(dbs)}")
    random.Random(seed).shuffle(dbs)
    return {db: i % k for i, db in enumerate(dbs)}


_AVERAGED = ("pos_precision", "pos_recall", "pos_f1", "neg_precision", "neg_recall", "neg_f1",
             "accuracy", "threshold")


def kfold_eval(examples: Sequence[ScoredExample], k: int = 5, seed: int = 0,
               return_folds: bool = False):
    """Database-level k-fold evaluation.

    Each fold is scored at the threshold that maximizes accuracy on the other
    folds; fold metrics are averaged.  ``auc`` is pooled over all examples and
    ``auc_fold_mean`` averages the folds that contain both classes.
    """
    if not examples:
        raise EmptyInput("no examples")
    folds = assign_folds((e.db_id for e in examples), k, seed)
    reports = []
    fold_aucs = []
    for f in range(k):
        test = [e for e in examples if folds[e.db_id] == f]
        train = [e for e in examples if folds[e.db_id] != f]
        t = best_threshold(train)
        reports.append(confusion_metrics(test, t))
        try:
            fold_aucs.append(roc_auc(test))
        except DegenerateClasses:
            pass
    avg = {name: float(np.mean([getattr(r, name) for r in reports])) for name in _AVERAGED}
    undefined = sorted({u for r in reports for u in r.undefined})
    try:
        auc = roc_auc(examples)
    except DegenerateClasses:
        auc = None
    out = MetricsReport(**avg, auc=auc, auc_fold_mean=float(np.mean(fold_aucs)) if fold_aucs else None,
                        undefined=undefined)
    return (out, reports) if return_folds else out


def _pct(v: float | None) -> str:
    return "-" if v is None else f"{100 * v:.1f}"


def format_metrics_table(rows: dict[str, MetricsReport]) -> str:
    """Aligned text table: positive P/R/F1, negative P/R/F1, accuracy, AUC per method."""
    cols = ["Pos P", "Pos R", "Pos F1", "Neg P", "Neg R", "Neg F1", "Acc", "AUC"]
    width = max([len("Method")] + [len(n) for n in rows]) + 2
    head = "Method".ljust(width) + "".join(c.rjust(8) for c in cols)
    lines = [head, "-" * len(head)]
    for name, r in rows.items():
        vals = [r.pos_precision, r.pos_recall, r.pos_f1, r.neg_precision, r.neg_recall, r.neg_f1,
                r.accuracy, r.auc]
        lines.append(name.ljust(width) + "".join(_pct(v).rjust(8) for v in vals))
    return "\n".join(lines)
