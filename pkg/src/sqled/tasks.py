"""Downstream uses of detector scores: re-ranking and triggering curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .dataset import BeamRecord
from .errors import ArityMismatch, EmptyInput
from .evaluator import ScoredExample
from .execeval import Label


@dataclass(frozen=True)
class Curve:
    method: str
    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve x values must be strictly increasing")


def _check(beam: BeamRecord, scores: Sequence[float]) -> None:
    if len(scores) != len(beam.predictions):
        raise ArityMismatch(f"{beam.question_id}: {len(scores)} scores for {len(beam.predictions)} predictions")


def rerank_all(beam: BeamRecord, scores: Sequence[float]) -> BeamRecord:
    _check(beam, scores)
    order = sorted(range(len(scores)), key=lambda i: -scores[i])  # sorted() is stable
    return beam.with_predictions(beam.predictions[i] for i in order)


def ed_then_rerank(beam: BeamRecord, scores: Sequence[float], threshold: float = 0.5) -> BeamRecord:
    _check(beam, scores)
    if scores[0] >= threshold:
        return beam
    return rerank_all(beam, scores)


def top1_accuracy(beams: Sequence[BeamRecord]) -> float:
    return sum(b.top.label is Label.CORRECT for b in beams) / len(beams) if beams else 0.0


def beam_hit_rate(beams: Sequence[BeamRecord]) -> float:
    if not beams:
        return 0.0
    return sum(any(p.label is Label.CORRECT for p in b.predictions) for b in beams) / len(beams)


def answer_curve(examples: Sequence[ScoredExample], method: str = "") -> Curve:
    """(questions answered, precision) for every distinct threshold, high to low."""
    if not examples:
        raise EmptyInput("no examples")
    ranked = sorted(examples, key=lambda e: -e.score)
    points = []
    correct = 0
    for i, e in enumerate(ranked):
        correct += e.label
        if i + 1 == len(ranked) or ranked[i + 1].score != e.score:
            points.append((i + 1, correct / (i + 1)))
    return Curve(method, tuple(points))


def questions_at_precision(curve: Curve, target: float = 0.95) -> int:
    return max((x for x, y in curve.points if y >= target), default=0)


def interaction_curve(examples: Sequence[ScoredExample], method: str = "") -> Curve:
    """Accuracy after oracle-fixing the b least confident questions, b = 0..n."""
    if not examples:
        raise EmptyInput("no examples")
    n = len(examples)
    ranked = sorted(examples, key=lambda e: e.score)
    untouched_correct = sum(e.label for e in examples)
    points = [(0, untouched_correct / n)]
    for b, e in enumerate(ranked, 1):
        untouched_correct -= e.label
        points.append((b, (untouched_correct + b) / n))
    return Curve(method, tuple(points))


def interactions_for_accuracy(curve: Curve, target: float = 0.95) -> int:
    for x, y in curve.points:
        if y >= target:
            return x
    raise ValueError(f"curve never reaches {target}")


def top1_examples(beams: Iterable[BeamRecord], scores: dict[str, Sequence[float]] | None = None) -> list[ScoredExample]:
    """One example per beam from its rank-1 prediction; scores default to ``Prediction.score``."""
    out = []
    for b in beams:
        s = scores[b.question_id][0] if scores is not None else b.top.score
        if s is None:
            raise EmptyInput(f"{b.question_id}: top prediction has no score")
        out.append(ScoredExample(b.question_id, b.db_id, float(s), int(b.top.label is Label.CORRECT), 0))
    return out


def write_curves_csv(path: str | Path, curves: Iterable[Curve]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "x", "y"])
        for c in curves:
            for x, y in c.points:
                w.writerow([c.method, x, repr(float(y))])


def read_curves_csv(path: str | Path) -> list[Curve]:
    rows: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            rows.setdefault(r["method"], []).append((int(r["x"]), float(r["y"])))
    return [Curve(m, tuple(p)) for m, p in rows.items()]


def plot_curves(path: str | Path, curves: Sequence[Curve], xlabel: str, ylabel: str, title: str = "") -> bool:
    """Render curves to an image file.  Returns False when matplotlib is missing."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return False
    fig, ax = plt.subplots(figsize=(5, 4))
    for c in curves:
        ax.plot([x for x, _ in c.points], [y for _, y in c.points], label=c.method)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True
