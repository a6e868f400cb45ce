import itertools
import random

import pytest

from sqled.dataset import BeamRecord, Prediction
from sqled.errors import ArityMismatch, EmptyInput
from sqled.evaluator import ScoredExample
from sqled.execeval import Label
from sqled.tasks import (
    Curve,
    answer_curve,
    beam_hit_rate,
    ed_then_rerank,
    interaction_curve,
    interactions_for_accuracy,
    questions_at_precision,
    read_curves_csv,
    rerank_all,
    top1_accuracy,
    write_curves_csv,
)

C, W = Label.CORRECT, Label.WRONG


def beam(labels, qid="q"):
    return BeamRecord(qid, "d", "?", "S", tuple(Prediction(f"S{i}", -i, label=l) for i, l in enumerate(labels)))


def random_beams(rng, n):
    return [beam([rng.choice([C, W]) for _ in range(rng.randint(1, 5))], f"q{i}") for i in range(n)]


def ex(scores, labels):
    return [ScoredExample(f"q{i}", "d", float(s), int(y)) for i, (s, y) in enumerate(zip(scores, labels))]


def test_rerank_oracle_equals_beam_hit_rate():
    rng = random.Random(0)
    beams = random_beams(rng, 200)
    out = [rerank_all(b, [1.0 if p.label is C else 0.0 for p in b.predictions]) for b in beams]
    assert top1_accuracy(out) == beam_hit_rate(beams)


def test_rerank_constant_is_stable_and_arity():
    b = beam([W, C, W])
    assert rerank_all(b, [0.3, 0.3, 0.3]) == b
    assert [p.sql for p in rerank_all(b, [0.1, 0.5, 0.5]).predictions] == ["S1", "S2", "S0"]
    with pytest.raises(ArityMismatch):
        rerank_all(b, [0.1])
    with pytest.raises(ArityMismatch):
        ed_then_rerank(b, [0.1])


def test_ed_then_rerank():
    b = beam([W, C, W])
    assert ed_then_rerank(b, [0.9, 1.0, 1.0]) == b
    assert ed_then_rerank(b, [0.1, 0.8, 0.3]) == rerank_all(b, [0.1, 0.8, 0.3])
    rng = random.Random(1)
    for bb in random_beams(rng, 100):
        s = [rng.random() for _ in bb.predictions]
        out = ed_then_rerank(bb, s)
        assert (out == bb) if s[0] >= 0.5 else (out == rerank_all(bb, s))


def test_beam_hit_rate():
    assert beam_hit_rate([beam([W, C]), beam([C])]) == 1.0
    rng = random.Random(2)
    beams = random_beams(rng, 100)
    assert beam_hit_rate(beams) == sum(C in [p.label for p in b.predictions] for b in beams) / 100


def test_answer_curve():
    labels = [1, 1, 0, 1, 0]
    c = answer_curve(ex([0.9, 0.8, 0.1, 0.7, 0.2], labels))
    assert c.points[:3] == ((1, 1.0), (2, 1.0), (3, 1.0))
    assert c.points[-1] == (5, 0.6)
    c = answer_curve(ex([0.5] * 5, labels))
    assert c.points == ((5, 0.6),)
    with pytest.raises(EmptyInput):
        answer_curve([])


def test_questions_at_precision():
    c = Curve("m", ((10, 0.97), (50, 0.96), (100, 0.90)))
    assert questions_at_precision(c) == 50
    assert questions_at_precision(Curve("m", ((10, 0.5),))) == 0
    rng = random.Random(3)
    for _ in range(50):
        xs = sorted(rng.sample(range(1, 500), 10))
        c = Curve("m", tuple((x, rng.random()) for x in xs))
        best = 0
        for x, y in c.points:
            if y >= 0.95:
                best = x
        assert questions_at_precision(c) == best


def test_interaction_curve_basics():
    labels = [1] * 7 + [0] * 3
    scores = [0.9] * 7 + [0.1] * 3
    c = interaction_curve(ex(scores, labels))
    assert c.points[3] == (3, 1.0) and c.points[2][1] < 1.0
    assert interactions_for_accuracy(c, 1.0) == 3
    rng = random.Random(4)
    labels = [rng.randint(0, 1) for _ in range(60)]
    c = interaction_curve(ex([rng.random() for _ in labels], labels))
    ys = [y for _, y in c.points]
    assert ys[-1] == 1.0 and all(a <= b for a, b in zip(ys, ys[1:]))


def test_interactions_base_accuracy_high():
    labels = [1] * 96 + [0] * 4
    assert interactions_for_accuracy(interaction_curve(ex([0.5] * 100, labels))) == 0


def brute_force_interactions(scores, labels, target):
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    fixed = set()
    for b in range(len(scores) + 1):
        acc = sum(1 if (i in fixed or labels[i]) else 0 for i in range(len(scores))) / len(scores)
        if acc >= target:
            return b
        fixed.add(order[b])


def test_interactions_simulation_oracle():
    rng = random.Random(5)
    for _ in range(20):
        labels = [1] * 50 + [0] * 50
        rng.shuffle(labels)
        scores = [rng.random() for _ in labels]
        got = interactions_for_accuracy(interaction_curve(ex(scores, labels)))
        assert got == brute_force_interactions(scores, labels, 0.95)
        assert 45 <= got <= 100
        perfect = interactions_for_accuracy(interaction_curve(ex([float(y) for y in labels], labels)))
        assert perfect == 45


def test_perfect_ordering_is_minimal():
    rng = random.Random(6)
    labels = [rng.random() < 0.8 for _ in range(8)]
    ideal = interactions_for_accuracy(interaction_curve(ex([float(y) for y in labels], labels)), 0.95)
    for perm in itertools.islice(itertools.permutations(range(8)), 0, 40320, 97):
        other = interactions_for_accuracy(interaction_curve(ex(list(perm), labels)), 0.95)
        assert other >= ideal


def test_curves_csv_round_trip(tmp_path):
    curves = [Curve("a", ((0, 0.5), (3, 1 / 3))), Curve("b", ((1, 0.25),))]
    path = tmp_path / "c.csv"
    write_curves_csv(path, curves)
    assert read_curves_csv(path) == curves


def test_curve_x_strict():
    with pytest.raises(ValueError):
        Curve("m", ((1, 0.1), (1, 0.2)))
