import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqled.errors import DegenerateClasses, EmptyBeam, EmptyInput, TooFewDatabases, WrongArity
from sqled.evaluator import (
    ScoredExample,
    approximate_confidence,
    assign_folds,
    best_threshold,
    confusion_metrics,
    dropout_uncertainty,
    format_metrics_table,
    kfold_eval,
    roc_auc,
)


def ex(scores, labels, dbs=None):
    dbs = dbs or [f"db{i % 7}" for i in range(len(scores))]
    return [ScoredExample(f"q{i}", d, float(s), int(y)) for i, (s, y, d) in enumerate(zip(scores, labels, dbs))]


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def trapezoid_auc(scores, labels):
    pts = [(0.0, 0.0)]
    P, N = sum(labels), len(labels) - sum(labels)
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y)
        fp = sum(1 for s, y in zip(scores, labels) if s >= t and not y)
        pts.append((fp / N, tp / P))
    return sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(pts, pts[1:]))


def test_confusion_perfect_and_all_positive():
    r = confusion_metrics(ex([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]), 0.5)
    assert (r.pos_precision, r.pos_recall, r.pos_f1, r.neg_precision, r.neg_recall, r.neg_f1, r.accuracy) == (1,) * 7
    r = confusion_metrics(ex([0.9, 0.8, 0.7, 0.6], [1, 1, 0, 0]), 0.5)
    assert r.pos_recall == 1.0 and r.neg_recall == 0.0 and r.accuracy == 0.5
    assert "neg_precision" in r.undefined and r.neg_precision == 0.0
    with pytest.raises(EmptyInput):
        confusion_metrics([], 0.5)


def test_positive_recall_monotone_in_threshold():
    rng = random.Random(0)
    e = ex([rng.random() for _ in range(100)], [rng.randint(0, 1) for _ in range(100)])
    recalls = [confusion_metrics(e, t / 20).pos_recall for t in range(21)]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))


def test_auc_examples():
    assert roc_auc(ex([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0])) == 1.0
    assert roc_auc(ex([0.3] * 6, [1, 0, 1, 0, 1, 1])) == 0.5
    with pytest.raises(DegenerateClasses):
        roc_auc(ex([0.1, 0.2], [1, 1]))


def test_auc_pairwise_and_trapezoid_oracles():
    rng = random.Random(7)
    for _ in range(5):
        scores = [round(rng.random(), 2) for _ in range(200)]
        labels = [rng.randint(0, 1) for _ in range(200)]
        got = roc_auc(ex(scores, labels))
        assert abs(got - pairwise_auc(scores, labels)) < 1e-9
        assert abs(got - trapezoid_auc(scores, labels)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.booleans()), min_size=2, max_size=40))
def test_auc_invariant_under_monotone_transform(pairs):
    labels = [int(y) for _, y in pairs]
    if len(set(labels)) < 2:
        return
    scores = [s for s, _ in pairs]
    a = roc_auc(ex(scores, labels))
    b = roc_auc(ex([math.exp(s) * 3 - 1 for s in scores], labels))
    assert a == b


def test_approximate_confidence():
    assert approximate_confidence([-2.3]) == [1.0]
    assert approximate_confidence([1.0, 1.0]) == [0.5, 0.5]
    rng = random.Random(1)
    for _ in range(50):
        s = [rng.uniform(-20, 5) for _ in range(rng.randint(1, 6))]
        c = rng.uniform(-100, 100)
        p, q = approximate_confidence(s), approximate_confidence([x + c for x in s])
        assert abs(sum(p) - 1) < 1e-12
        assert max(abs(a - b) for a, b in zip(p, q)) < 1e-12
    with pytest.raises(EmptyBeam):
        approximate_confidence([])


def test_dropout_uncertainty():
    assert dropout_uncertainty([0.3] * 10) == 0.0
    assert dropout_uncertainty([0, 1] * 5) == 0.5
    rng = random.Random(2)
    for _ in range(50):
        v = [rng.uniform(-3, 3) for _ in range(10)]
        mean = sum(v) / 10
        ref = math.sqrt(sum((x - mean) ** 2 for x in v) / 10)
        assert abs(dropout_uncertainty(v) - ref) < 1e-12
    with pytest.raises(WrongArity):
        dropout_uncertainty([1.0] * 9)


def test_threshold_tie_goes_high():
    # every cut between the two classes is equally accurate; the highest midpoint wins
    e = ex([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert best_threshold(e) == 0.5
    e = ex([0.5, 0.5], [0, 1])
    assert best_threshold(e) == math.inf


def test_kfold_oracle_and_anti_oracle():
    rng = random.Random(3)
    labels = [rng.random() < 0.7 for _ in range(300)]
    dbs = [f"db{rng.randrange(10)}" for _ in range(300)]
    oracle = kfold_eval(ex([float(y) for y in labels], labels, dbs), k=5)
    assert oracle.accuracy == 1.0 and oracle.auc == 1.0
    _, folds = kfold_eval(ex([float(y) for y in labels], labels, dbs), k=5, return_folds=True)
    assert all(f.accuracy == 1.0 for f in folds)
    anti, folds = kfold_eval(ex([1.0 - y for y in labels], labels, dbs), k=5, return_folds=True)
    fold_of = assign_folds(dbs, 5)
    for f, rep in enumerate(folds):
        test = [y for y, d in zip(labels, dbs) if fold_of[d] == f]
        prior = sum(test) / len(test)
        # majority class of the other folds is positive, so every fold predicts all positive
        assert rep.accuracy == pytest.approx(prior)
        assert rep.threshold == -math.inf
    assert anti.auc == 0.0


def test_folds_deterministic_disjoint_cover():
    dbs = [f"db{i}" for i in range(13)]
    a, b = assign_folds(dbs, 5, seed=4), assign_folds(list(reversed(dbs)), 5, seed=4)
    assert a == b and set(a) == set(dbs)
    assert sorted(a.values()).count(0) in (2, 3)
    with pytest.raises(TooFewDatabases):
        assign_folds(dbs[:4], 5)


def test_table_format():
    r = kfold_eval(ex([0.9, 0.2] * 10, [1, 0] * 10), k=5)
    text = format_metrics_table({"oracle": r})
    assert text.splitlines()[0].split()[:3] == ["Method", "Pos", "P"]
    assert "100.0" in text
