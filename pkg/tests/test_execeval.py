import sqlite3
from types import SimpleNamespace

import pytest

from crafted import CASES, DESIGNED
from beam_examples import FESTIVAL_BEAMS, FESTIVAL_GOLD, HEAD_BEAMS, HEAD_GOLD, UNGRAMMATICAL
from sqled.errors import DataError
from sqled.execeval import (
    ExecError,
    ExecResult,
    Label,
    LabelCache,
    LabelResult,
    compare_results,
    db_path_for,
    evaluate_parser,
    execute,
    label_naive,
    label_prediction,
    row_paired_equal,
)
from sqled.toy import build_toy_databases


@pytest.fixture(scope="module")
def db_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("dbs")
    build_toy_databases(root)
    return root


@pytest.fixture(scope="module")
def town(db_root):
    return db_path_for(db_root, "town_life")


@pytest.mark.parametrize("name,gold,pred,fixed,naive", CASES, ids=[c[0] for c in CASES])
def test_crafted_case(town, name, gold, pred, fixed, naive):
    assert label_prediction(town, gold, pred).label.value == fixed
    assert label_naive(town, gold, pred).label.value == naive


def test_designed_cases_are_exactly_the_disagreements():
    assert len(DESIGNED) == 4 and len(CASES) == 12


def test_invalid_utf8_cell_decodes_with_replacement(town):
    res = execute(town, "SELECT name FROM cafes WHERE id = 2")
    assert "�" in res.columns[0][0]
    with pytest.raises(ExecError):
        execute(town, "SELECT name FROM cafes WHERE id = 2", tolerant=False)


def test_error_kinds(town, tmp_path):
    with pytest.raises(ExecError) as info:
        execute(town, "SELEC name FROM people")
    assert info.value.kind == "syntax"
    with pytest.raises(ExecError) as info:
        execute(town, "SELECT nope FROM people")
    assert info.value.kind == "runtime"
    with pytest.raises(DataError):
        execute(tmp_path / "missing.sqlite", "SELECT 1")


def test_timeout(town):
    slow = ("WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) "
            "SELECT count(*) FROM c")
    with pytest.raises(ExecError) as info:
        execute(town, slow, timeout_ms=50)
    assert info.value.kind == "timeout"


def test_read_only(town):
    with pytest.raises(ExecError):
        execute(town, "DELETE FROM people")
    assert execute(town, "SELECT count(*) FROM people").columns == ((5,),)


def test_gold_failure_is_data_error(town):
    with pytest.raises(DataError):
        label_prediction(town, "SELECT nope FROM people", "SELECT 1")


def test_self_equivalence(db_root):
    queries = {
        "town_life": [c[1] for c in CASES],
        "department_management": [HEAD_GOLD] + [q for q in HEAD_BEAMS["SmBoP"]],
        "music_festival": [FESTIVAL_GOLD] + FESTIVAL_BEAMS["NatSQL"],
    }
    for db, qs in queries.items():
        path = db_path_for(db_root, db)
        for q in qs:
            assert label_prediction(path, q, q).label is Label.CORRECT, q


def test_example_beam_labels(db_root):
    head = db_path_for(db_root, "department_management")
    labels = [label_prediction(head, HEAD_GOLD, p).label for p in HEAD_BEAMS["NatSQL"]]
    assert labels[0] is Label.CORRECT
    assert all(lab is Label.WRONG for lab in labels[1:])
    assert label_prediction(head, HEAD_GOLD, UNGRAMMATICAL).label is Label.UNEXECUTABLE
    fest = db_path_for(db_root, "music_festival")
    got = [label_prediction(fest, FESTIVAL_GOLD, p).label for p in FESTIVAL_BEAMS["RESDSQL"]]
    assert got == [Label.CORRECT, Label.WRONG, Label.CORRECT]


def test_compare_results_modes():
    g = ExecResult.from_rows([(1, "a"), (2, "b")], 2)
    p = ExecResult.from_rows([(2, "a"), (1, "b")], 2)
    assert compare_results(g, p, order_sensitive=False)
    assert not row_paired_equal(g, p)
    assert not compare_results(g, p, order_sensitive=True)
    assert compare_results(g, ExecResult.from_rows([(2, "b"), (1, "a")], 2), False, tie_groups=None)
    swapped = ExecResult.from_rows([(2, "b"), (1, "a")], 2)
    assert compare_results(g, swapped, True, tie_groups=[2])
    assert not compare_results(g, swapped, True, tie_groups=[1, 1])
    assert compare_results(ExecResult.from_rows([(1.0,)], 1), ExecResult.from_rows([(1.0000001,)], 1), True)
    assert not compare_results(g, ExecResult.from_rows([(1,)], 1), False)


def test_label_cache(tmp_path):
    path = tmp_path / "cache.jsonl"
    cache = LabelCache(path)
    assert cache.get("db", "a", "b") is None
    cache.put("db", "a", "b", LabelResult(Label.WRONG, "execution"))
    again = LabelCache(path)
    assert again.get("db", "a", "b") == LabelResult(Label.WRONG, "execution")
    assert again.get("db", "a", "c") is None


def _beam(db, gold, pred):
    return SimpleNamespace(db_id=db, gold_sql=gold, predictions=[SimpleNamespace(sql=pred)])


def test_evaluate_parser_ten_examples(db_root):
    general = [c for c in CASES if c[0] in ("identical", "case_spacing")]
    fix_cases = [c for c in CASES if c[0].split("_")[0] in ("utf8", "empty", "order", "limit")]
    beams = [_beam("town_life", c[1], c[2]) for c in fix_cases + general]
    assert len(beams) == 10
    out = evaluate_parser(beams, db_root)
    assert out["disagreement"] == 4
    assert out["accuracy"] == pytest.approx(sum(c[3] == "correct" for c in fix_cases + general) / 10)


def test_evaluate_parser_all_gold(db_root):
    # the invalid-UTF-8 cell would trip the naive side even for identical queries
    beams = [_beam("town_life", c[1], c[1]) for c in CASES if not c[0].startswith("utf8")]
    beams += [_beam("department_management", HEAD_GOLD, HEAD_GOLD)]
    out = evaluate_parser(beams, db_root)
    assert out["accuracy"] == 1.0 and out["disagreement"] == 0
