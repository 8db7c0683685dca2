import json

import pytest

from reprank.parser import parse_atom
from reprank.preferences import validate_spo
from reprank.reports import (
    Report,
    ReportError,
    load_reports,
    load_user_spo,
    parse_json_entries,
    relevance_rank_distance,
    relevance_sim,
    report_from_json,
    trust_rank_exponential,
)

F = ("loc", "cl", "pri", "br", "net")


def test_store_attaches_three_reports_each(store, reasoner):
    h1 = parse_atom("hotel(h1)", reasoner.kb.schema)
    h2 = parse_atom("hotel(h2)", reasoner.kb.schema)
    assert [r.id for r in store.reports_for(h1)] == ["r1", "r2", "r3"]
    assert [r.id for r in store.reports_for(h2)] == ["r4", "r5", "r6"]
    assert store.reports_for(parse_atom("hotel(a2)", reasoner.kb.schema)) == []
    assert len(store) == 6


def test_trust_r1(store):
    assert trust_rank_exponential(store.reports["r1"]) == (1, 0.5, 0.25, 0.25, 1)


def test_trust_non_italian_quartered(store):
    assert trust_rank_exponential(store.reports["r3"]) == (0.0625, 0.03125, 0.25, 0.25, 0.125)


def test_relevance(store, user_spo):
    assert relevance_rank_distance(store.reports["r1"], user_spo) == 0.125
    assert relevance_rank_distance(store.reports["r2"], user_spo) == 0.5


def test_relevance_sim_range(store, user_spo):
    for r in store.reports.values():
        assert 0.0 <= relevance_sim(r, user_spo) <= 1.0


def test_missing_nationality_is_discounted():
    spo = validate_spo([], F)
    r = Report("x", F, (1, 1, 1, 1, 1), spo, {})
    assert trust_rank_exponential(r) == (0.25,) * 5


def entry(**kw):
    base = {"id": "x", "atom": "hotel(h1)", "scores": dict(zip(F, (1, 0, None, 0.5, 1))), "prefers": []}
    base.update(kw)
    return base


def test_absent_scores(reasoner):
    store = load_reports([entry()], reasoner)
    assert store.reports["x"].scores == (1.0, 0.0, None, 0.5, 1.0)


@pytest.mark.parametrize(
    "bad",
    [
        {"atom": "hotel(h9)"},
        {"atom": "castle(h1)"},
        {"atom": "hotel(X)"},
        {"scores": {"loc": 1}},
        {"scores": dict(zip(F, (2, 0, 0, 0, 0)))},
        {"scores": dict(zip(F, ("high", 0, 0, 0, 0)))},
        {"prefers": [["loc", "cl"], ["cl", "loc"]]},
        {"prefers": [["loc", "wifi"]]},
        {"register": [1, 2]},
    ],
)
def test_rejects_bad_entries(reasoner, bad):
    with pytest.raises(ReportError):
        load_reports([entry(**bad)], reasoner)


def test_duplicate_ids(reasoner):
    with pytest.raises(ReportError, match="duplicate"):
        load_reports([entry(), entry()], reasoner)


def test_json_containers():
    assert parse_json_entries("") == []
    assert parse_json_entries('{"reports": [{"id": "a"}]}') == [{"id": "a"}]
    with pytest.raises(ReportError):
        parse_json_entries("{nope")
    with pytest.raises(ReportError):
        parse_json_entries("[1, 2]")


def test_user_spo_bare_list(tmp_path):
    path = tmp_path / "u.json"
    path.write_text(json.dumps([["loc", "pri"]]))
    assert load_user_spo(path, F).ranks() == (1, 1, 2, 1, 1)


def test_report_validates_lengths():
    with pytest.raises(ReportError):
        report_from_json({"id": "y", "scores": {"a": 1}}, ("a", "b"))
