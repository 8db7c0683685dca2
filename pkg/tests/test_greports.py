import random

import pytest
from oracles import random_greport_context
from hypothesis import given, settings, strategies as st

from reprank.chase import Reasoner
from reprank.greports import (
    GOrder,
    GReport,
    GReportIndex,
    HierarchyError,
    HierarchySet,
    compare,
    contributions,
    is_a,
    load_greports,
    particularize,
    rank_with_greports,
    specialize,
    specificity_order,
    validate_hierarchical,
    weight_rank_exponential,
    weights_rank_exponential,
)
from reprank.parser import parse_atom, parse_program, parse_query
from reprank.preferences import validate_spo
from reprank.ranking import basic_score, collapse_drop_lowest, rep_rank_basic, rep_rank_hist
from reprank.reports import Report, ReportError, relevance_rank_distance, trust_rank_exponential

F = ("loc", "cl", "pri", "br", "net")
HIER = ["s1", "s2", "s3", "s4"]


@pytest.fixture
def greports(greport_kb, fixtures_dir):
    return {g.id: g for g in load_greports(fixtures_dir / "greports.json", greport_kb)}


@pytest.fixture
def index(greport_kb):
    return GReportIndex(Reasoner(greport_kb), validate_hierarchical(HIER, greport_kb))


def test_running_hierarchy_valid(running_kb):
    hs = validate_hierarchical(HIER, running_kb)
    assert [r.name for r in hs.rules] == HIER
    assert validate_hierarchical([], running_kb).rules == ()


@pytest.mark.parametrize(
    "program, rules, fragment",
    [
        ("@pred hotel/1 features(a, b). @pred accom/1 features(a). s: hotel(H) -> accom(H).",
         ["s"], "features"),
        ("@pred p/2. @pred q/1. @pred r/1. s: p(X, Y), q(X) -> r(X).", ["s"], "not linear"),
        ("@pred p/1. @pred q/1. @pred r/1. s: p(X) -> q(X). t: p(Y) -> r(Y).", ["s", "t"], "overlapping"),
        ("@pred p/1. @pred q/1. s: p(X) -> q(X).", ["nope"], "no TGD"),
    ],
)
def test_hierarchy_errors(program, rules, fragment):
    with pytest.raises(HierarchyError, match=fragment):
        validate_hierarchical(rules, parse_program(program))


def test_bodies_with_distinct_constants_do_not_overlap():
    kb = parse_program("@pred p/2. @pred q/1. s: p(X, a) -> q(X). t: p(X, b) -> q(X).")
    assert len(validate_hierarchical(["s", "t"], kb).rules) == 2


def test_is_a(running_kb):
    hs = validate_hierarchical(HIER, running_kb)
    atom = lambda s: parse_atom(s, running_kb.schema)  # noqa: E731
    assert is_a(atom("apthotel(a2)"), atom("hotel(a2)"), hs)
    assert is_a(atom("apthotel(a2)"), atom("accom(a2)"), hs)
    assert is_a(atom("hotel(h1)"), atom("hotel(h1)"), hs)
    assert not is_a(atom("hotel(h1)"), atom("apartment(h1)"), hs)
    assert not is_a(atom("hotel(a2)"), atom("apthotel(a2)"), hs)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.data())
def test_is_a_chain_reflexive_transitive(depth, data):
    preds = [f"c{i}" for i in range(depth + 1)]
    decls = " ".join(f"@pred {p}/1." for p in preds)
    rules = " ".join(f"r{i}: {preds[i]}(X) -> {preds[i + 1]}(X)." for i in range(depth))
    kb = parse_program(decls + " " + rules)
    hs = validate_hierarchical([f"r{i}" for i in range(depth)], kb)
    i, j = sorted(data.draw(st.lists(st.integers(0, depth), min_size=2, max_size=2)))
    a, b = parse_atom(f"{preds[i]}(k)"), parse_atom(f"{preds[j]}(k)")
    assert is_a(a, a, hs)
    assert is_a(a, b, hs)
    assert is_a(b, a, hs) == (i == j)


def test_particularize():
    e1 = (1, 0, 0.4, 0.1, 1)
    f2 = F + ("kfac",)
    assert particularize(e1, F, f2) == (1, 0, 0.4, 0.1, 1, None)
    assert particularize(e1, F, F) == e1
    assert particularize((None,) * 5, F, f2) == (None,) * 6


SPEC_KB = """
@pred hotel/1 features(loc, cl, pri, br, net).
@pred apthotel/1 features(loc, cl, pri, br, net, kfac).
@pred locatedIn/2.
s4: apthotel(A) -> hotel(A).
s8: locatedIn(X, oxfordCenter) -> locatedIn(X, oxford).
hotel(h1). locatedIn(h1, oxford). apthotel(a2). locatedIn(a2, oxfordCenter).
"""


def test_specialization_pads_new_feature(store):
    kb = parse_program(SPEC_KB)
    # apthotel has more features than hotel, so s4 is used as an is-a rule
    # directly rather than through the feature-subset check.
    hs = HierarchySet((kb.tgd("s4"),), dict(kb.schema))
    gr = GReport(store.reports["r1"], parse_query("hotel(X) & locatedIn(X, oxford)", kb.schema))
    spec = specialize(gr, parse_atom("apthotel(a2)", kb.schema), kb, hs)
    assert spec is not None
    assert spec.report.scores == (1, 0, 0.4, 0.1, 1, None)
    assert spec.report.features == F + ("kfac",)
    assert spec.report.spo.rank("kfac") == 1
    assert spec.report.register == store.reports["r1"].register


def test_self_and_failed_specialization(greport_kb, greports, index):
    gr1 = greports["gr1"]
    spec = index.specialize(gr1, parse_atom("hotel(h1)", greport_kb.schema))
    assert spec.report is gr1.report
    assert index.specialize(gr1, parse_atom("hotel(h3)", greport_kb.schema)) is None
    with pytest.raises(ValueError):
        specialize(gr1, parse_atom("hotel(hs1)", greport_kb.schema), greport_kb, index.hs)


def test_example_order(greports, index):
    g = greports
    assert index.compare(g["gr1"], g["gr4"]) is GOrder.MORE_GENERAL
    assert index.compare(g["gr4"], g["gr1"]) is GOrder.LESS_GENERAL
    assert index.compare(g["gr1"], g["gr3"]) is GOrder.MORE_GENERAL
    assert index.compare(g["gr1"], g["gr2"]) is GOrder.INCOMPARABLE
    assert index.compare(g["gr1"], g["gr1"]) is GOrder.EQUIVALENT


def test_gr3_needs_is_a(greport_kb, greports):
    # Without the hierarchy, apthotel(a2) is not an answer atom of gr1.
    assert compare(greports["gr1"], greports["gr3"], greport_kb,
                   HierarchySet((), dict(greport_kb.schema))) is GOrder.INCOMPARABLE


def test_weights_in_example_context(greports, index):
    ctx = [greports["gr1"], greports["gr4"], greports["gr3"]]
    assert [weight_rank_exponential(g, ctx, index) for g in ctx] == [0.25, 0.5, 1.0]
    assert weight_rank_exponential(greports["gr2"], [greports["gr2"]], index) == 1.0


def test_weighting_conditions_random_contexts():
    rng = random.Random(7)
    for _ in range(200):
        kb, ctx = random_greport_context(rng)
        index = GReportIndex(kb, validate_hierarchical(["s"], kb))
        w = weights_rank_exponential(specificity_order(ctx, index))
        for i, a in enumerate(ctx):
            for j, b in enumerate(ctx):
                rel = index.compare(a, b)
                if rel is GOrder.LESS_GENERAL:
                    assert w[i] > w[j]
                if rel is GOrder.EQUIVALENT:
                    assert w[i] == w[j]
                assert 0.0 < w[i] <= 1.0


def test_compare_is_consistent_and_transitive():
    rng = random.Random(11)
    for _ in range(50):
        kb, ctx = random_greport_context(rng)
        index = GReportIndex(kb, validate_hierarchical(["s"], kb))
        le = {(i, j): index.covers(b, a) for i, a in enumerate(ctx) for j, b in enumerate(ctx)}
        n = len(ctx)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if le[i, j] and le[j, k]:
                        assert le[i, k]


def test_plain_reports_reduce_to_basic(reasoner, store, user_spo):
    q = parse_query("hotel(X)", reasoner.kb.schema)
    args = (user_spo, trust_rank_exponential, relevance_rank_distance)
    plain = rep_rank_basic(reasoner, q, None, *args, store, k=3)
    ext = rank_with_greports(reasoner, q, *args, [], 3, store=store)
    assert plain == ext
    plain = rep_rank_hist(reasoner, q, None, *args, 0.1, collapse_drop_lowest, store, k=3)
    ext = rank_with_greports(reasoner, q, *args, [], 3, store=store, algo="hist",
                             rel_thresh=0.1, collapse=collapse_drop_lowest)
    assert plain == ext


def test_specific_report_weighs_double(greport_kb, greports, index, user_spo):
    a2 = parse_atom("hotel(a2)", greport_kb.schema)
    reports, weights = contributions(a2, [greports["gr1"], greports["gr4"]], index)
    assert weights == [0.5, 1.0]
    r1, r4 = reports
    term = lambda r: basic_score([r], user_spo, trust_rank_exponential, relevance_rank_distance)  # noqa: E731
    expected = (0.5 * term(r1) + 1.0 * term(r4)) / 2
    q = parse_query("hotel(X)", greport_kb.schema)
    ranked = rank_with_greports(index.reasoner, q, user_spo, trust_rank_exponential,
                                relevance_rank_distance, [greports["gr1"], greports["gr4"]], 5,
                                hs=index.hs)
    got = {str(r.atom): r.score for r in ranked}
    assert got["hotel(a2)"] == pytest.approx(expected, abs=1e-12)


def test_descriptor_without_answers(greport_kb, index, store):
    desc = parse_query("hotel(X) & locatedIn(X, paris)", greport_kb.schema)
    gr = GReport(store.reports["r1"], desc)
    for name in ("h1", "h2", "h3", "a2"):
        assert index.specialize(gr, parse_atom(f"hotel({name})")) is None


def test_equivalent_greports_keep_order(greport_kb, index, store, user_spo):
    q = parse_query("hotel(X)", greport_kb.schema)
    desc = parse_query("hotel(X)", greport_kb.schema)
    grs = [GReport(store.reports[r], desc) for r in ("r1", "r2", "r3")]
    args = (user_spo, trust_rank_exponential, relevance_rank_distance)
    weighted = rank_with_greports(index.reasoner, q, *args, grs, 4, hs=index.hs)
    uniform = rank_with_greports(index.reasoner, q, *args, grs, 4, hs=index.hs, weighting="uniform")
    assert [r.atom for r in weighted] == [r.atom for r in uniform]


def test_load_greports_errors(greport_kb):
    base = {"id": "g", "scores": dict(zip(F, (1,) * 5))}
    with pytest.raises(ReportError, match="descriptor"):
        load_greports([base], greport_kb)
    with pytest.raises(ReportError, match="simple"):
        load_greports([{**base, "descriptor": "Q(X, Y) = hotel(X) & room(Y, X)"}], greport_kb)
    with pytest.raises(ReportError):
        load_greports([{**base, "descriptor": "castle(X)"}], greport_kb)
