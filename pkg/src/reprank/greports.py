"""Generalized reports: reports attached to every answer of a simple query.

A hierarchy set of linear rules gives an is-a relation between ground atoms.
G-reports are ordered by how general their descriptors are, and more
specific g-reports receive larger weights when ranking.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence, Union

from reprank.chase import KBLike, Reasoner, as_reasoner
from reprank.parser import ParseError, parse_query
from reprank.preferences import SPO, validate_spo
from reprank.ranking import CollapseFn, RankedAnswer, basic_score, hist_score, top_k
from reprank.reports import (
    RelevanceMeasure,
    Report,
    ReportError,
    ReportStore,
    Score,
    TrustMeasure,
    read_json_entries,
    report_from_json,
)
from reprank.syntax import CQ, TGD, Atom, Ontology, TGDClass, Variable, classify_tgd


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class GReport:
    """A report paired with a simple query; it applies to every answer of the query."""

    report: Report
    descriptor: CQ

    def __post_init__(self) -> None:
        if not self.descriptor.is_simple():
            raise ReportError(f"g-report {self.report.id}: descriptor is not a simple query")

    @property
    def id(self) -> str:
        return self.report.id

    @property
    def predicate(self) -> str:
        return self.descriptor.distinguished.predicate


@dataclass(frozen=True)
class Specialization:
    """A g-report narrowed to one atom, with scores moved onto that atom's features."""

    report: Report
    atom: Atom
    origin: GReport


@dataclass
class HierarchySet:
    """Linear is-a rules. Use :func:`validate_hierarchical` to build checked instances."""

    rules: tuple[TGD, ...]
    schema: Mapping[str, int]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def closure(self, atom: Atom) -> frozenset[Atom]:
        """Ground atoms in ``chase({atom}, rules)``."""
        hit = self._cache.get(atom)
        if hit is None:
            kb = Ontology(database=frozenset([atom]), tgds=self.rules, schema=self.schema)
            reasoner = Reasoner(kb)
            inst = reasoner.chase(reasoner.depth_for(1))
            hit = frozenset(a for a in inst if a.is_ground())
            self._cache[atom] = hit
        return hit


def validate_hierarchical(rules: Sequence[Union[TGD, str]], kb: Ontology) -> HierarchySet:
    """Check a subset of the KB's TGDs forms a hierarchical set.

    Each rule ``p(X) -> q(X, Y)`` must be linear with ``features(p)`` a subset
    of ``features(q)``. No two rules may have unifiable bodies, which is the
    syntactic stand-in for "no database gives both bodies a common instance".
    """
    picked: list[TGD] = []
    for r in rules:
        if isinstance(r, str):
            try:
                r = kb.tgd(r)
            except KeyError:
                raise HierarchyError(f"no TGD named {r!r} in the knowledge base") from None
        elif r not in kb.tgds:
            raise HierarchyError(f"rule {r} is not a TGD of the knowledge base")
        if classify_tgd(r) is not TGDClass.LINEAR:
            raise HierarchyError(f"rule {r.name} is not linear")
        p, q = r.body[0].predicate, r.head.predicate
        missing = set(kb.features_of(p)) - set(kb.features_of(q))
        if missing:
            raise HierarchyError(
                f"rule {r.name}: features of {p} not among features of {q}: {sorted(missing)}"
            )
        picked.append(r)
    for i, r1 in enumerate(picked):
        for r2 in picked[i + 1 :]:
            if r1 is not r2 and _bodies_overlap(r1.body[0], r2.body[0]):
                raise HierarchyError(f"rules {r1.name} and {r2.name} have overlapping bodies")
    return HierarchySet(tuple(dict.fromkeys(picked)), dict(kb.schema))


def _bodies_overlap(a: Atom, b: Atom) -> bool:
    # Rename apart, then try to unify argument lists.
    if a.predicate != b.predicate or a.arity != b.arity:
        return False
    parent: dict = {}

    def find(t):
        while t in parent:
            t = parent[t]
        return t

    for s, t in zip(a.args, b.args):
        s = find(("l", s) if isinstance(s, Variable) else s)
        t = find(("r", t) if isinstance(t, Variable) else t)
        if s == t:
            continue
        if isinstance(s, tuple):
            parent[s] = t
        elif isinstance(t, tuple):
            parent[t] = s
        else:
            return False
    return True


def is_a(a: Atom, b: Atom, hs: HierarchySet) -> bool:
    if not (a.is_ground() and b.is_ground()):
        raise ValueError("is-a is defined on ground atoms")
    return b in hs.closure(a)


def particularize(scores: Sequence[Score], source: Sequence[str], target: Sequence[str]) -> tuple[Score, ...]:
    """Scores over ``target``: copied where the feature exists in ``source``, absent elsewhere."""
    index = {f: i for i, f in enumerate(source)}
    return tuple(scores[index[f]] if f in index else None for f in target)


def _particularize_report(report: Report, target: Sequence[str]) -> Report:
    target = tuple(target)
    if target == report.features:
        return report
    spo = validate_spo(
        [(x, y) for x, y in report.spo.pairs if x in target and y in target], target
    )
    scores = particularize(report.scores, report.features, target)
    return Report(report.id, target, scores, spo, report.register)


class GReportIndex:
    """Answers of each descriptor over one knowledge base, computed once."""

    def __init__(self, kb: KBLike, hs: Optional[HierarchySet] = None):
        self.reasoner = as_reasoner(kb)
        self.hs = hs if hs is not None else HierarchySet((), dict(self.reasoner.kb.schema))
        self._answers: dict[CQ, frozenset[Atom]] = {}

    def answers(self, gr: GReport) -> frozenset[Atom]:
        hit = self._answers.get(gr.descriptor)
        if hit is None:
            hit = frozenset(self.reasoner.answers_in_atom_form(gr.descriptor))
            self._answers[gr.descriptor] = hit
        return hit

    def specialize(self, gr: GReport, atom: Atom) -> Optional[Specialization]:
        if not any(is_a(atom, b, self.hs) for b in sorted(self.answers(gr), key=str)):
            return None
        target = self.reasoner.kb.features_of(atom.predicate)
        return Specialization(_particularize_report(gr.report, target), atom, gr)

    def covers(self, general: GReport, specific: GReport) -> bool:
        """``specific`` ⊑ ``general``: answer inclusion, or every answer is-a some answer."""
        ans_s, ans_g = self.answers(specific), self.answers(general)
        if ans_s <= ans_g:
            return True
        return all(any(is_a(a, b, self.hs) for b in ans_g) for a in ans_s)

    def compare(self, gr1: GReport, gr2: GReport) -> "GOrder":
        """Position of ``gr1`` relative to ``gr2``."""
        up = self.covers(gr1, gr2)
        down = self.covers(gr2, gr1)
        if up and down:
            return GOrder.EQUIVALENT
        if up:
            return GOrder.MORE_GENERAL
        if down:
            return GOrder.LESS_GENERAL
        return GOrder.INCOMPARABLE


class GOrder(enum.Enum):
    MORE_GENERAL = "more-general"
    LESS_GENERAL = "less-general"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


def specialize(gr: GReport, atom: Atom, kb: KBLike, hs: HierarchySet) -> Optional[Specialization]:
    reasoner = as_reasoner(kb)
    if not reasoner.entails(atom):
        raise ValueError(f"atom {atom} is not entailed by the knowledge base")
    return GReportIndex(reasoner, hs).specialize(gr, atom)


def compare(gr1: GReport, gr2: GReport, kb: KBLike, hs: HierarchySet) -> GOrder:
    return GReportIndex(kb, hs).compare(gr1, gr2)


def specificity_order(context: Sequence[GReport], index: GReportIndex) -> SPO:
    """Order over context positions with more specific g-reports above more general ones."""
    n = len(context)
    covers = [[index.covers(context[j], context[i]) for j in range(n)] for i in range(n)]
    pairs = [
        (i, j) for i in range(n) for j in range(n)
        if i != j and covers[i][j] and not covers[j][i]
    ]
    return validate_spo(pairs, range(n))


def weights_rank_exponential(order: SPO) -> list[float]:
    return [2.0 ** -(order.rank(i) - 1) for i in order.universe]


def weight_rank_exponential(gr: GReport, context: Sequence[GReport], index: GReportIndex) -> float:
    """``2^-(rank-1)`` of ``gr`` in the specificity order over its context."""
    pos = next(i for i, c in enumerate(context) if c is gr)
    return weights_rank_exponential(specificity_order(context, index))[pos]


def weights_uniform(order: SPO) -> list[float]:
    return [1.0] * len(order.universe)


WEIGHTINGS: dict[str, Callable[[SPO], list[float]]] = {
    "rank-exp": weights_rank_exponential,
    "uniform": weights_uniform,
}


def contributions(
    atom: Atom,
    greports: Sequence[GReport],
    index: GReportIndex,
    weighting: Callable[[SPO], list[float]] = weights_rank_exponential,
) -> tuple[list[Report], list[float]]:
    """Specialized reports reaching ``atom`` together with their weights."""
    specs = [s for s in (index.specialize(gr, atom) for gr in greports) if s is not None]
    if not specs:
        return [], []
    weights = weighting(specificity_order([s.origin for s in specs], index))
    return [s.report for s in specs], weights


def rank_with_greports(
    kb: KBLike,
    query: CQ,
    user_spo: SPO,
    trust: TrustMeasure,
    relevance: RelevanceMeasure,
    greports: Sequence[GReport],
    k: int,
    hs: Optional[HierarchySet] = None,
    algo: str = "basic",
    store: Optional[ReportStore] = None,
    weighting: Union[str, Callable[[SPO], list[float]]] = "rank-exp",
    rel_thresh: float = 0.0,
    collapse: Optional[CollapseFn] = None,
    features: Optional[Sequence[str]] = None,
) -> list[RankedAnswer]:
    """Rank answers using plain reports (weight 1) and weighted g-report specializations."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if algo not in ("basic", "hist"):
        raise ValueError(f"unknown algorithm {algo!r}")
    if algo == "hist" and collapse is None:
        raise ValueError("the hist algorithm needs a collapse function")
    if not query.is_simple():
        raise ValueError(f"ranking needs a simple query, got {query}")
    if isinstance(weighting, str):
        weighting = WEIGHTINGS[weighting]
    index = GReportIndex(kb, hs)
    reasoner = index.reasoner
    feats = tuple(features) if features is not None else reasoner.kb.features_of(query.distinguished.predicate)
    store = store or ReportStore()
    ranked = []
    for atom in sorted(reasoner.answers_in_atom_form(query), key=str):
        plain = store.reports_for(atom)
        extra, w = contributions(atom, greports, index, weighting)
        reports = [*plain, *extra]
        weights = [1.0] * len(plain) + w
        if algo == "basic":
            score = basic_score(reports, user_spo, trust, relevance, weights)
        else:
            score = hist_score(reports, feats, user_spo, trust, relevance, rel_thresh, collapse, weights)
        ranked.append(RankedAnswer(atom, score))
    return top_k(ranked, k)


def load_greports(source: Union[str, Path, Sequence[Mapping[str, Any]]], kb: KBLike) -> list[GReport]:
    """G-reports from JSON objects carrying a ``descriptor`` query instead of an ``atom``."""
    reasoner = as_reasoner(kb)
    entries = source if isinstance(source, (list, tuple)) else read_json_entries(source)
    out: list[GReport] = []
    seen: set[str] = set()
    for entry in entries:
        text = entry.get("descriptor")
        if not isinstance(text, str):
            raise ReportError(f"g-report {entry.get('id')!r}: missing 'descriptor'")
        try:
            descriptor = parse_query(text, reasoner.kb.schema)
        except ParseError as exc:
            raise ReportError(f"g-report {entry.get('id')!r}: bad descriptor: {exc}") from None
        if not descriptor.is_simple():
            raise ReportError(f"g-report {entry.get('id')!r}: descriptor is not a simple query")
        report = report_from_json(entry, reasoner.kb.features_of(descriptor.distinguished.predicate))
        if report.id in seen:
            raise ReportError(f"duplicate report id {report.id}")
        seen.add(report.id)
        out.append(GReport(report, descriptor))
    return out
