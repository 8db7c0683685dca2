"""Top-k ranking of query answers from subjective reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from reprank.chase import KBLike, as_reasoner
from reprank.preferences import SPO
from reprank.reports import RelevanceMeasure, Report, ReportStore, TrustMeasure
from reprank.syntax import CQ, Atom

BUCKETS = 10

# A histogram row: one mean per trust bucket, None where the bucket is empty.
Row = Sequence[Optional[float]]
CollapseFn = Callable[[Row], float]


@dataclass(frozen=True)
class RankedAnswer:
    atom: Atom
    score: float


def top_k(scored: Iterable[RankedAnswer], k: int) -> list[RankedAnswer]:
    """Highest scores first; ties broken by the atom's text form."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return sorted(scored, key=lambda r: (-r.score, str(r.atom)))[:k]


def bucket_of(trust: float) -> int:
    """Index of the bucket ``[j/10, (j+1)/10)`` holding ``trust``; 1.0 goes in the last."""
    if not 0.0 <= trust <= 1.0:
        raise ValueError(f"trust value outside [0,1]: {trust}")
    # Round first so 0.30000000000000004 * 10 lands in bucket 3, not 2.
    return min(BUCKETS - 1, math.floor(round(trust * BUCKETS, 9)))


@dataclass
class Histogram:
    """Per-feature trust histograms holding the running mean of inserted scores."""

    n: int
    sums: list[list[float]] = field(init=False)
    counts: list[list[int]] = field(init=False)

    def __post_init__(self) -> None:
        self.sums = [[0.0] * BUCKETS for _ in range(self.n)]
        self.counts = [[0] * BUCKETS for _ in range(self.n)]

    def insert(self, feature: int, trust: float, value: float) -> None:
        b = bucket_of(trust)
        self.sums[feature][b] += value
        self.counts[feature][b] += 1

    def row(self, feature: int) -> list[Optional[float]]:
        return [
            s / c if c else None
            for s, c in zip(self.sums[feature], self.counts[feature])
        ]


def collapse_drop_lowest(row: Row) -> float:
    """Mean of nonempty buckets, ignoring the lowest-trust one when two or more are filled."""
    filled = [m for m in row if m is not None]
    if not filled:
        return 0.0
    if len(filled) > 1:
        filled = filled[1:]
    return sum(filled) / len(filled)


def collapse_mean10(row: Row) -> float:
    return sum(m for m in row if m is not None) / BUCKETS


def make_weighted_collapse(weights: Sequence[float]) -> CollapseFn:
    weights = [float(w) for w in weights]
    if len(weights) != BUCKETS or not all(0.0 <= w <= 1.0 for w in weights):
        raise ValueError(f"weighted collapse needs {BUCKETS} weights in [0,1]")

    def collapse_weighted(row: Row) -> float:
        return sum(w * m for w, m in zip(weights, row) if m is not None) / BUCKETS

    return collapse_weighted


def make_skip_collapse(skip: int) -> CollapseFn:
    if not 0 <= skip <= BUCKETS:
        raise ValueError(f"skip must be between 0 and {BUCKETS}")

    def collapse_skip(row: Row) -> float:
        filled = [m for m in row[skip:] if m is not None]
        return sum(filled) / len(filled) if filled else 0.0

    return collapse_skip


def make_collapse(
    name: str, weights: Optional[Sequence[float]] = None, skip: Optional[int] = None
) -> CollapseFn:
    if name == "drop-lowest":
        return collapse_drop_lowest
    if name == "mean10":
        return collapse_mean10
    if name == "weighted":
        if weights is None:
            raise ValueError("weighted collapse needs --weights")
        return make_weighted_collapse(weights)
    if name == "skip-k":
        return make_skip_collapse(0 if skip is None else skip)
    raise ValueError(f"unknown collapse function {name!r}")


COLLAPSE_NAMES = ("drop-lowest", "mean10", "weighted", "skip-k")


def summarize_reports(
    trust: TrustMeasure,
    reports: Sequence[Report],
    collapse: CollapseFn,
    n_features: Optional[int] = None,
    weights: Optional[Sequence[float]] = None,
) -> tuple[float, ...]:
    """Bucket every score by its trust value, then collapse each feature's histogram.

    Absent scores are not inserted. ``weights`` scales each report's scores
    before insertion.
    """
    if n_features is None:
        if not reports:
            raise ValueError("n_features is required for an empty report set")
        n_features = len(reports[0].features)
    hist = Histogram(n_features)
    for j, report in enumerate(reports):
        w = 1.0 if weights is None else weights[j]
        trusts = trust(report)
        for i, value in enumerate(report.scores):
            if value is not None:
                hist.insert(i, trusts[i], w * value)
    return tuple(collapse(hist.row(i)) for i in range(n_features))


def basic_score(
    reports: Sequence[Report],
    user_spo: SPO,
    trust: TrustMeasure,
    relevance: RelevanceMeasure,
    weights: Optional[Sequence[float]] = None,
) -> float:
    """Average over reports of relevance times the trust- and rank-weighted mean score."""
    if not reports:
        return 0.0
    total = 0.0
    for j, report in enumerate(reports):
        trusts = trust(report)
        terms = [
            value * trusts[i] / user_spo.rank(f)
            for i, (f, value) in enumerate(zip(report.features, report.scores))
            if value is not None
        ]
        if terms:
            w = 1.0 if weights is None else weights[j]
            total += w * relevance(report, user_spo) * sum(terms) / len(terms)
    return total / len(reports)


def hist_score(
    reports: Sequence[Report],
    features: Sequence[str],
    user_spo: SPO,
    trust: TrustMeasure,
    relevance: RelevanceMeasure,
    rel_thresh: float,
    collapse: CollapseFn,
    weights: Optional[Sequence[float]] = None,
) -> float:
    keep = [j for j, r in enumerate(reports) if relevance(r, user_spo) >= rel_thresh]
    scores = summarize_reports(
        trust,
        [reports[j] for j in keep],
        collapse,
        n_features=len(features),
        weights=None if weights is None else [weights[j] for j in keep],
    )
    return sum(s / user_spo.rank(f) for s, f in zip(scores, features))


def _answers(kb: KBLike, query: CQ, features: Optional[Sequence[str]]):
    if not query.is_simple():
        raise ValueError(f"ranking needs a simple query, got {query}")
    reasoner = as_reasoner(kb)
    atoms = sorted(reasoner.answers_in_atom_form(query), key=str)
    if features is None:
        features = reasoner.kb.features_of(query.distinguished.predicate)
    return atoms, tuple(features)


def rep_rank_basic(
    kb: KBLike,
    query: CQ,
    features: Optional[Sequence[str]],
    user_spo: SPO,
    trust: TrustMeasure,
    relevance: RelevanceMeasure,
    store: ReportStore,
    k: int,
) -> list[RankedAnswer]:
    """Top-k answers scored by the relevance-weighted average of trust-adjusted reports.

    Answers without reports score 0.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    atoms, _ = _answers(kb, query, features)
    ranked = [
        RankedAnswer(a, basic_score(store.reports_for(a), user_spo, trust, relevance))
        for a in atoms
    ]
    return top_k(ranked, k)


def rep_rank_hist(
    kb: KBLike,
    query: CQ,
    features: Optional[Sequence[str]],
    user_spo: SPO,
    trust: TrustMeasure,
    relevance: RelevanceMeasure,
    rel_thresh: float,
    collapse: CollapseFn,
    store: ReportStore,
    k: int,
) -> list[RankedAnswer]:
    """Top-k answers from histogram summaries of the sufficiently relevant reports."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 <= rel_thresh <= 1.0:
        raise ValueError("relevance threshold must lie in [0,1]")
    atoms, feats = _answers(kb, query, features)
    ranked = [
        RankedAnswer(
            a,
            hist_score(store.reports_for(a), feats, user_spo, trust, relevance, rel_thresh, collapse),
        )
        for a in atoms
    ]
    return top_k(ranked, k)
