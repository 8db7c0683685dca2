"""Subjective reports, their attachment to atoms, and trust/relevance measures."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence, Union

from reprank.chase import KBLike, as_reasoner
from reprank.parser import ParseError, parse_atom
from reprank.preferences import SPO, CycleError, UnknownFeatureError, sim, validate_spo
from reprank.syntax import Atom

# An absent score ("-") is represented by None.
Score = Optional[float]


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class Report:
    """A report ``(E, P, I)``: per-feature scores, the author's order, a register."""

    id: str
    features: tuple[str, ...]
    scores: tuple[Score, ...]
    spo: SPO
    register: Mapping[str, Union[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.scores) != len(self.features):
            raise ReportError(
                f"report {self.id}: {len(self.scores)} scores for {len(self.features)} features"
            )
        if tuple(self.spo.universe) != tuple(self.features):
            raise ReportError(f"report {self.id}: preference universe differs from features")
        for f, s in zip(self.features, self.scores):
            if s is not None and not (0.0 <= s <= 1.0):
                raise ReportError(f"report {self.id}: score for {f} is outside [0,1]: {s}")

    def score(self, feature: str) -> Score:
        return self.scores[self.features.index(feature)]


TrustMeasure = Callable[[Report], tuple[float, ...]]
RelevanceMeasure = Callable[[Report, SPO], float]


def trust_rank_exponential(report: Report) -> tuple[float, ...]:
    """``2^-(rank-1)`` per feature, quartered unless the author is Italian.

    A register without ``nationality`` counts as non-Italian.
    """
    factor = 1.0 if report.register.get("nationality") == "Italian" else 0.25
    return tuple(factor * 2.0 ** -(report.spo.rank(f) - 1) for f in report.features)


def relevance_rank_distance(report: Report, user_spo: SPO) -> float:
    """``2^-sum |rank_P(f) - rank_U(f)|`` over the report's features."""
    distance = sum(abs(report.spo.rank(f) - user_spo.rank(f)) for f in report.features)
    return 2.0 ** -distance


def relevance_sim(report: Report, user_spo: SPO) -> float:
    return sim(report.spo, user_spo)


TRUST_MEASURES: dict[str, TrustMeasure] = {"rank-exp": trust_rank_exponential}
RELEVANCE_MEASURES: dict[str, RelevanceMeasure] = {
    "rank-dist": relevance_rank_distance,
    "sim": relevance_sim,
}


@dataclass(frozen=True)
class ReportStore:
    reports: Mapping[str, Report] = field(default_factory=dict)
    by_atom: Mapping[Atom, tuple[str, ...]] = field(default_factory=dict)

    def reports_for(self, atom: Atom) -> list[Report]:
        return [self.reports[i] for i in self.by_atom.get(atom, ())]

    def __len__(self) -> int:
        return len(self.reports)


def _number(value: Any, what: str) -> Score:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ReportError(f"{what} must be a number or null, got {value!r}")
    value = float(value)
    if math.isnan(value) or not (0.0 <= value <= 1.0):
        raise ReportError(f"{what} is outside [0,1]: {value}")
    return value


def report_from_json(entry: Mapping[str, Any], features: Sequence[str]) -> Report:
    """Build a report from one JSON object, scoring the given feature tuple."""
    rid = str(entry.get("id", ""))
    if not rid:
        raise ReportError("report without an id")
    scores = entry.get("scores")
    if not isinstance(scores, Mapping):
        raise ReportError(f"report {rid}: 'scores' must be an object")
    if set(scores) != set(features):
        missing = sorted(set(features) - set(scores))
        extra = sorted(set(scores) - set(features))
        raise ReportError(
            f"report {rid}: feature mismatch (missing {missing}, unexpected {extra})"
        )
    values = tuple(_number(scores[f], f"report {rid}: score for {f}") for f in features)
    try:
        spo = validate_spo([tuple(p) for p in entry.get("prefers", [])], features)
    except (CycleError, UnknownFeatureError, ValueError, TypeError) as exc:
        raise ReportError(f"report {rid}: invalid preferences: {exc}") from None
    register = entry.get("register", {})
    if not isinstance(register, Mapping):
        raise ReportError(f"report {rid}: 'register' must be an object")
    return Report(rid, tuple(features), values, spo, dict(register))


def read_json_entries(source: Union[str, Path]) -> list[Mapping[str, Any]]:
    """JSON array of report objects from a path; an empty file yields no entries."""
    text = Path(source).read_text(encoding="utf-8")
    return parse_json_entries(text)


def parse_json_entries(text: str) -> list[Mapping[str, Any]]:
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid JSON: {exc}") from None
    if isinstance(data, Mapping):
        data = data.get("reports", [])
    if not isinstance(data, list) or not all(isinstance(e, Mapping) for e in data):
        raise ReportError("expected a JSON array of report objects")
    return data


def load_reports(source: Union[str, Path, Sequence[Mapping[str, Any]]], kb: KBLike) -> ReportStore:
    """Load reports attached to ground atoms and check each atom is entailed."""
    reasoner = as_reasoner(kb)
    entries = source if isinstance(source, (list, tuple)) else read_json_entries(source)
    reports: dict[str, Report] = {}
    by_atom: dict[Atom, list[str]] = {}
    for entry in entries:
        text = entry.get("atom")
        if not isinstance(text, str):
            raise ReportError(f"report {entry.get('id')!r}: missing 'atom'")
        try:
            atom = parse_atom(text, reasoner.kb.schema)
        except ParseError as exc:
            raise ReportError(f"report {entry.get('id')!r}: unknown atom {text!r}: {exc}") from None
        if not atom.is_ground():
            raise ReportError(f"report {entry.get('id')!r}: atom {atom} is not ground")
        report = report_from_json(entry, reasoner.kb.features_of(atom.predicate))
        if report.id in reports:
            raise ReportError(f"duplicate report id {report.id}")
        if not reasoner.entails(atom):
            raise ReportError(f"report {report.id}: atom {atom} is not entailed by the knowledge base")
        reports[report.id] = report
        by_atom.setdefault(atom, []).append(report.id)
    return ReportStore(reports, {a: tuple(ids) for a, ids in by_atom.items()})


def load_user_spo(source: Union[str, Path], features: Sequence[str]) -> SPO:
    """User preferences from JSON: ``{"prefers": [[a, b], ...]}`` or a bare list."""
    text = Path(source).read_text(encoding="utf-8")
    data = json.loads(text) if text.strip() else []
    if isinstance(data, Mapping):
        data = data.get("prefers", [])
    return validate_spo([tuple(p) for p in data], features)
