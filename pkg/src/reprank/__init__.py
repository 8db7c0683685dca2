"""Ontology-based top-k ranking of query answers from subjective reports."""

from reprank.chase import Reasoner, answer_cq, answers_in_atom_form, check_consistency, entails
from reprank.parser import parse_atom, parse_program, parse_query
from reprank.preferences import SPO, sim, validate_spo
from reprank.ranking import make_collapse, rep_rank_basic, rep_rank_hist, summarize_reports
from reprank.reports import (
    ReportStore,
    load_reports,
    load_user_spo,
    relevance_rank_distance,
    trust_rank_exponential,
)

__all__ = [
    "Reasoner",
    "SPO",
    "ReportStore",
    "answer_cq",
    "answers_in_atom_form",
    "check_consistency",
    "entails",
    "load_reports",
    "load_user_spo",
    "make_collapse",
    "parse_atom",
    "parse_program",
    "parse_query",
    "relevance_rank_distance",
    "rep_rank_basic",
    "rep_rank_hist",
    "sim",
    "summarize_reports",
    "trust_rank_exponential",
    "validate_spo",
]
