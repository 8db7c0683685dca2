"""Command-line entry point: ``reprank {check,query,rank,compare-greports,dump-chase}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Optional, Sequence

from reprank.chase import (
    InconsistentKBError,
    Reasoner,
    UnsupportedTGDError,
    format_instance,
)
from reprank.greports import (
    WEIGHTINGS,
    GReportIndex,
    HierarchyError,
    HierarchySet,
    load_greports,
    rank_with_greports,
    validate_hierarchical,
)
from reprank.parser import ParseError, parse_program, parse_query
from reprank.preferences import CycleError, UnknownFeatureError, validate_spo
from reprank.ranking import COLLAPSE_NAMES, make_collapse, rep_rank_basic, rep_rank_hist
from reprank.reports import (
    RELEVANCE_MEASURES,
    TRUST_MEASURES,
    ReportError,
    ReportStore,
    load_reports,
    load_user_spo,
)
from reprank.syntax import TGDClass, classify_tgd

EXIT_OK, EXIT_INCONSISTENT, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (
    ParseError,
    ReportError,
    HierarchyError,
    UnsupportedTGDError,
    CycleError,
    UnknownFeatureError,
    ValueError,
    OSError,
)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything ``rank`` needs; built from the command line by :func:`config_from_args`."""

    kb: Path
    query: str
    user_spo: Optional[Path] = None
    reports: Optional[Path] = None
    greports: Optional[Path] = None
    algo: str = "basic"
    trust: str = "rank-exp"
    relevance: str = "rank-dist"
    k: int = 10
    rel_threshold: float = 0.0
    collapse: Optional[str] = None
    weights: Optional[list[float]] = None
    skip: Optional[int] = None
    hierarchy: list[str] = field(default_factory=list)
    weighting: str = "rank-exp"
    output: str = "text"
    depth_constant: Optional[int] = None

    def validate(self) -> None:
        if self.k < 1:
            raise UsageError("--k must be at least 1")
        if not 0.0 <= self.rel_threshold <= 1.0:
            raise UsageError("--rel-threshold must lie in [0,1]")
        if self.algo == "basic":
            if self.collapse is not None:
                raise UsageError("--collapse applies only to --algo hist")
            if self.rel_threshold != 0.0:
                raise UsageError("--rel-threshold applies only to --algo hist")
        if self.weights is not None and self.collapse != "weighted":
            raise UsageError("--weights needs --collapse weighted")
        if self.skip is not None and self.collapse != "skip-k":
            raise UsageError("--skip needs --collapse skip-k")
        if self.hierarchy and self.greports is None:
            raise UsageError("--hierarchy needs --greports")
        if self.reports is None and self.greports is None:
            raise UsageError("rank needs --reports or --greports")
        if self.depth_constant is not None and self.depth_constant < 1:
            raise UsageError("--depth-constant must be positive")


def format_score(score: float) -> str:
    return str(Decimal(repr(score)).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def _load_kb(path: Path, depth_constant: Optional[int] = None) -> Reasoner:
    return Reasoner(parse_program(Path(path).read_text(encoding="utf-8")), depth_constant)


def cmd_check(args: argparse.Namespace) -> int:
    reasoner = _load_kb(args.kb, args.depth_constant)
    kb = reasoner.kb
    counts = {c: 0 for c in TGDClass}
    for t in kb.tgds:
        counts[classify_tgd(t)] += 1
    print(
        f"tgds: {len(kb.tgds)} (linear {counts[TGDClass.LINEAR]}, "
        f"guarded {counts[TGDClass.GUARDED]}, other {counts[TGDClass.NEITHER]})"
    )
    print(f"negative constraints: {len(kb.ncs)}, egds: {len(kb.egds)}")
    if counts[TGDClass.NEITHER]:
        print("unsupported: rules outside the guarded fragment")
        return EXIT_INPUT
    result = reasoner.consistency()
    print(result.describe())
    return EXIT_OK if result.consistent else EXIT_INCONSISTENT


def cmd_query(args: argparse.Namespace) -> int:
    reasoner = _load_kb(args.kb, args.depth_constant)
    query = parse_query(args.query, reasoner.kb.schema)
    answers = reasoner.answer(query)
    if args.dump_chase:
        print(format_instance(reasoner.chase(reasoner.depth_for(len(query.atoms)))))
    if not query.free:
        print("yes" if answers else "no")
    elif args.atoms:
        for atom in sorted(reasoner.answers_in_atom_form(query), key=str):
            print(atom)
    else:
        for tup in sorted(answers, key=lambda t: tuple(c.sort_key() for c in t)):
            print("\t".join(str(c) for c in tup))
    return EXIT_OK


def cmd_dump_chase(args: argparse.Namespace) -> int:
    reasoner = _load_kb(args.kb, args.depth_constant)
    level = args.level if args.level is not None else reasoner.depth_for(1)
    print(format_instance(reasoner.chase(level)))
    return EXIT_OK


def _hierarchy(names: Sequence[str], reasoner: Reasoner) -> Optional[HierarchySet]:
    return validate_hierarchical(list(names), reasoner.kb) if names else None


def run_rank(cfg: RunConfig) -> list[tuple[int, str, float]]:
    cfg.validate()
    reasoner = _load_kb(cfg.kb, cfg.depth_constant)
    query = parse_query(cfg.query, reasoner.kb.schema)
    if not query.is_simple():
        raise UsageError(f"ranking needs a simple query, got {query}")
    features = reasoner.kb.features_of(query.distinguished.predicate)
    if not features:
        raise UsageError(f"predicate {query.distinguished.predicate} declares no features")
    user_spo = load_user_spo(cfg.user_spo, features) if cfg.user_spo else validate_spo([], features)
    trust = TRUST_MEASURES[cfg.trust]
    relevance = RELEVANCE_MEASURES[cfg.relevance]
    store = load_reports(cfg.reports, reasoner) if cfg.reports else ReportStore()
    collapse = None
    if cfg.algo == "hist":
        collapse = make_collapse(cfg.collapse or "drop-lowest", cfg.weights, cfg.skip)
    if cfg.greports is not None:
        greports = load_greports(cfg.greports, reasoner)
        ranked = rank_with_greports(
            reasoner, query, user_spo, trust, relevance, greports, cfg.k,
            hs=_hierarchy(cfg.hierarchy, reasoner), algo=cfg.algo, store=store,
            weighting=cfg.weighting, rel_thresh=cfg.rel_threshold, collapse=collapse,
        )
    elif cfg.algo == "basic":
        ranked = rep_rank_basic(reasoner, query, None, user_spo, trust, relevance, store, cfg.k)
    else:
        ranked = rep_rank_hist(
            reasoner, query, None, user_spo, trust, relevance, cfg.rel_threshold, collapse, store, cfg.k
        )
    return [(i, str(r.atom), r.score) for i, r in enumerate(ranked, start=1)]


def config_from_args(args: argparse.Namespace) -> RunConfig:
    weights = None
    if args.weights is not None:
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError:
            raise UsageError("--weights must be comma-separated numbers") from None
    hierarchy = [h.strip() for h in args.hierarchy.split(",") if h.strip()] if args.hierarchy else []
    return RunConfig(
        kb=args.kb, query=args.query, user_spo=args.user_spo, reports=args.reports,
        greports=args.greports, algo=args.algo, trust=args.trust, relevance=args.relevance,
        k=args.k, rel_threshold=args.rel_threshold, collapse=args.collapse, weights=weights,
        skip=args.skip, hierarchy=hierarchy, weighting=args.weighting, output=args.format,
        depth_constant=args.depth_constant,
    )


def cmd_rank(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    rows = run_rank(cfg)
    if cfg.output == "json":
        doc = [{"rank": i, "atom": a, "score": s} for i, a, s in rows]
        print(json.dumps(doc, indent=2))
    else:
        for i, a, s in rows:
            print(f"{i}\t{a}\t{format_score(s)}")
    return EXIT_OK


def cmd_compare_greports(args: argparse.Namespace) -> int:
    reasoner = _load_kb(args.kb, args.depth_constant)
    hierarchy = [h.strip() for h in args.hierarchy.split(",") if h.strip()] if args.hierarchy else []
    greports = load_greports(args.greports, reasoner)
    index = GReportIndex(reasoner, _hierarchy(hierarchy, reasoner))
    for gr in greports:
        answers = ", ".join(sorted(str(a) for a in index.answers(gr)))
        print(f"{gr.id}\tanswers\t{{{answers}}}")
    for i, g1 in enumerate(greports):
        for g2 in greports[i + 1 :]:
            print(f"{g1.id}\t{index.compare(g1, g2).value}\t{g2.id}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reprank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("kb", type=Path, help="knowledge base file")
        p.add_argument("--depth-constant", type=int, default=None,
                       help="chase depth per query atom (default derived from the rules)")

    p = sub.add_parser("check", help="classify rules and check consistency")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("query", help="answer a conjunctive query")
    common(p)
    p.add_argument("query")
    p.add_argument("--atoms", action="store_true", help="print answers in atom form (simple queries)")
    p.add_argument("--dump-chase", action="store_true", help="print the chase prefix used")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("dump-chase", help="print the chase level by level")
    common(p)
    p.add_argument("--level", type=int, default=None)
    p.set_defaults(func=cmd_dump_chase)

    p = sub.add_parser("rank", help="rank the answers of a simple query by reports")
    common(p)
    p.add_argument("--query", required=True)
    p.add_argument("--user-spo", type=Path, default=None)
    p.add_argument("--reports", type=Path, default=None)
    p.add_argument("--greports", type=Path, default=None)
    p.add_argument("--algo", choices=("basic", "hist"), default="basic")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--rel-threshold", type=float, default=0.0)
    p.add_argument("--collapse", choices=COLLAPSE_NAMES, default=None)
    p.add_argument("--weights", default=None, help="ten comma-separated bucket weights")
    p.add_argument("--skip", type=int, default=None, help="buckets skipped by skip-k")
    p.add_argument("--trust", choices=sorted(TRUST_MEASURES), default="rank-exp")
    p.add_argument("--relevance", choices=sorted(RELEVANCE_MEASURES), default="rank-dist")
    p.add_argument("--hierarchy", default=None, help="comma-separated TGD labels")
    p.add_argument("--weighting", choices=sorted(WEIGHTINGS), default="rank-exp")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("compare-greports", help="print the more-general relation between g-reports")
    common(p)
    p.add_argument("--greports", type=Path, required=True)
    p.add_argument("--hierarchy", default=None)
    p.set_defaults(func=cmd_compare_greports)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InconsistentKBError as exc:
        print(f"error: inconsistent knowledge base: {exc.result.describe()}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
