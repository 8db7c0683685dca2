"""Print the trust/relevance tables and both rankings for the hotel fixture.

    python3 scripts/reproduce_running_example.py
"""

from pathlib import Path

from reprank.chase import Reasoner
from reprank.parser import parse_program, parse_query
from reprank.ranking import collapse_drop_lowest, rep_rank_basic, rep_rank_hist, summarize_reports
from reprank.reports import load_reports, load_user_spo, relevance_rank_distance, trust_rank_exponential

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    reasoner = Reasoner(parse_program((FIX / "running.dlp").read_text()))
    features = reasoner.kb.features_of("hotel")
    store = load_reports(FIX / "reports.json", reasoner)
    user = load_user_spo(FIX / "user_spo.json", features)
    query = parse_query("hotel(X)", reasoner.kb.schema)

    print("user ranks:", dict(zip(features, user.ranks())))
    print(f"{'report':<8}{'atom':<12}{'trust':<42}relevance")
    for atom, ids in sorted(store.by_atom.items(), key=lambda kv: str(kv[0])):
        for rid in ids:
            r = store.reports[rid]
            trust = ", ".join(f"{t:.5g}" for t in trust_rank_exponential(r))
            print(f"{rid:<8}{str(atom):<12}({trust}){'':<4}{relevance_rank_distance(r, user):.6g}")

    print("\nbasic ranking")
    for i, r in enumerate(rep_rank_basic(reasoner, query, None, user, trust_rank_exponential,
                                         relevance_rank_distance, store, k=3), 1):
        print(f"  {i}. {r.atom}  {r.score:.6f}")

    print("\nhistogram ranking (relevance >= 0.1, drop-lowest)")
    for atom in sorted(store.by_atom, key=str):
        kept = [r for r in store.reports_for(atom) if relevance_rank_distance(r, user) >= 0.1]
        summary = summarize_reports(trust_rank_exponential, kept, collapse_drop_lowest)
        print(f"  summary {atom}: ({', '.join(f'{s:.4g}' for s in summary)})")
    for i, r in enumerate(rep_rank_hist(reasoner, query, None, user, trust_rank_exponential,
                                        relevance_rank_distance, 0.1, collapse_drop_lowest, store, k=3), 1):
        print(f"  {i}. {r.atom}  {r.score:.6f}")


if __name__ == "__main__":
    main()
