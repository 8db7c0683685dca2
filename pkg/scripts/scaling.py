"""Time both ranking algorithms on synthetic databases of growing size.

    python3 scripts/scaling.py --sizes 1000 2000 4000 8000 --repeats 3

Prints one row per size and the log-log slope of time against facts.
"""

import argparse
import math
import statistics
import time

from reprank.chase import Reasoner
from reprank.parser import parse_query
from reprank.preferences import validate_spo
from reprank.ranking import collapse_drop_lowest, rep_rank_basic, rep_rank_hist
from reprank.reports import load_reports, relevance_rank_distance, trust_rank_exponential
from reprank.workloads import FEATURES, WorkloadConfig, make_workload


def best_of(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--reports-per-fact", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    user = validate_spo([("loc", "pri"), ("cl", "pri"), ("loc", "net"), ("pri", "br")], FEATURES)
    rows = []
    print(f"{'facts':>8}{'reports':>9}{'answers':>9}{'basic s':>10}{'hist s':>10}")
    for n in args.sizes:
        kb, entries = make_workload(WorkloadConfig(n, args.reports_per_fact, seed=args.seed))
        store = load_reports(entries, kb)
        q = parse_query("hotel(X)", kb.schema)
        n_answers = len(Reasoner(kb).answer(q))
        tb = best_of(lambda: rep_rank_basic(Reasoner(kb), q, None, user, trust_rank_exponential,
                                            relevance_rank_distance, store, 10), args.repeats)
        th = best_of(lambda: rep_rank_hist(Reasoner(kb), q, None, user, trust_rank_exponential,
                                           relevance_rank_distance, 0.1, collapse_drop_lowest, store, 10),
                     args.repeats)
        rows.append((n, tb, th))
        print(f"{n:>8}{len(entries):>9}{n_answers:>9}{tb:>10.4f}{th:>10.4f}")
    if len(rows) > 1:
        xs = [math.log(r[0]) for r in rows]
        for name, col in (("basic", 1), ("hist", 2)):
            slope = statistics.linear_regression(xs, [math.log(r[col]) for r in rows]).slope
            print(f"{name}: fitted exponent {slope:.2f}")


if __name__ == "__main__":
    main()
