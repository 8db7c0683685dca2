"""Synthetic accommodation workloads for timing experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass

from reprank.parser import parse_program

RULES = """
@pred hotel/1 features(loc, cl, pri, br, net).
@pred accom/1 features(loc, cl, pri, br, net).
@pred apthotel/1 features(loc, cl, pri, br, net).
@pred apartment/1.
@pred bb/1.
@pred hostel/1.
@pred bed/2.
@pred room/2.
@pred locatedIn/2.
s1: hotel(H) -> accom(H).
s2: apartment(A) -> accom(A).
s3: bb(B) -> accom(B).
s4: apthotel(A) -> hotel(A).
s5: hostel(H) -> exists B bed(B, H).
s6: hotel(H) -> exists R room(R, H).
s7: bb(B) -> exists R room(R, B).
"""

FEATURES = ("loc", "cl", "pri", "br", "net")
KINDS = ("hotel", "apthotel", "hostel", "bb", "apartment")


@dataclass
class WorkloadConfig:
    n_facts: int = 1000
    reports_per_fact: float = 0.25
    n_cities: int = 20
    seed: int = 0


def make_workload(cfg: WorkloadConfig):
    """A knowledge base with about ``n_facts`` facts and matching report entries.

    Half of the facts are typing facts, half are locations. Reports go to
    hotels and aparthotels (which are hotels through s4).
    """
    rng = random.Random(cfg.seed)
    n_things = cfg.n_facts // 2
    lines = [RULES]
    hotels = []
    for i in range(n_things):
        kind = rng.choice(KINDS)
        lines.append(f"{kind}(x{i}).")
        lines.append(f"locatedIn(x{i}, city{rng.randrange(cfg.n_cities)}).")
        if kind in ("hotel", "apthotel"):
            hotels.append(f"x{i}")
    kb = parse_program("\n".join(lines))
    entries = []
    for j in range(int(cfg.n_facts * cfg.reports_per_fact)):
        perm = rng.sample(FEATURES, len(FEATURES))
        prefers = [[a, b] for a, b in zip(perm, perm[1:]) if rng.random() < 0.5]
        entries.append({
            "id": f"r{j}",
            "atom": f"hotel({rng.choice(hotels)})",
            "scores": {f: round(rng.random(), 2) for f in FEATURES},
            "prefers": prefers,
            "register": {"nationality": rng.choice(["Italian", "Spanish", "French"])},
        })
    return kb, entries
