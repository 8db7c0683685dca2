"""Strict partial orders over features: closure, rank and similarity."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Sequence


class CycleError(ValueError):
    """The transitive closure of the given pairs is not irreflexive."""


class UnknownFeatureError(KeyError):
    pass


@dataclass(frozen=True)
class SPO:
    """A strict partial order; ``(a, b)`` in ``pairs`` reads "a is preferred to b".

    Build instances through :func:`validate_spo`, which closes the pairs
    transitively and rejects cycles.
    """

    universe: tuple[Hashable, ...]
    pairs: frozenset[tuple[Hashable, Hashable]] = frozenset()
    _ranks: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_ranks", _layer_ranks(self.universe, self.pairs))

    def prefers(self, a: Hashable, b: Hashable) -> bool:
        return (a, b) in self.pairs

    def rank(self, f: Hashable) -> int:
        try:
            return self._ranks[f]
        except KeyError:
            raise UnknownFeatureError(f) from None

    def ranks(self) -> tuple[int, ...]:
        return tuple(self._ranks[f] for f in self.universe)

    def restrict(self, universe: Sequence[Hashable]) -> SPO:
        """Same order over a new universe; pairs outside it are dropped."""
        keep = set(universe)
        return SPO(tuple(universe), frozenset(p for p in self.pairs if p[0] in keep and p[1] in keep))

    def reversed(self) -> SPO:
        return SPO(self.universe, frozenset((b, a) for a, b in self.pairs))

    def covering_pairs(self) -> list[tuple[Hashable, Hashable]]:
        """Hasse edges: pairs not implied by transitivity."""
        out = []
        for a, b in self.pairs:
            if not any((a, c) in self.pairs and (c, b) in self.pairs for c in self.universe):
                out.append((a, b))
        order = {f: i for i, f in enumerate(self.universe)}
        return sorted(out, key=lambda p: (order[p[0]], order[p[1]]))


def _layer_ranks(universe: Sequence[Hashable], pairs: frozenset) -> dict:
    # Peel maximal elements layer by layer.
    remaining = list(universe)
    ranks: dict = {}
    level = 1
    while remaining:
        left = set(remaining)
        top = [f for f in remaining if not any((g, f) in pairs for g in left if g != f)]
        if not top:
            raise CycleError("relation has a cycle; rank is undefined")
        for f in top:
            ranks[f] = level
        remaining = [f for f in remaining if f not in ranks]
        level += 1
    return ranks


def validate_spo(pairs: Iterable[tuple[Hashable, Hashable]], universe: Sequence[Hashable]) -> SPO:
    """Transitively close ``pairs`` over ``universe``, rejecting cycles."""
    universe = tuple(universe)
    known = set(universe)
    if len(known) != len(universe):
        raise ValueError("universe contains duplicates")
    closure: set[tuple[Hashable, Hashable]] = set()
    for a, b in pairs:
        for f in (a, b):
            if f not in known:
                raise UnknownFeatureError(f)
        closure.add((a, b))
    succ: dict = {f: {b for a, b in closure if a == f} for f in universe}
    for k in universe:
        for i in universe:
            if k in succ[i]:
                succ[i] |= succ[k]
    for f in universe:
        if f in succ[f]:
            raise CycleError(f"preference cycle through {f!r}")
    return SPO(universe, frozenset((a, b) for a in universe for b in succ[a]))


def rank(f: Hashable, spo: SPO) -> int:
    return spo.rank(f)


def sim_pair(fi: Hashable, fj: Hashable, p1: SPO, p2: SPO) -> float:
    """Agreement of two orders on one pair of features: 1, 0.5 or 0."""
    fwd = (p1.prefers(fi, fj), p2.prefers(fi, fj))
    bwd = (p1.prefers(fj, fi), p2.prefers(fj, fi))
    if any(fwd) and any(bwd):
        return 0.0
    if all(fwd) or all(bwd):
        return 1.0
    if not any(fwd) and not any(bwd):
        return 1.0
    return 0.5


def sim(p1: SPO, p2: SPO) -> float:
    """Mean pairwise agreement over all unordered feature pairs."""
    if set(p1.universe) != set(p2.universe):
        raise ValueError("orders are over different universes")
    n = len(p1.universe)
    if n < 2:
        return 1.0
    total = sum(sim_pair(a, b, p1, p2) for a, b in combinations(p1.universe, 2))
    return total / (n * (n - 1) / 2)
